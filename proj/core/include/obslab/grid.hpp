#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "obslab/errors.hpp"

namespace obslab {

inline constexpr int kMaxDimension = 3;

/// A point in R^n, n <= 3. Components beyond the grid dimension are ignored
/// and kept at zero by every routine that produces points.
using Point = std::array<double, kMaxDimension>;

/// Multi-index of a grid node.
using NodeIndex = std::array<std::size_t, kMaxDimension>;

double dot(const Point& a, const Point& b, int dimension);
double norm(const Point& a, int dimension);
Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(double s, const Point& a);

/// Uniform structured grid on an axis-aligned box.
///
/// Nodes are stored in row-major order: the last axis varies fastest.
class GridSpec {
 public:
  /// Throws InvalidGridError unless 1 <= dimension <= 3, every axis has at
  /// least 3 nodes, upper > lower, and all axes share the same spacing to
  /// within 1e-12 (relative).
  GridSpec(int dimension, std::span<const double> lower, std::span<const double> upper,
           std::span<const std::size_t> nodes_per_axis);

  /// The cube [lower, upper]^dimension with `nodes` nodes per axis.
  static GridSpec cube(int dimension, double lower, double upper, std::size_t nodes);

  int dimension() const noexcept { return dimension_; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  std::size_t nodes(int axis) const { return nodes_[axis]; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(int axis) const { return stride_[axis]; }

  std::size_t flat(const NodeIndex& index) const;
  NodeIndex multi(std::size_t flat_index) const;
  Point coordinate(std::size_t flat_index) const;
  Point coordinate(const NodeIndex& index) const;

  bool is_boundary(std::size_t flat_index) const;
  bool is_boundary(const NodeIndex& index) const;

  /// True when `p` lies in the closed box, allowing a relative slack of
  /// 1e-12 times the box size.
  bool contains(const Point& p) const;

  /// Euclidean distance from `p` to the box boundary (negative outside).
  double distance_to_boundary(const Point& p) const;

  /// Cell volume h^n.
  double cell_volume() const;

  bool operator==(const GridSpec& other) const;

 private:
  int dimension_;
  std::array<double, kMaxDimension> lower_{};
  std::array<double, kMaxDimension> upper_{};
  std::array<std::size_t, kMaxDimension> nodes_{1, 1, 1};
  std::array<std::size_t, kMaxDimension> stride_{};
  double h_ = 0.0;
  std::size_t size_ = 0;
};

/// One real value per grid node. Values are always finite.
class ScalarField {
 public:
  /// Zero field.
  explicit ScalarField(GridSpec grid);
  /// Throws InvalidGridError on size mismatch and std::invalid_argument on
  /// non-finite entries.
  ScalarField(GridSpec grid, std::vector<double> values);

  static ScalarField sample(const GridSpec& grid, const std::function<double(const Point&)>& f);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  /// Mutable access. Callers are responsible for keeping values finite.
  double& operator[](std::size_t i) { return values_[i]; }

  double min() const;
  double max() const;
  double max_abs() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Values defined at interior nodes only; boundary nodes carry no value.
class InteriorField {
 public:
  InteriorField(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  bool defined(std::size_t i) const { return !grid_.is_boundary(i); }
  /// Value at an interior node. Undefined nodes return NaN.
  double operator[](std::size_t i) const { return values_[i]; }

  double interior_min() const;
  double interior_max() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

struct Ball {
  Point center{};
  double radius = 0.0;
};

/// Throws OutOfDomainError unless the closed ball lies in the grid box.
void require_inside(const GridSpec& grid, const Ball& ball);

/// Second-order central Laplacian at interior nodes.
InteriorField discrete_laplacian(const ScalarField& field);

/// Multilinear interpolation. Throws OutOfDomainError outside the box.
double interpolate(const ScalarField& field, const Point& p);

/// Central differences at interior nodes, second-order one-sided differences
/// at boundary nodes. Exact on quadratics everywhere.
std::vector<ScalarField> gradient(const ScalarField& field);

/// Maximum nodal value over nodes inside the closed ball; falls back to the
/// interpolated center value when no node lies inside.
double sup_on_ball(const ScalarField& field, const Ball& ball);

}  // namespace obslab
