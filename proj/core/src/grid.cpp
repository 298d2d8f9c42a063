#include "obslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace obslab {

double dot(const Point& a, const Point& b, int dimension) {
  double s = 0.0;
  for (int i = 0; i < dimension; ++i) s += a[i] * b[i];
  return s;
}

double norm(const Point& a, int dimension) { return std::sqrt(dot(a, a, dimension)); }

Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Point operator*(double s, const Point& a) { return {s * a[0], s * a[1], s * a[2]}; }

GridSpec::GridSpec(int dimension, std::span<const double> lower, std::span<const double> upper,
                   std::span<const std::size_t> nodes_per_axis)
    : dimension_(dimension) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw InvalidGridError("grid dimension must be 1, 2 or 3");
  }
  const auto d = static_cast<std::size_t>(dimension);
  if (lower.size() != d || upper.size() != d || nodes_per_axis.size() != d) {
    throw InvalidGridError("grid bounds and node counts must have one entry per axis");
  }
  for (int a = 0; a < dimension; ++a) {
    if (!std::isfinite(lower[a]) || !std::isfinite(upper[a]) || !(upper[a] > lower[a])) {
      throw InvalidGridError("grid box must satisfy upper > lower on every axis");
    }
    if (nodes_per_axis[a] < 3) throw InvalidGridError("grid needs at least 3 nodes per axis");
    lower_[a] = lower[a];
    upper_[a] = upper[a];
    nodes_[a] = nodes_per_axis[a];
  }
  h_ = (upper_[0] - lower_[0]) / static_cast<double>(nodes_[0] - 1);
  for (int a = 1; a < dimension; ++a) {
    const double ha = (upper_[a] - lower_[a]) / static_cast<double>(nodes_[a] - 1);
    if (std::abs(ha - h_) > 1e-12 * std::max(1.0, h_)) {
      std::ostringstream msg;
      msg << "grid spacing differs between axes (" << h_ << " vs " << ha << ")";
      throw InvalidGridError(msg.str());
    }
  }
  stride_[dimension - 1] = 1;
  for (int a = dimension - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * nodes_[a + 1];
  size_ = stride_[0] * nodes_[0];
}

GridSpec GridSpec::cube(int dimension, double lower, double upper, std::size_t nodes) {
  const std::array<double, 3> lo{lower, lower, lower};
  const std::array<double, 3> hi{upper, upper, upper};
  const std::array<std::size_t, 3> n{nodes, nodes, nodes};
  const auto d = static_cast<std::size_t>(std::clamp(dimension, 0, kMaxDimension));
  if (d == 0 || dimension > kMaxDimension) throw InvalidGridError("grid dimension must be 1, 2 or 3");
  return GridSpec(dimension, std::span(lo).first(d), std::span(hi).first(d), std::span(n).first(d));
}

std::size_t GridSpec::flat(const NodeIndex& index) const {
  std::size_t f = 0;
  for (int a = 0; a < dimension_; ++a) f += index[a] * stride_[a];
  return f;
}

NodeIndex GridSpec::multi(std::size_t flat_index) const {
  NodeIndex idx{0, 0, 0};
  for (int a = 0; a < dimension_; ++a) {
    idx[a] = flat_index / stride_[a];
    flat_index -= idx[a] * stride_[a];
  }
  return idx;
}

Point GridSpec::coordinate(const NodeIndex& index) const {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dimension_; ++a) {
    // The last node is pinned to `upper` so that boundary coordinates are exact.
    p[a] = index[a] + 1 == nodes_[a] ? upper_[a] : lower_[a] + static_cast<double>(index[a]) * h_;
  }
  return p;
}

Point GridSpec::coordinate(std::size_t flat_index) const { return coordinate(multi(flat_index)); }

bool GridSpec::is_boundary(const NodeIndex& index) const {
  for (int a = 0; a < dimension_; ++a) {
    if (index[a] == 0 || index[a] + 1 == nodes_[a]) return true;
  }
  return false;
}

bool GridSpec::is_boundary(std::size_t flat_index) const { return is_boundary(multi(flat_index)); }

bool GridSpec::contains(const Point& p) const {
  for (int a = 0; a < dimension_; ++a) {
    const double slack = 1e-12 * (upper_[a] - lower_[a]);
    if (!(p[a] >= lower_[a] - slack && p[a] <= upper_[a] + slack)) return false;
  }
  return true;
}

double GridSpec::distance_to_boundary(const Point& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dimension_; ++a) d = std::min({d, p[a] - lower_[a], upper_[a] - p[a]});
  return d;
}

double GridSpec::cell_volume() const { return std::pow(h_, dimension_); }

bool GridSpec::operator==(const GridSpec& other) const {
  if (dimension_ != other.dimension_) return false;
  for (int a = 0; a < dimension_; ++a) {
    if (nodes_[a] != other.nodes_[a] || lower_[a] != other.lower_[a] || upper_[a] != other.upper_[a]) {
      return false;
    }
  }
  return true;
}

ScalarField::ScalarField(GridSpec grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidGridError("field value count does not match grid");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("field values must be finite");
  }
}

ScalarField ScalarField::sample(const GridSpec& grid, const std::function<double(const Point&)>& f) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid.coordinate(i));
  return ScalarField(grid, std::move(values));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

InteriorField::InteriorField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {}

double InteriorField::interior_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (defined(i)) m = std::min(m, values_[i]);
  }
  return m;
}

double InteriorField::interior_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (defined(i)) m = std::max(m, values_[i]);
  }
  return m;
}

void require_inside(const GridSpec& grid, const Ball& ball) {
  const int n = grid.dimension();
  for (int a = 0; a < n; ++a) {
    const double slack = 1e-12 * (grid.upper(a) - grid.lower(a));
    if (ball.center[a] - ball.radius < grid.lower(a) - slack ||
        ball.center[a] + ball.radius > grid.upper(a) + slack) {
      std::ostringstream msg;
      msg << "ball of radius " << ball.radius << " leaves the grid box along axis " << a;
      throw OutOfDomainError(msg.str());
    }
  }
}

InteriorField discrete_laplacian(const ScalarField& field) {
  const GridSpec& g = field.grid();
  const int n = g.dimension();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  std::vector<double> out(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i)) continue;
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      const std::size_t st = g.stride(a);
      s += field[i + st] - 2.0 * field[i] + field[i - st];
    }
    out[i] = s * inv_h2;
  }
  return InteriorField(g, std::move(out));
}

namespace {

// Cell containing p along one axis together with the local coordinate in [0,1].
struct AxisCell {
  std::size_t index;
  double t;
};

AxisCell locate(const GridSpec& g, int axis, double x) {
  double s = (x - g.lower(axis)) / g.spacing();
  // Snap round-off so that node coordinates reproduce nodal values exactly.
  const double nearest = std::round(s);
  if (std::abs(s - nearest) <= 1e-9) s = nearest;
  const auto last = static_cast<double>(g.nodes(axis) - 2);
  const double cell = std::clamp(std::floor(s), 0.0, last);
  return {static_cast<std::size_t>(cell), std::clamp(s - cell, 0.0, 1.0)};
}

}  // namespace

double interpolate(const ScalarField& field, const Point& p) {
  const GridSpec& g = field.grid();
  if (!g.contains(p)) throw OutOfDomainError("interpolation point outside the grid box");
  const int n = g.dimension();
  std::array<AxisCell, kMaxDimension> cells{};
  for (int a = 0; a < n; ++a) cells[a] = locate(g, a, p[a]);

  double result = 0.0;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      const bool up = (c >> a) & 1;
      w *= up ? cells[a].t : 1.0 - cells[a].t;
      idx += (cells[a].index + (up ? 1 : 0)) * g.stride(a);
    }
    if (w != 0.0) result += w * field[idx];
  }
  return result;
}

std::vector<ScalarField> gradient(const ScalarField& field) {
  const GridSpec& g = field.grid();
  const int n = g.dimension();
  const double h = g.spacing();
  std::vector<ScalarField> out;
  out.reserve(n);
  for (int a = 0; a < n; ++a) {
    std::vector<double> d(g.size());
    const std::size_t st = g.stride(a);
    const std::size_t last = g.nodes(a) - 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t k = g.multi(i)[a];
      if (k == 0) {
        d[i] = (-3.0 * field[i] + 4.0 * field[i + st] - field[i + 2 * st]) / (2.0 * h);
      } else if (k == last) {
        d[i] = (3.0 * field[i] - 4.0 * field[i - st] + field[i - 2 * st]) / (2.0 * h);
      } else {
        d[i] = (field[i + st] - field[i - st]) / (2.0 * h);
      }
    }
    out.emplace_back(g, std::move(d));
  }
  return out;
}

double sup_on_ball(const ScalarField& field, const Ball& ball) {
  const GridSpec& g = field.grid();
  require_inside(g, ball);
  const int n = g.dimension();
  const double h = g.spacing();
  NodeIndex lo{0, 0, 0};
  NodeIndex hi{0, 0, 0};
  for (int a = 0; a < n; ++a) {
    const double smin = std::ceil((ball.center[a] - ball.radius - g.lower(a)) / h - 1e-9);
    const double smax = std::floor((ball.center[a] + ball.radius - g.lower(a)) / h + 1e-9);
    lo[a] = static_cast<std::size_t>(std::max(0.0, smin));
    hi[a] = static_cast<std::size_t>(std::min(static_cast<double>(g.nodes(a) - 1), smax));
  }
  const double r2 = ball.radius * ball.radius * (1.0 + 1e-12);
  bool found = false;
  double best = -std::numeric_limits<double>::infinity();
  NodeIndex idx = lo;
  for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0]) {
    for (idx[1] = lo[1]; idx[1] <= hi[1]; ++idx[1]) {
      for (idx[2] = lo[2]; idx[2] <= hi[2]; ++idx[2]) {
        const Point x = g.coordinate(idx);
        const Point d = x - ball.center;
        if (dot(d, d, n) <= r2) {
          found = true;
          best = std::max(best, field[g.flat(idx)]);
        }
      }
    }
  }
  return found ? best : interpolate(field, ball.center);
}

}  // namespace obslab
