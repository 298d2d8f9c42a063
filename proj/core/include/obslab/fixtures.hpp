#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "obslab/grid.hpp"

namespace obslab {

/// Symmetric n x n matrix A describing p(x) = 1/2 <Ax, x>.
class QuadraticForm {
 public:
  /// Throws std::invalid_argument unless `a` is square, 1 <= n <= 3, and
  /// exactly symmetric.
  explicit QuadraticForm(Eigen::MatrixXd a);

  static QuadraticForm diagonal(std::initializer_list<double> entries);
  /// |x|^2 / (2n): the rotation-invariant member of the blow-up class.
  static QuadraticForm isotropic(int dimension);
  /// 1/2 (e.x)^2 for a unit vector e.
  static QuadraticForm rank_one(const Point& direction, int dimension);

  int dimension() const noexcept { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  double trace() const { return a_.trace(); }
  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues() const;

  double operator()(const Point& x) const;

  /// Membership in the blow-up class: eigenvalues >= -1e-10 and
  /// |tr A - 1| <= 1e-10.
  bool is_admissible(double tol = 1e-10) const;

  /// Nearest admissible form by eigenvalue clipping and trace
  /// renormalisation. Throws MembershipError when every eigenvalue is <= 0.
  QuadraticForm project_admissible() const;

  /// Number of eigenvalues below `eigen_tol`.
  int kernel_dimension(double eigen_tol) const;

  double frobenius_distance(const QuadraticForm& other) const;

 private:
  Eigen::MatrixXd a_;
};

/// Five fixed admissible probe forms: isotropic, two rank-one forms, and two
/// random trace-one PSD forms drawn from `seed`.
std::vector<QuadraticForm> probe_forms(int dimension, unsigned seed = 20180611u);

struct HalfSpaceSolution {
  Point direction{};
};
struct PolynomialSolution {
  QuadraticForm form;
};
struct RadialSolution {
  double contact_radius = 0.0;
};
struct OneDSolution {
  double contact_halfwidth = 0.0;
};

/// Closed-form solution of Delta u = chi_{u>0}, u >= 0.
class ReferenceSolution {
 public:
  using Kind = std::variant<HalfSpaceSolution, PolynomialSolution, RadialSolution, OneDSolution>;

  int dimension() const noexcept { return dimension_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string name() const;

  double operator()(const Point& x) const;
  /// True on the exact contact set {u = 0}.
  bool in_contact(const Point& x) const;

 private:
  friend ReferenceSolution halfspace(const Point&, int);
  friend ReferenceSolution polynomial(const QuadraticForm&);
  friend ReferenceSolution radial(double);
  friend ReferenceSolution one_d(double);
  ReferenceSolution(int dimension, Kind kind) : dimension_(dimension), kind_(std::move(kind)) {}

  int dimension_;
  Kind kind_;
};

/// x -> 1/2 [(e.x)_+]^2. Throws NormalizationError unless |e| = 1 (1e-12).
ReferenceSolution halfspace(const Point& direction, int dimension);
/// x -> 1/2 <Ax, x>. Throws MembershipError unless A is admissible.
ReferenceSolution polynomial(const QuadraticForm& form);
/// Planar radial solution with contact disc of radius a:
/// u = (rho^2 - a^2)/4 - (a^2/2) ln(rho/a) for rho > a. Throws DomainError
/// unless a > 0 (the box check happens in `sample`).
ReferenceSolution radial(double contact_radius);
/// x -> 1/2 (|x| - a)_+^2 on the line. Throws DomainError unless a > 0.
ReferenceSolution one_d(double contact_halfwidth);

/// Nodal evaluation. Throws GridMismatchError on a dimension mismatch and
/// DomainError when a radial/one_d contact radius reaches the box half-width.
ScalarField sample(const ReferenceSolution& ref, const GridSpec& grid);

}  // namespace obslab
