#pragma once

#include <optional>
#include <vector>

#include "obslab/fixtures.hpp"
#include "obslab/grid.hpp"

namespace obslab {

/// Weiss energy of every member of the blow-up class in R^n:
/// 1/3, pi/8, and (n = 3) the value of W(1, |x|^2/6) obtained by radial
/// quadrature and frozen here.
double weiss_constant(int dimension);

enum class ProfileQuantity { Weiss, Monneau, SphereNorm };

const char* to_string(ProfileQuantity q);

struct MonotoneVerdict {
  bool non_decreasing = true;
  /// First radius at which the value fell more than delta below the running
  /// maximum, and by how much. Meaningful only when !non_decreasing.
  double violation_radius = 0.0;
  double violation_amount = 0.0;
};

struct Profile {
  ProfileQuantity quantity = ProfileQuantity::Weiss;
  std::vector<double> radii;
  std::vector<double> values;
  MonotoneVerdict verdict;
  double delta = 0.0;
  /// Set for Monneau profiles evaluated at points not known to be singular.
  bool advisory = false;
};

/// NonDecreasing iff values[j] >= max_{i<j} values[i] - delta for all j.
/// Throws std::invalid_argument unless radii are strictly increasing and
/// match values in length.
MonotoneVerdict check_monotone(const std::vector<double>& radii, const std::vector<double>& values, double delta);

/// max(0.02 c_n, 5 (h / r_min) c_n).
double profile_tolerance(int dimension, double spacing, double r_min);

/// Bound on the Monneau value caused by multilinear interpolation of a
/// field whose Hessian has unit trace: |dB_1| (h^2 / (8 r^2))^2.
double monneau_quadrature_tolerance(int dimension, double spacing, double radius);

/// Caches |grad u|^2 + 2u so that many Weiss evaluations on one field are
/// cheap. Ball integrals use the cell-fraction rule.
class WeissEvaluator {
 public:
  explicit WeissEvaluator(const ScalarField& field);

  /// W(r, u(x0 + .)). Throws ResolutionError for r < 4h, OutOfDomainError
  /// when the ball leaves the box.
  double energy(const Point& x0, double r) const;

  const ScalarField& field() const noexcept { return field_; }

 private:
  ScalarField field_;
  ScalarField density_;
};

double weiss_energy(const ScalarField& field, const Point& x0, double r);

/// Weiss energy on each radius with a monotonicity verdict. `delta` defaults
/// to profile_tolerance(n, h, radii.front()).
Profile weiss_profile(const ScalarField& field, const Point& x0, const std::vector<double>& radii,
                      std::optional<double> delta = std::nullopt);

/// |W(r_min) - c_n| for the smallest radius in `radii`.
double weiss_limit_gap(const ScalarField& field, const Point& x0, const std::vector<double>& radii);

/// M(r, u, p) = r^{-(n+3)} int_{dB_r(x0)} (u - p(. - x0))^2. The difference
/// is formed at the nodes and then interpolated, so u = p gives exactly 0.
///
/// Throws MembershipError unless p is admissible.
double monneau(const ScalarField& field, const Point& x0, const QuadraticForm& p, double r);

/// Monneau values with a verdict. The verdict is advisory unless the caller
/// asserts that x0 is a singular point.
Profile monneau_profile(const ScalarField& field, const Point& x0, const QuadraticForm& p,
                        const std::vector<double>& radii, bool singular_point = false,
                        std::optional<double> delta = std::nullopt);

/// Nodal field u(x) - p(x - x0).
ScalarField polynomial_residual(const ScalarField& field, const Point& x0, const QuadraticForm& p);

}  // namespace obslab
