#pragma once

#include <vector>

#include "obslab/fixtures.hpp"
#include "obslab/grid.hpp"

namespace obslab {

struct FrequencyEstimate {
  /// Least-squares slope of log N(r) against log r, where
  /// N(r) = (r^{1-n} int_{dB_r(x0)} w^2)^{1/2} and w = u - p(. - x0).
  double lambda = 0.0;
  double r_squared = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  std::vector<double> radii;
  std::vector<double> sphere_norms;
  /// False when some N(r) is below 100 eps times the field scale.
  bool defined = false;
};

/// Throws MembershipError unless p is admissible, std::invalid_argument for
/// fewer than two radii, ResolutionError / OutOfDomainError per radius.
FrequencyEstimate frequency_lambda(const ScalarField& field, const Point& x0, const QuadraticForm& p,
                                   const std::vector<double>& radii);

}  // namespace obslab
