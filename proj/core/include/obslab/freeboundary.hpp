#pragma once

#include <vector>

#include "obslab/grid.hpp"

namespace obslab {

inline constexpr double kDefaultContactKappa = 2.0;
inline constexpr double kDefaultNondegeneracySlack = 0.15;

struct ContactSet {
  GridSpec grid;
  std::vector<bool> mask;  ///< true = contact
  double threshold = 0.0;  ///< kappa h^2

  std::size_t count() const;
};

struct FreeBoundarySet {
  std::vector<std::size_t> nodes;
  std::vector<Point> points;

  bool empty() const noexcept { return nodes.empty(); }
  std::size_t size() const noexcept { return nodes.size(); }
};

struct GrowthReport {
  Point center{};
  std::vector<double> radii;
  std::vector<double> ratios;  ///< sup_{B_r} u / r^2
  double c_upper = 0.0;
  double c_lower = 0.0;
  double slack = kDefaultNondegeneracySlack;
  bool nondegenerate = false;   ///< c_lower >= (1 - slack) / (2n)
  bool bounded_growth = false;  ///< C_upper finite and C_upper / c_lower <= 10
};

/// Contact mask {u <= kappa h^2}.
///
/// Throws NotNormalizedSolutionError when the field dips below -kappa h^2,
/// and std::invalid_argument unless kappa > 0.
ContactSet extract_contact_set(const ScalarField& field, double kappa = kDefaultContactKappa);

/// Nodes whose closed axis neighbourhood (the node and its 2n stencil
/// neighbours) contains both contact and non-contact nodes.
FreeBoundarySet extract_free_boundary(const ContactSet& contact);

/// Two-sided quadratic growth ratios at x0.
///
/// Throws ResolutionError when a radius is below 4h and OutOfDomainError when
/// a ball leaves the box.
GrowthReport growth_report(const ScalarField& field, const Point& x0, const std::vector<double>& radii,
                           double slack = kDefaultNondegeneracySlack);

/// Radii r = r_min, r_min + step, ... not exceeding min(r_max, dist(x0, box)).
std::vector<double> admissible_radii(const GridSpec& grid, const Point& x0, double r_min, double r_max,
                                     double step);

}  // namespace obslab
