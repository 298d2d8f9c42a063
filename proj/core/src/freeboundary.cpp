#include "obslab/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace obslab {

std::size_t ContactSet::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

ContactSet extract_contact_set(const ScalarField& field, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("contact threshold factor must be positive");
  const GridSpec& g = field.grid();
  const double eps = kappa * g.spacing() * g.spacing();
  const double floor = -eps;
  ContactSet out{g, std::vector<bool>(g.size(), false), eps};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (field[i] < floor) {
      std::ostringstream msg;
      msg << "field value " << field[i] << " at node " << i << " is negative; not a normalized solution";
      throw NotNormalizedSolutionError(msg.str());
    }
    out.mask[i] = field[i] <= eps;
  }
  return out;
}

FreeBoundarySet extract_free_boundary(const ContactSet& contact) {
  const GridSpec& g = contact.grid;
  const int n = g.dimension();
  FreeBoundarySet fb;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const NodeIndex idx = g.multi(i);
    bool has_contact = contact.mask[i];
    bool has_free = !contact.mask[i];
    for (int a = 0; a < n; ++a) {
      const std::size_t st = g.stride(a);
      if (idx[a] > 0) {
        (contact.mask[i - st] ? has_contact : has_free) = true;
      }
      if (idx[a] + 1 < g.nodes(a)) {
        (contact.mask[i + st] ? has_contact : has_free) = true;
      }
    }
    if (has_contact && has_free) {
      fb.nodes.push_back(i);
      fb.points.push_back(g.coordinate(idx));
    }
  }
  return fb;
}

GrowthReport growth_report(const ScalarField& field, const Point& x0, const std::vector<double>& radii,
                           double slack) {
  const GridSpec& g = field.grid();
  const double h = g.spacing();
  if (radii.empty()) throw std::invalid_argument("growth report needs at least one radius");
  GrowthReport rep;
  rep.center = x0;
  rep.radii = radii;
  rep.slack = slack;
  for (double r : radii) {
    if (r < 4.0 * h * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "growth radius " << r << " is below 4h";
      throw ResolutionError(msg.str());
    }
    const double s = sup_on_ball(field, Ball{x0, r});
    rep.ratios.push_back(std::max(0.0, s) / (r * r));
  }
  rep.c_upper = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.c_lower = *std::min_element(rep.ratios.begin(), rep.ratios.end());
  const int n = g.dimension();
  rep.nondegenerate = rep.c_lower >= (1.0 - slack) / (2.0 * n);
  rep.bounded_growth = std::isfinite(rep.c_upper) && rep.c_lower > 0.0 && rep.c_upper / rep.c_lower <= 10.0;
  return rep;
}

std::vector<double> admissible_radii(const GridSpec& grid, const Point& x0, double r_min, double r_max,
                                     double step) {
  if (!(step > 0.0)) throw std::invalid_argument("radius step must be positive");
  const double limit = std::min(r_max, grid.distance_to_boundary(x0));
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double r = r_min + k * step;
    if (r > limit * (1.0 + 1e-12)) break;
    out.push_back(std::min(r, limit));
  }
  return out;
}

}  // namespace obslab
