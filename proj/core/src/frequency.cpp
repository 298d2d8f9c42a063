#include "obslab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "obslab/monotonicity.hpp"
#include "obslab/quadrature.hpp"

namespace obslab {

FrequencyEstimate frequency_lambda(const ScalarField& field, const Point& x0, const QuadraticForm& p,
                                   const std::vector<double>& radii) {
  if (!p.is_admissible()) throw MembershipError("frequency reference form is not in the blow-up class");
  if (radii.size() < 2) throw std::invalid_argument("frequency fit needs at least two radii");
  const GridSpec& g = field.grid();
  const int n = g.dimension();
  const ScalarField w = polynomial_residual(field, x0, p);
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(field.max_abs(), std::numeric_limits<double>::min());

  FrequencyEstimate est;
  est.radii = radii;
  est.r_min = *std::min_element(radii.begin(), radii.end());
  est.r_max = *std::max_element(radii.begin(), radii.end());
  est.defined = true;
  for (double r : radii) {
    require_quadrature_ball(g, Ball{x0, r}, 4.0);
    const Ball ball{x0, r};
    const double s = sphere_quadrature(n, ball, default_angular_samples(g, r), [&](const Point& q) {
      const double v = interpolate(w, q);
      return v * v;
    });
    const double nr = std::sqrt(std::pow(r, 1 - n) * s);
    est.sphere_norms.push_back(nr);
    if (!(nr > floor)) est.defined = false;
  }
  if (!est.defined) return est;

  const auto k = static_cast<double>(radii.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double x = std::log(radii[i]);
    const double y = std::log(est.sphere_norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / k;
  const double vy = syy - sy * sy / k;
  const double cxy = sxy - sx * sy / k;
  if (!(vx > 0.0)) throw std::invalid_argument("frequency fit needs at least two distinct radii");
  est.lambda = cxy / vx;
  est.r_squared = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return est;
}

}  // namespace obslab
