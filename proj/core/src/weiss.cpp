#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "obslab/monotonicity.hpp"
#include "obslab/quadrature.hpp"

namespace obslab {

namespace {

// W(1, |x|^2/6) in R^3, from radial Simpson quadrature with 2^12 panels.
constexpr double kWeissConstant3 = 0.41887902047863906;

void require_weiss_radius(const GridSpec& g, double r) {
  if (r < 4.0 * g.spacing() * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "radius " << r << " is below 4h; Weiss/Monneau quadrature unreliable";
    throw ResolutionError(msg.str());
  }
}

ScalarField weiss_density(const ScalarField& u) {
  const auto grad = gradient(u);
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double g2 = 0.0;
    for (const auto& gi : grad) g2 += gi[i] * gi[i];
    d[i] = g2 + 2.0 * u[i];
  }
  return ScalarField(u.grid(), std::move(d));
}

double sphere_of_squares(const ScalarField& f, const Ball& ball) {
  const GridSpec& g = f.grid();
  const int samples = default_angular_samples(g, ball.radius);
  return sphere_quadrature(g.dimension(), ball, samples, [&](const Point& p) {
    const double v = interpolate(f, p);
    return v * v;
  });
}

}  // namespace

double weiss_constant(int dimension) {
  switch (dimension) {
    case 1: return 1.0 / 3.0;
    case 2: return std::numbers::pi / 8.0;
    case 3: return kWeissConstant3;
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

const char* to_string(ProfileQuantity q) {
  switch (q) {
    case ProfileQuantity::Weiss: return "weiss";
    case ProfileQuantity::Monneau: return "monneau";
    case ProfileQuantity::SphereNorm: return "sphere_norm";
  }
  return "unknown";
}

MonotoneVerdict check_monotone(const std::vector<double>& radii, const std::vector<double>& values,
                               double delta) {
  if (radii.size() != values.size()) throw std::invalid_argument("profile radii and values differ in length");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("profile radii must be strictly increasing");
  }
  MonotoneVerdict v;
  double running_max = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] < running_max - delta) {
      v.non_decreasing = false;
      v.violation_radius = radii[j];
      v.violation_amount = running_max - values[j];
      return v;
    }
    running_max = std::max(running_max, values[j]);
  }
  return v;
}

double profile_tolerance(int dimension, double spacing, double r_min) {
  const double c = weiss_constant(dimension);
  return std::max(0.02 * c, 5.0 * (spacing / r_min) * c);
}

double monneau_quadrature_tolerance(int dimension, double spacing, double radius) {
  const double e = spacing * spacing / (8.0 * radius * radius);
  return unit_sphere_area(dimension) * e * e;
}

WeissEvaluator::WeissEvaluator(const ScalarField& field) : field_(field), density_(weiss_density(field)) {}

double WeissEvaluator::energy(const Point& x0, double r) const {
  const GridSpec& g = field_.grid();
  require_weiss_radius(g, r);
  const Ball ball{x0, r};
  const int n = g.dimension();
  const double bulk = ball_integral(density_, ball, BallRule::CellFraction);
  const double surface = sphere_of_squares(field_, ball);
  return bulk / std::pow(r, n + 2) - 2.0 * surface / std::pow(r, n + 3);
}

double weiss_energy(const ScalarField& field, const Point& x0, double r) {
  require_weiss_radius(field.grid(), r);
  require_inside(field.grid(), Ball{x0, r});
  return WeissEvaluator(field).energy(x0, r);
}

Profile weiss_profile(const ScalarField& field, const Point& x0, const std::vector<double>& radii,
                      std::optional<double> delta) {
  if (radii.empty()) throw std::invalid_argument("profile needs at least one radius");
  const WeissEvaluator w(field);
  Profile p;
  p.quantity = ProfileQuantity::Weiss;
  p.radii = radii;
  for (double r : radii) p.values.push_back(w.energy(x0, r));
  p.delta = delta.value_or(profile_tolerance(field.grid().dimension(), field.grid().spacing(), radii.front()));
  p.verdict = check_monotone(p.radii, p.values, p.delta);
  return p;
}

double weiss_limit_gap(const ScalarField& field, const Point& x0, const std::vector<double>& radii) {
  if (radii.empty()) throw std::invalid_argument("weiss_limit_gap needs at least one radius");
  const double r_min = *std::min_element(radii.begin(), radii.end());
  return std::abs(weiss_energy(field, x0, r_min) - weiss_constant(field.grid().dimension()));
}

ScalarField polynomial_residual(const ScalarField& field, const Point& x0, const QuadraticForm& p) {
  const GridSpec& g = field.grid();
  if (p.dimension() != g.dimension()) throw GridMismatchError("form and field dimensions differ");
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = field[i] - p(g.coordinate(i) - x0);
  return ScalarField(g, std::move(w));
}

double monneau(const ScalarField& field, const Point& x0, const QuadraticForm& p, double r) {
  if (!p.is_admissible()) throw MembershipError("Monneau probe form is not in the blow-up class");
  const GridSpec& g = field.grid();
  require_weiss_radius(g, r);
  require_inside(g, Ball{x0, r});
  const ScalarField w = polynomial_residual(field, x0, p);
  return sphere_of_squares(w, Ball{x0, r}) / std::pow(r, g.dimension() + 3);
}

Profile monneau_profile(const ScalarField& field, const Point& x0, const QuadraticForm& p,
                        const std::vector<double>& radii, bool singular_point, std::optional<double> delta) {
  if (!p.is_admissible()) throw MembershipError("Monneau probe form is not in the blow-up class");
  if (radii.empty()) throw std::invalid_argument("profile needs at least one radius");
  const GridSpec& g = field.grid();
  const ScalarField w = polynomial_residual(field, x0, p);
  Profile prof;
  prof.quantity = ProfileQuantity::Monneau;
  prof.radii = radii;
  prof.advisory = !singular_point;
  for (double r : radii) {
    require_weiss_radius(g, r);
    require_inside(g, Ball{x0, r});
    prof.values.push_back(sphere_of_squares(w, Ball{x0, r}) / std::pow(r, g.dimension() + 3));
  }
  prof.delta = delta.value_or(profile_tolerance(g.dimension(), g.spacing(), radii.front()));
  prof.verdict = check_monotone(prof.radii, prof.values, prof.delta);
  return prof;
}

}  // namespace obslab
