#include "obslab/quadrature.hpp"

#include <sstream>
#include <stdexcept>

namespace obslab {

namespace {

constexpr int kSubsamples = 8;

struct NodeBox {
  NodeIndex lo{0, 0, 0};
  NodeIndex hi{0, 0, 0};
};

NodeBox bounding_nodes(const GridSpec& g, const Ball& ball) {
  NodeBox box;
  const double h = g.spacing();
  for (int a = 0; a < g.dimension(); ++a) {
    const double smin = std::ceil((ball.center[a] - ball.radius - g.lower(a)) / h - 1e-9);
    const double smax = std::floor((ball.center[a] + ball.radius - g.lower(a)) / h + 1e-9);
    box.lo[a] = static_cast<std::size_t>(std::max(0.0, smin));
    box.hi[a] = static_cast<std::size_t>(std::min(static_cast<double>(g.nodes(a) - 1), smax));
  }
  return box;
}

double cell_fraction(const GridSpec& g, const Point& node, const Ball& ball) {
  const int n = g.dimension();
  const double h = g.spacing();
  const double r2 = ball.radius * ball.radius;
  int inside = 0;
  int total = 0;
  std::array<int, kMaxDimension> k{0, 0, 0};
  const std::array<int, kMaxDimension> kmax{kSubsamples, n > 1 ? kSubsamples : 1, n > 2 ? kSubsamples : 1};
  for (k[0] = 0; k[0] < kmax[0]; ++k[0]) {
    for (k[1] = 0; k[1] < kmax[1]; ++k[1]) {
      for (k[2] = 0; k[2] < kmax[2]; ++k[2]) {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
          const double x = node[a] + h * ((k[a] + 0.5) / kSubsamples - 0.5) - ball.center[a];
          d2 += x * x;
        }
        inside += d2 <= r2 ? 1 : 0;
        ++total;
      }
    }
  }
  return static_cast<double>(inside) / total;
}

}  // namespace

void require_quadrature_ball(const GridSpec& grid, const Ball& ball, double min_radius_in_h) {
  if (!(ball.radius > 0.0)) throw ResolutionError("ball radius must be positive");
  require_inside(grid, ball);
  if (ball.radius < min_radius_in_h * grid.spacing() * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "radius " << ball.radius << " is below " << min_radius_in_h << "h = "
        << min_radius_in_h * grid.spacing();
    throw ResolutionError(msg.str());
  }
}

double ball_integral(const ScalarField& field, const Ball& ball, BallRule rule) {
  const GridSpec& g = field.grid();
  require_quadrature_ball(g, ball, 3.0);
  const int n = g.dimension();
  const double h = g.spacing();
  const double r2 = ball.radius * ball.radius;
  const double cut_width = 0.5 * h * std::sqrt(static_cast<double>(n));

  NodeBox box = bounding_nodes(g, ball);
  if (rule == BallRule::CellFraction) {
    // Cells of nodes just outside the ball can still overlap it.
    for (int a = 0; a < n; ++a) {
      if (box.lo[a] > 0) --box.lo[a];
      if (box.hi[a] + 1 < g.nodes(a)) ++box.hi[a];
    }
  }

  double sum = 0.0;
  NodeIndex idx{0, 0, 0};
  for (idx[0] = box.lo[0]; idx[0] <= box.hi[0]; ++idx[0]) {
    for (idx[1] = box.lo[1]; idx[1] <= box.hi[1]; ++idx[1]) {
      for (idx[2] = box.lo[2]; idx[2] <= box.hi[2]; ++idx[2]) {
        const Point x = g.coordinate(idx);
        const Point d = x - ball.center;
        const double d2 = dot(d, d, n);
        double w = 0.0;
        if (rule == BallRule::NodeCenter) {
          w = d2 <= r2 ? 1.0 : 0.0;
        } else {
          const double dist = std::sqrt(d2);
          if (dist + cut_width <= ball.radius) {
            w = 1.0;
          } else if (dist - cut_width < ball.radius) {
            w = cell_fraction(g, x, ball);
          }
        }
        if (w > 0.0) sum += w * field[g.flat(idx)];
      }
    }
  }
  return sum * g.cell_volume();
}

double unit_sphere_area(int dimension) {
  switch (dimension) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

double unit_ball_volume(int dimension) {
  switch (dimension) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

int default_angular_samples(const GridSpec& grid, double radius, int minimum) {
  const int n = grid.dimension();
  const double h = grid.spacing();
  if (n == 1) return minimum;
  const double arc = n == 2 ? 2.0 * std::numbers::pi * radius : std::numbers::pi * radius;
  const int needed = static_cast<int>(std::ceil(2.0 * arc / h));
  return std::max(minimum, needed);
}

double sphere_integral(const ScalarField& field, const Ball& ball, int angular_samples) {
  const GridSpec& g = field.grid();
  require_quadrature_ball(g, ball, 3.0);
  if (angular_samples < 16) throw std::invalid_argument("sphere_integral needs at least 16 angular samples");
  return sphere_quadrature(g.dimension(), ball, angular_samples,
                           [&](const Point& p) { return interpolate(field, p); });
}

}  // namespace obslab
