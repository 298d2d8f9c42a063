#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "obslab/grid.hpp"

namespace obslab {

enum class BallRule {
  /// h^n times the nodal value at every node whose coordinates lie in the ball.
  NodeCenter,
  /// Like NodeCenter, but nodes whose cell is cut by the sphere are weighted
  /// by the fraction of the cell inside the ball (estimated by sub-sampling).
  CellFraction,
};

/// Midpoint quadrature of `field` over the closed ball.
///
/// Throws OutOfDomainError if the ball leaves the box and ResolutionError if
/// radius < 3h.
double ball_integral(const ScalarField& field, const Ball& ball,
                     BallRule rule = BallRule::NodeCenter);

/// Surface measure of the unit sphere in R^n (n = 1: two points).
double unit_sphere_area(int dimension);
/// Volume of the unit ball in R^n.
double unit_ball_volume(int dimension);

/// Angular sample count that keeps the sample spacing on the sphere below
/// half a grid step, never fewer than `minimum`.
int default_angular_samples(const GridSpec& grid, double radius, int minimum = 64);

/// Surface quadrature over the sphere of radius `ball.radius` centred at
/// `ball.center` in R^n, applied to an arbitrary integrand.
///
/// n = 1: f(c - r) + f(c + r). n = 2: trapezoid rule with `samples` equally
/// spaced angles. n = 3: midpoint rule in latitude (`samples` bands, sine
/// weights) times trapezoid in longitude (2 * samples meridians).
template <class F>
double sphere_quadrature(int dimension, const Ball& ball, int samples, F&& f) {
  const Point& c = ball.center;
  const double r = ball.radius;
  if (dimension == 1) {
    return f(Point{c[0] - r, 0.0, 0.0}) + f(Point{c[0] + r, 0.0, 0.0});
  }
  if (dimension == 2) {
    const double dtheta = 2.0 * std::numbers::pi / samples;
    double sum = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double t = k * dtheta;
      sum += f(Point{c[0] + r * std::cos(t), c[1] + r * std::sin(t), 0.0});
    }
    return sum * r * dtheta;
  }
  const int bands = samples;
  const int meridians = 2 * samples;
  const double dtheta = std::numbers::pi / bands;
  const double dphi = 2.0 * std::numbers::pi / meridians;
  double sum = 0.0;
  for (int j = 0; j < bands; ++j) {
    const double theta = (j + 0.5) * dtheta;
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    double ring = 0.0;
    for (int k = 0; k < meridians; ++k) {
      const double phi = k * dphi;
      ring += f(Point{c[0] + r * st * std::cos(phi), c[1] + r * st * std::sin(phi), c[2] + r * ct});
    }
    sum += ring * st;
  }
  return sum * r * r * dtheta * dphi;
}

/// sphere_quadrature applied to the multilinear interpolant of `field`.
///
/// Throws OutOfDomainError / ResolutionError as ball_integral, and
/// std::invalid_argument when `angular_samples` < 16.
double sphere_integral(const ScalarField& field, const Ball& ball, int angular_samples);

/// Checks shared by the ball and sphere rules.
void require_quadrature_ball(const GridSpec& grid, const Ball& ball, double min_radius_in_h);

}  // namespace obslab
