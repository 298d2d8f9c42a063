#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "obslab/grid.hpp"

namespace obslab {

/// Minimise the Dirichlet energy over v >= obstacle with v = boundary on the
/// box boundary. Only boundary-node entries of `boundary` are read.
struct GeneralObstacle {
  ScalarField obstacle;
  ScalarField boundary;
};

/// Delta u = chi_{u>0}, u >= 0, with u = boundary on the box boundary.
/// Only boundary-node entries of `boundary` are read.
struct Normalized {
  ScalarField boundary;
};

class ObstacleProblemSpec {
 public:
  using Form = std::variant<GeneralObstacle, Normalized>;

  /// Throws GridMismatchError if the fields live on different grids and
  /// SpecError if boundary < obstacle at some boundary node.
  static ObstacleProblemSpec general(ScalarField obstacle, ScalarField boundary);
  /// Throws SpecError if boundary < 0 at some boundary node.
  static ObstacleProblemSpec normalized(ScalarField boundary);

  const GridSpec& grid() const noexcept;
  const Form& form() const noexcept { return form_; }
  bool is_normalized() const noexcept { return std::holds_alternative<Normalized>(form_); }

  /// Lower bound at node i: the obstacle, or 0 in normalized form.
  double constraint(std::size_t i) const;
  /// Prescribed value at boundary node i.
  double boundary_value(std::size_t i) const;
  /// Right-hand side of the unconstrained equation: 1 normalized, 0 general.
  double source() const noexcept { return is_normalized() ? 1.0 : 0.0; }

 private:
  explicit ObstacleProblemSpec(Form form) : form_(std::move(form)) {}
  Form form_;
};

enum class SolverMethod { PSOR, ProjectedGradient };

enum class InitialGuess {
  /// max(Laplace smoothing sweeps of the boundary data, constraint).
  HarmonicExtension,
  /// Boundary data on the boundary, the constraint inside.
  Constraint,
};

struct SolverConfig {
  double omega = 1.8;
  double tolerance = 1e-8;
  int max_iterations = 500000;
  SolverMethod method = SolverMethod::PSOR;
  InitialGuess initial_guess = InitialGuess::HarmonicExtension;

  /// Throws SpecError unless omega in (0,2), tolerance > 0, max_iterations >= 1.
  void validate() const;
};

struct SolveResult {
  ScalarField solution;
  int iterations = 0;
  /// Projected residual after each sweep (PSOR) or step (projected gradient).
  std::vector<double> residual_history;
  /// Discrete energy after each sweep or step.
  std::vector<double> energy_history;
  double final_energy = 0.0;
};

/// Admissible starting field for `guess`.
ScalarField initial_field(const ObstacleProblemSpec& problem, InitialGuess guess);

/// Solve the discrete obstacle problem.
///
/// Throws IterationLimitError (carrying the residual history) when the
/// tolerance is not reached within max_iterations, SpecError on an invalid
/// configuration.
SolveResult solve(const ObstacleProblemSpec& problem, const SolverConfig& config);

/// Same, from a caller-supplied start. The start is projected onto the
/// constraint and its boundary values are overwritten with the boundary data.
SolveResult solve(const ObstacleProblemSpec& problem, const SolverConfig& config, ScalarField start);

/// The discrete energy minimised by `solve`: trapezoid-weighted
/// sum over grid edges of h^(n-2) (v_j - v_i)^2 / 2, plus h^n sum of
/// trapezoid-weighted nodal values in normalized form.
double dirichlet_energy(const ScalarField& field, const ObstacleProblemSpec& problem);

/// max over interior nodes of |min(v - constraint, source - Delta_h v)|.
double complementarity_residual(const ScalarField& field, const ObstacleProblemSpec& problem);

}  // namespace obslab
