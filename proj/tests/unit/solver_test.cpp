#include <gtest/gtest.h>

#include <cmath>

#include "obslab/fixtures.hpp"
#include "obslab/solver.hpp"
#include "test_support.hpp"

namespace obslab {
namespace {

using testing::max_abs_diff;
using testing::unit_cube;

ObstacleProblemSpec normalized_from(const ReferenceSolution& ref, const GridSpec& g) {
  return ObstacleProblemSpec::normalized(sample(ref, g));
}

TEST(Solve, OneDimensionalFixture) {
  const GridSpec g = unit_cube(1, 513);
  const double h = g.spacing();
  const ScalarField exact = sample(one_d(0.5), g);
  const SolveResult res = solve(ObstacleProblemSpec::normalized(exact), SolverConfig{});
  EXPECT_LE(max_abs_diff(res.solution, exact), 5.0 * h * h);
  EXPECT_LE(res.residual_history.back(), 1e-8);
  EXPECT_EQ(res.iterations, static_cast<int>(res.residual_history.size()));
}

TEST(Solve, RadialFixture) {
  const GridSpec g = unit_cube(2, 65);
  const double h = g.spacing();
  const ScalarField exact = sample(radial(0.4), g);
  const SolveResult res = solve(ObstacleProblemSpec::normalized(exact), SolverConfig{});
  EXPECT_LE(max_abs_diff(res.solution, exact), 10.0 * h * h);
}

TEST(Solve, InactiveObstacleGivesHarmonicExtension) {
  // x^2 - y^2 is annihilated by the five-point stencil
  const GridSpec g = unit_cube(2, 33);
  const ScalarField f = ScalarField::sample(g, [](const Point& x) { return x[0] * x[0] - x[1] * x[1]; });
  const ScalarField phi = ScalarField::sample(g, [](const Point&) { return -2.0; });
  SolverConfig cfg;
  cfg.tolerance = 1e-11;
  const SolveResult res = solve(ObstacleProblemSpec::general(phi, f), cfg);
  EXPECT_LE(max_abs_diff(res.solution, f), 1e-9);
}

TEST(Solve, ContractInvariants) {
  const GridSpec g = unit_cube(2, 33);
  const ScalarField phi = ScalarField::sample(g, [](const Point& x) { return 0.3 - x[0] * x[0] - 2.0 * x[1] * x[1]; });
  const ScalarField f = ScalarField::sample(g, [](const Point& x) { return 0.1 * x[0]; });
  auto bdry = f;
  for (std::size_t i = 0; i < g.size(); ++i) bdry[i] = std::max(f[i], phi[i]);
  const ObstacleProblemSpec problem = ObstacleProblemSpec::general(phi, bdry);
  for (SolverMethod m : {SolverMethod::PSOR, SolverMethod::ProjectedGradient}) {
    SolverConfig cfg;
    cfg.method = m;
    const SolveResult res = solve(problem, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_GE(res.solution[i], phi[i]);
      if (g.is_boundary(i)) EXPECT_EQ(res.solution[i], bdry[i]);
    }
    EXPECT_LE(res.residual_history.back(), cfg.tolerance);
    EXPECT_LE(complementarity_residual(res.solution, problem), cfg.tolerance);
  }
}

TEST(Solve, SuperharmonicInGeneralForm) {
  const GridSpec g = unit_cube(2, 65);
  const double h = g.spacing();
  const ScalarField phi = ScalarField::sample(g, [](const Point& x) { return 0.3 - x[0] * x[0] - x[1] * x[1]; });
  const ScalarField f(g);
  SolverConfig cfg;
  const SolveResult res = solve(ObstacleProblemSpec::general(phi, f), cfg);
  const InteriorField lap = discrete_laplacian(res.solution);
  EXPECT_LE(lap.interior_max(), 10.0 * cfg.tolerance / (h * h));
  EXPECT_LT(lap.interior_min(), -0.5);
}

TEST(Solve, NormalizedLaplacianBounds) {
  const GridSpec g = unit_cube(2, 65);
  const double h = g.spacing();
  SolverConfig cfg;
  const SolveResult res = solve(normalized_from(radial(0.4), g), cfg);
  const InteriorField lap = discrete_laplacian(res.solution);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const NodeIndex idx = g.multi(i);
    if (idx[0] < 2 || idx[1] < 2 || idx[0] + 2 >= g.nodes(0) || idx[1] + 2 >= g.nodes(1)) continue;
    EXPECT_GE(lap[i], 0.0);
    EXPECT_LE(lap[i], 1.0 + 10.0 * cfg.tolerance / (h * h));
  }
}

TEST(SolveProperty, PsorEnergyNonIncreasing) {
  for (const auto& [ref, nodes] : {std::pair{one_d(0.5), std::size_t{129}}, std::pair{radial(0.4), std::size_t{33}}}) {
    const GridSpec g = unit_cube(ref.dimension(), nodes);
    const SolveResult res = solve(normalized_from(ref, g), SolverConfig{});
    const auto& e = res.energy_history;
    ASSERT_EQ(e.size(), res.residual_history.size());
    for (std::size_t k = 1; k < e.size(); ++k) {
      // summation round-off only
      EXPECT_LE(e[k], e[k - 1] + 1e-13 * std::abs(e[k - 1])) << ref.name() << " sweep " << k;
    }
    EXPECT_DOUBLE_EQ(res.final_energy, e.back());
  }
}

TEST(SolveProperty, MethodsAndStartsAgree) {
  const double tol = 1e-8;
  for (const auto& [ref, nodes] : {std::pair{one_d(0.5), std::size_t{129}}, std::pair{radial(0.4), std::size_t{65}}}) {
    const GridSpec g = unit_cube(ref.dimension(), nodes);
    const ObstacleProblemSpec problem = normalized_from(ref, g);
    SolverConfig a;
    a.tolerance = tol;
    SolverConfig b = a;
    b.method = SolverMethod::ProjectedGradient;
    b.initial_guess = InitialGuess::Constraint;
    SolverConfig c = a;
    c.initial_guess = InitialGuess::Constraint;
    c.omega = 1.3;
    const ScalarField ua = solve(problem, a).solution;
    EXPECT_LE(max_abs_diff(ua, solve(problem, b).solution), 10.0 * tol) << ref.name();
    EXPECT_LE(max_abs_diff(ua, solve(problem, c).solution), 10.0 * tol) << ref.name();
  }
}

TEST(Solve, CallerSuppliedStartIsProjected) {
  const GridSpec g = unit_cube(1, 65);
  const ObstacleProblemSpec problem = normalized_from(one_d(0.5), g);
  const ScalarField start = ScalarField::sample(g, [](const Point& x) { return -1.0 + x[0]; });
  const SolveResult res = solve(problem, SolverConfig{}, start);
  EXPECT_LE(max_abs_diff(res.solution, solve(problem, SolverConfig{}).solution), 1e-7);
  EXPECT_THROW(solve(problem, SolverConfig{}, ScalarField(unit_cube(1, 33))), GridMismatchError);
}

TEST(Solve, IterationLimitCarriesHistory) {
  const GridSpec g = unit_cube(2, 65);
  SolverConfig cfg;
  cfg.max_iterations = 3;
  try {
    solve(normalized_from(radial(0.4), g), cfg);
    FAIL() << "expected IterationLimitError";
  } catch (const IterationLimitError& e) {
    EXPECT_EQ(e.residual_history().size(), 3u);
    EXPECT_GT(e.residual_history().back(), cfg.tolerance);
  }
}

TEST(Solve, InvalidConfigurationAndProblem) {
  const GridSpec g = unit_cube(1, 9);
  const ObstacleProblemSpec problem = normalized_from(one_d(0.5), g);
  SolverConfig cfg;
  cfg.omega = 2.0;
  EXPECT_THROW(solve(problem, cfg), SpecError);
  cfg.omega = 1.0;
  cfg.tolerance = 0.0;
  EXPECT_THROW(solve(problem, cfg), SpecError);
  cfg.tolerance = 1e-8;
  cfg.max_iterations = 0;
  EXPECT_THROW(solve(problem, cfg), SpecError);

  const ScalarField neg = ScalarField::sample(g, [](const Point&) { return -0.5; });
  EXPECT_THROW(ObstacleProblemSpec::normalized(neg), SpecError);
  const ScalarField zero(g);
  const ScalarField high = ScalarField::sample(g, [](const Point&) { return 1.0; });
  EXPECT_THROW(ObstacleProblemSpec::general(high, zero), SpecError);
  EXPECT_THROW(ObstacleProblemSpec::general(zero, ScalarField(unit_cube(1, 11))), GridMismatchError);
}

TEST(InitialField, AdmissibleGuesses) {
  const GridSpec g = unit_cube(2, 17);
  const ScalarField phi = ScalarField::sample(g, [](const Point& x) { return 0.2 - x[0] * x[0]; });
  const ScalarField f = ScalarField::sample(g, [](const Point&) { return 0.5; });
  const ObstacleProblemSpec problem = ObstacleProblemSpec::general(phi, f);
  for (InitialGuess guess : {InitialGuess::HarmonicExtension, InitialGuess::Constraint}) {
    const ScalarField u = initial_field(problem, guess);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.is_boundary(i)) {
        EXPECT_EQ(u[i], 0.5);
      } else {
        EXPECT_GE(u[i], phi[i]);
      }
    }
  }
  const ScalarField harmonic = initial_field(problem, InitialGuess::HarmonicExtension);
  EXPECT_NEAR(harmonic[g.flat(NodeIndex{8, 8, 0})], 0.5, 1e-12);
}

TEST(DirichletEnergy, ConstantAndAffine) {
  const GridSpec unit = GridSpec::cube(2, 0.0, 1.0, 33);
  const ScalarField c = ScalarField::sample(unit, [](const Point&) { return 3.0; });
  const ObstacleProblemSpec general = ObstacleProblemSpec::general(ScalarField(unit), c);
  EXPECT_EQ(dirichlet_energy(c, general), 0.0);
  const double k = 1.7;
  const ScalarField lin = ScalarField::sample(unit, [k](const Point& x) { return 2.0 + k * x[0]; });
  EXPECT_NEAR(dirichlet_energy(lin, general), 0.5 * k * k, 1e-12);

  // the normalized energy adds the trapezoid integral of u
  const ObstacleProblemSpec normalized = ObstacleProblemSpec::normalized(c);
  EXPECT_NEAR(dirichlet_energy(c, normalized), 3.0, 1e-12);
  EXPECT_THROW(dirichlet_energy(ScalarField(unit_cube(2, 9)), normalized), GridMismatchError);
}

TEST(DirichletEnergy, SolutionIsMinimal) {
  const GridSpec g = unit_cube(2, 33);
  const ObstacleProblemSpec problem = normalized_from(radial(0.4), g);
  const SolveResult res = solve(problem, SolverConfig{});
  const double e0 = dirichlet_energy(res.solution, problem);
  EXPECT_NEAR(e0, res.final_energy, 1e-14);
  for (const Point& c : {Point{0.0, 0.0, 0.0}, Point{0.45, 0.0, 0.0}, Point{-0.6, 0.5, 0.0}}) {
    for (double eps : {1e-3, -1e-3, 1e-1}) {
      ScalarField v = res.solution;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.is_boundary(i)) continue;
        const Point x = g.coordinate(i) - c;
        const double bump = std::max(0.0, 0.04 - dot(x, x, 2));
        v[i] = std::max(0.0, v[i] + eps * bump);
      }
      EXPECT_GE(dirichlet_energy(v, problem), e0 - 1e-14);
    }
  }
}

TEST(ComplementarityResidual, ExactFixtureIsLocalisedAtKinks) {
  const GridSpec g = unit_cube(1, 129);
  const double h = g.spacing();
  const ScalarField u = sample(one_d(0.5), g);
  const ObstacleProblemSpec problem = ObstacleProblemSpec::normalized(u);
  EXPECT_LE(complementarity_residual(u, problem), 0.5 * h * h);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double x = g.coordinate(i)[0];
    if (std::abs(std::abs(x) - 0.5) <= 1.5 * h) continue;
    const double lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h);
    EXPECT_NEAR(std::min(u[i], 1.0 - lap), 0.0, 1e-12) << "x=" << x;
  }
}

TEST(ComplementarityResidual, DetectsViolation) {
  const GridSpec g = unit_cube(1, 33);
  ScalarField u = sample(one_d(0.5), g);
  const ObstacleProblemSpec problem = ObstacleProblemSpec::normalized(u);
  u[16] = -0.1;
  EXPECT_GE(complementarity_residual(u, problem), 0.1);
}

}  // namespace
}  // namespace obslab
