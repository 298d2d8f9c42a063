#include "obslab/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace obslab {

namespace {

constexpr int kHarmonicSweeps = 20;

std::vector<std::size_t> interior_nodes(const GridSpec& g) {
  std::vector<std::size_t> out;
  out.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_boundary(i)) out.push_back(i);
  }
  return out;
}

// Trapezoid weight of a node: 1/2 for every axis along which it sits on the box boundary.
std::vector<double> node_weights(const GridSpec& g) {
  std::vector<double> w(g.size(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const NodeIndex idx = g.multi(i);
    for (int a = 0; a < g.dimension(); ++a) {
      if (idx[a] == 0 || idx[a] + 1 == g.nodes(a)) w[i] *= 0.5;
    }
  }
  return w;
}

struct Workspace {
  const ObstacleProblemSpec& problem;
  const GridSpec& grid;
  std::vector<std::size_t> interior;
  std::vector<double> lower;
  std::vector<double> node_weight;
  // Trapezoid weight of the edge from node i along each axis (0 when there is none).
  std::vector<std::array<double, kMaxDimension>> edge_weight;
  double h2;
  double inv_h2;
  std::array<std::size_t, kMaxDimension> strides{};

  explicit Workspace(const ObstacleProblemSpec& p)
      : problem(p),
        grid(p.grid()),
        interior(interior_nodes(p.grid())),
        lower(p.grid().size()),
        node_weight(node_weights(p.grid())),
        edge_weight(p.grid().size(), {0.0, 0.0, 0.0}),
        h2(p.grid().spacing() * p.grid().spacing()),
        inv_h2(1.0 / h2) {
    const int n = grid.dimension();
    for (int a = 0; a < n; ++a) strides[a] = grid.stride(a);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      lower[i] = p.constraint(i);
      const NodeIndex idx = grid.multi(i);
      for (int a = 0; a < n; ++a) {
        if (idx[a] + 1 == grid.nodes(a)) continue;
        double w = 1.0;
        for (int b = 0; b < n; ++b) {
          if (b != a && (idx[b] == 0 || idx[b] + 1 == grid.nodes(b))) w *= 0.5;
        }
        edge_weight[i][a] = w;
      }
    }
  }

  double neighbour_sum(const std::vector<double>& u, std::size_t i) const {
    double s = 0.0;
    for (int a = 0; a < grid.dimension(); ++a) {
      const std::size_t st = grid.stride(a);
      s += u[i + st] + u[i - st];
    }
    return s;
  }

  double laplacian(const std::vector<double>& u, std::size_t i) const {
    return (neighbour_sum(u, i) - 2.0 * grid.dimension() * u[i]) * inv_h2;
  }

  // Calls body.template operator()<N>() with N the grid dimension.
  template <class Body>
  decltype(auto) with_dimension(Body&& body) const {
    switch (grid.dimension()) {
      case 1: return body.template operator()<1>();
      case 2: return body.template operator()<2>();
      default: return body.template operator()<3>();
    }
  }

  template <int N>
  double fixed_neighbour_sum(const double* u, std::size_t i) const {
    double s = 0.0;
    for (int a = 0; a < N; ++a) s += u[i + strides[a]] + u[i - strides[a]];
    return s;
  }

  template <int N>
  double residual_n(const std::vector<double>& u) const {
    const double f = problem.source();
    const double* v = u.data();
    double r = 0.0;
    for (std::size_t i : interior) {
      const double gap = v[i] - lower[i];
      const double kkt = f - (fixed_neighbour_sum<N>(v, i) - 2.0 * N * v[i]) * inv_h2;
      r = std::max(r, std::abs(std::min(gap, kkt)));
    }
    return r;
  }

  double residual(const std::vector<double>& u) const {
    return with_dimension([&]<int N>() { return residual_n<N>(u); });
  }

  double energy(const std::vector<double>& u) const {
    const int n = grid.dimension();
    const double h = grid.spacing();
    double quad = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int a = 0; a < n; ++a) {
        const double w = edge_weight[i][a];
        if (w == 0.0) continue;
        const double d = u[i + strides[a]] - u[i];
        quad += w * d * d;
      }
    }
    double e = 0.5 * std::pow(h, n - 2) * quad;
    if (problem.is_normalized()) {
      double lin = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) lin += node_weight[i] * u[i];
      e += grid.cell_volume() * lin;
    }
    return e;
  }
};

std::vector<double> prepared_start(const ObstacleProblemSpec& problem, ScalarField start) {
  const GridSpec& g = problem.grid();
  if (!(start.grid() == g)) throw GridMismatchError("initial field is not on the problem grid");
  std::vector<double> u(start.values().begin(), start.values().end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    u[i] = g.is_boundary(i) ? problem.boundary_value(i) : std::max(u[i], problem.constraint(i));
  }
  return u;
}

[[noreturn]] void throw_limit(const SolverConfig& config, std::vector<double> history) {
  std::ostringstream msg;
  msg << "solver did not reach tolerance " << config.tolerance << " within " << config.max_iterations
      << " iterations (last residual " << (history.empty() ? 0.0 : history.back()) << ")";
  throw IterationLimitError(msg.str(), std::move(history));
}

SolveResult run_psor(const Workspace& ws, const SolverConfig& config, std::vector<double> u) {
  const double omega = config.omega;
  const double rhs = ws.problem.source() * ws.h2;
  const double inv_deg = 1.0 / (2.0 * ws.grid.dimension());
  SolveResult result{ScalarField(ws.grid), 0, {}, {}, 0.0};

  double r = ws.residual(u);
  if (r <= config.tolerance) {
    result.residual_history.push_back(r);
    result.energy_history.push_back(ws.energy(u));
  }
  for (int it = 0; it < config.max_iterations && r > config.tolerance; ++it) {
    ws.with_dimension([&]<int N>() {
      double* v = u.data();
      for (std::size_t i : ws.interior) {
        const double gs = (ws.fixed_neighbour_sum<N>(v, i) - rhs) * inv_deg;
        v[i] = std::max(ws.lower[i], v[i] + omega * (gs - v[i]));
      }
    });
    r = ws.residual(u);
    result.residual_history.push_back(r);
    result.energy_history.push_back(ws.energy(u));
    result.iterations = it + 1;
  }
  if (r > config.tolerance) throw_limit(config, std::move(result.residual_history));
  result.final_energy = result.energy_history.back();
  result.solution = ScalarField(ws.grid, std::move(u));
  return result;
}

// Nesterov-accelerated projected gradient. Momentum is reset whenever the
// step points against the previous displacement (gradient restart); an
// energy-based test stalls once energy differences reach round-off.
SolveResult run_projected_gradient(const Workspace& ws, const SolverConfig& config, std::vector<double> u) {
  const double f = ws.problem.source();
  const double step = ws.h2 / (4.0 * ws.grid.dimension());
  SolveResult result{ScalarField(ws.grid), 0, {}, {}, 0.0};

  std::vector<double> prev = u;
  std::vector<double> y = u;
  std::vector<double> next = u;
  double t = 1.0;
  double r = ws.residual(u);
  if (r <= config.tolerance) {
    result.residual_history.push_back(r);
    result.energy_history.push_back(ws.energy(u));
  }

  auto gradient_step = [&](const std::vector<double>& from, std::vector<double>& to) {
    ws.with_dimension([&]<int N>() {
      const double* v = from.data();
      for (std::size_t i : ws.interior) {
        const double lap = (ws.fixed_neighbour_sum<N>(v, i) - 2.0 * N * v[i]) * ws.inv_h2;
        to[i] = std::max(ws.lower[i], v[i] - step * (f - lap));
      }
    });
  };

  for (int it = 0; it < config.max_iterations && r > config.tolerance; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i : ws.interior) y[i] = u[i] + beta * (u[i] - prev[i]);
    gradient_step(y, next);
    double against = 0.0;
    for (std::size_t i : ws.interior) against += (y[i] - next[i]) * (next[i] - u[i]);
    if (against > 0.0) {
      gradient_step(u, next);
      t = 1.0;
    } else {
      t = t_next;
    }
    prev.swap(u);
    u.swap(next);
    r = ws.residual(u);
    result.residual_history.push_back(r);
    result.energy_history.push_back(ws.energy(u));
    result.iterations = it + 1;
  }
  if (r > config.tolerance) throw_limit(config, std::move(result.residual_history));
  result.final_energy = result.energy_history.back();
  result.solution = ScalarField(ws.grid, std::move(u));
  return result;
}

}  // namespace

ObstacleProblemSpec ObstacleProblemSpec::general(ScalarField obstacle, ScalarField boundary) {
  if (!(obstacle.grid() == boundary.grid())) throw GridMismatchError("obstacle and boundary grids differ");
  const GridSpec& g = obstacle.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i) && boundary[i] < obstacle[i]) {
      throw SpecError("boundary data must lie above the obstacle on the box boundary");
    }
  }
  return ObstacleProblemSpec(GeneralObstacle{std::move(obstacle), std::move(boundary)});
}

ObstacleProblemSpec ObstacleProblemSpec::normalized(ScalarField boundary) {
  const GridSpec& g = boundary.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i) && boundary[i] < 0.0) {
      throw SpecError("normalized boundary data must be nonnegative");
    }
  }
  return ObstacleProblemSpec(Normalized{std::move(boundary)});
}

const GridSpec& ObstacleProblemSpec::grid() const noexcept {
  return std::visit([](const auto& f) -> const GridSpec& { return f.boundary.grid(); }, form_);
}

double ObstacleProblemSpec::constraint(std::size_t i) const {
  if (const auto* g = std::get_if<GeneralObstacle>(&form_)) return g->obstacle[i];
  return 0.0;
}

double ObstacleProblemSpec::boundary_value(std::size_t i) const {
  return std::visit([i](const auto& f) { return f.boundary[i]; }, form_);
}

void SolverConfig::validate() const {
  if (!(omega > 0.0 && omega < 2.0)) throw SpecError("relaxation parameter must lie in (0, 2)");
  if (!(tolerance > 0.0)) throw SpecError("solver tolerance must be positive");
  if (max_iterations < 1) throw SpecError("max_iterations must be at least 1");
}

ScalarField initial_field(const ObstacleProblemSpec& problem, InitialGuess guess) {
  const GridSpec& g = problem.grid();
  std::vector<double> u(g.size(), 0.0);
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_boundary(i)) {
      u[i] = problem.boundary_value(i);
      mean += u[i];
      ++count;
    }
  }
  mean /= static_cast<double>(count);
  const auto interior = interior_nodes(g);
  if (guess == InitialGuess::Constraint) {
    for (std::size_t i : interior) u[i] = problem.constraint(i);
    return ScalarField(g, std::move(u));
  }
  for (std::size_t i : interior) u[i] = mean;
  const double inv_deg = 1.0 / (2.0 * g.dimension());
  for (int sweep = 0; sweep < kHarmonicSweeps; ++sweep) {
    for (std::size_t i : interior) {
      double s = 0.0;
      for (int a = 0; a < g.dimension(); ++a) s += u[i + g.stride(a)] + u[i - g.stride(a)];
      u[i] = s * inv_deg;
    }
  }
  for (std::size_t i : interior) u[i] = std::max(u[i], problem.constraint(i));
  return ScalarField(g, std::move(u));
}

SolveResult solve(const ObstacleProblemSpec& problem, const SolverConfig& config) {
  return solve(problem, config, initial_field(problem, config.initial_guess));
}

SolveResult solve(const ObstacleProblemSpec& problem, const SolverConfig& config, ScalarField start) {
  config.validate();
  const Workspace ws(problem);
  std::vector<double> u = prepared_start(problem, std::move(start));
  switch (config.method) {
    case SolverMethod::PSOR: return run_psor(ws, config, std::move(u));
    case SolverMethod::ProjectedGradient: return run_projected_gradient(ws, config, std::move(u));
  }
  throw SpecError("unknown solver method");
}

double dirichlet_energy(const ScalarField& field, const ObstacleProblemSpec& problem) {
  if (!(field.grid() == problem.grid())) throw GridMismatchError("field is not on the problem grid");
  const Workspace ws(problem);
  return ws.energy(std::vector<double>(field.values().begin(), field.values().end()));
}

double complementarity_residual(const ScalarField& field, const ObstacleProblemSpec& problem) {
  if (!(field.grid() == problem.grid())) throw GridMismatchError("field is not on the problem grid");
  const Workspace ws(problem);
  return ws.residual(std::vector<double>(field.values().begin(), field.values().end()));
}

}  // namespace obslab
