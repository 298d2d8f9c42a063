#include <benchmark/benchmark.h>

#include "obslab/analysis.hpp"
#include "obslab/fixtures.hpp"
#include "obslab/freeboundary.hpp"
#include "obslab/solver.hpp"

namespace {

using namespace obslab;

GridSpec square(std::size_t nodes) { return GridSpec::cube(2, -1.0, 1.0, nodes); }

void BM_SolveRadial(benchmark::State& state, SolverMethod method) {
  const GridSpec g = square(static_cast<std::size_t>(state.range(0)));
  const ObstacleProblemSpec problem = ObstacleProblemSpec::normalized(sample(radial(0.4), g));
  SolverConfig cfg;
  cfg.method = method;
  int iterations = 0;
  for (auto _ : state) {
    const SolveResult r = solve(problem, cfg);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.final_energy);
  }
  state.counters["sweeps"] = iterations;
}
BENCHMARK_CAPTURE(BM_SolveRadial, psor, SolverMethod::PSOR)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SolveRadial, projected_gradient, SolverMethod::ProjectedGradient)
    ->Arg(65)
    ->Arg(129)
    ->Unit(benchmark::kMillisecond);

void BM_WeissEnergy(benchmark::State& state) {
  const ScalarField u = sample(polynomial(QuadraticForm::isotropic(2)), square(257));
  const WeissEvaluator w(u);
  const double r = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(w.energy(Point{}, r));
}
BENCHMARK(BM_WeissEnergy)->Arg(10)->Arg(50);

void BM_Monneau(benchmark::State& state) {
  const QuadraticForm q = QuadraticForm::diagonal({1.0, 0.0});
  const ScalarField u = sample(polynomial(QuadraticForm::diagonal({0.8, 0.2})), square(257));
  for (auto _ : state) benchmark::DoNotOptimize(monneau(u, Point{}, q, 0.3));
}
BENCHMARK(BM_Monneau);

void BM_ClassifyPoint(benchmark::State& state) {
  const ScalarField u = sample(halfspace(Point{0.6, 0.8, 0.0}, 2), square(129));
  for (auto _ : state) benchmark::DoNotOptimize(classify_point(u, Point{}).weiss_value);
}
BENCHMARK(BM_ClassifyPoint)->Unit(benchmark::kMillisecond);

void BM_FreeBoundary(benchmark::State& state) {
  const ScalarField u = sample(radial(0.4), square(257));
  for (auto _ : state) benchmark::DoNotOptimize(extract_free_boundary(extract_contact_set(u)).size());
}
BENCHMARK(BM_FreeBoundary);

}  // namespace
BENCHMARK_MAIN();
