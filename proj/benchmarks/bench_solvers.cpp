// Per-packet solve times on the Cessna design, N = 10.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sppc/controllers.hpp"
#include "sppc/design.hpp"

using namespace sppc;

namespace {

struct Fixture {
  CostDesign design;
  HorizonMatrices hm;
  std::vector<Vector> states;

  explicit Fixture(int N) {
    const auto m = cessna500();
    design = build_design(m, Matrix::Identity(4, 4), N);
    hm = build_horizon(m, design.Q, design.P, N);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int i = 0; i < 64; ++i) {
      Vector x(4);
      for (auto& e : x) e = g(rng);
      states.push_back(x);
    }
  }
};

const Fixture& fixture(int N) {
  static const Fixture f10(10);
  static const Fixture f6(6);
  return N == 10 ? f10 : f6;
}

void run_solver(benchmark::State& state, ControllerSpec spec, int N) {
  const auto& f = fixture(N);
  PacketSolver solver(f.hm, f.design.W, spec);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.solve(f.states[i++ % f.states.size()]));
  }
}

void BM_Omp(benchmark::State& s) { run_solver(s, {ControllerKind::Omp, 0}, 10); }
void BM_LeastSquares(benchmark::State& s) { run_solver(s, {ControllerKind::LeastSquares, 0}, 10); }
void BM_L2(benchmark::State& s) { run_solver(s, {ControllerKind::L2, 310}, 10); }
void BM_L1L2(benchmark::State& s) { run_solver(s, {ControllerKind::L1L2, 5.3e3}, 10); }
void BM_L1L2Small(benchmark::State& s) { run_solver(s, {ControllerKind::L1L2, 10}, 10); }
void BM_OracleN6(benchmark::State& s) { run_solver(s, {ControllerKind::Oracle, 0}, 6); }
void BM_OracleN10(benchmark::State& s) { run_solver(s, {ControllerKind::Oracle, 0}, 10); }

void BM_BuildDesign(benchmark::State& state) {
  const auto m = cessna500();
  for (auto _ : state) benchmark::DoNotOptimize(build_design(m, Matrix::Identity(4, 4), 10));
}

}  // namespace

BENCHMARK(BM_Omp);
BENCHMARK(BM_LeastSquares);
BENCHMARK(BM_L2);
BENCHMARK(BM_L1L2);
BENCHMARK(BM_L1L2Small);
BENCHMARK(BM_OracleN6);
BENCHMARK(BM_OracleN10);
BENCHMARK(BM_BuildDesign);

BENCHMARK_MAIN();
