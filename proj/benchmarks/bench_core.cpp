#include <benchmark/benchmark.h>

#include "subrad/driven.hpp"
#include "subrad/spectrum.hpp"
#include "subrad/tensor.hpp"

using namespace subrad;

static void BM_BuildHamiltonian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cfg = ArrayConfig::from_period(n, 0.05);
  const auto basis = enumerate_sector(n, n / 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_hamiltonian(cfg, basis));
  state.SetLabel("dim " + std::to_string(basis.dim()));
}
BENCHMARK(BM_BuildHamiltonian)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_Diagonalize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const auto h = build_hamiltonian(ArrayConfig::from_period(n, 0.05), enumerate_sector(n, k));
  for (auto _ : state) benchmark::DoNotOptimize(diagonalize_sector(h));
}
BENCHMARK(BM_Diagonalize)->Args({10, 2})->Args({10, 3})->Args({10, 5})->Unit(benchmark::kMillisecond);

static void BM_Hosvd(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto basis = enumerate_sector(10, k);
  const auto s = diagonalize_sector(build_hamiltonian(ArrayConfig::from_period(10, 0.05), basis)).front();
  const auto psi = to_symmetric_tensor(s, basis);
  for (auto _ : state) benchmark::DoNotOptimize(hosvd(psi));
}
BENCHMARK(BM_Hosvd)->Arg(2)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_SteadyState(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cfg = ArrayConfig::from_period(n, 0.05);
  DriveConfig drive;
  drive.power = 0.1;
  const SteadyStateSolver solver(cfg, drive);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(-0.19));
}
BENCHMARK(BM_SteadyState)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
