// Microbenchmarks for the hot paths: field-space SPDE stepping, the averaged
// drift and noise-column assembly, effective-equation stepping, spectral-gap
// actions and the W1 comparator.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "kdvlab/analysis.hpp"
#include "kdvlab/averaging.hpp"
#include "kdvlab/birkhoff.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/effective.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/hill.hpp"
#include "kdvlab/rng.hpp"

namespace {

using namespace kdvlab;

FourierField decaying_field(int S, double amp) {
  FourierField u(S);
  for (int j = 1; j <= S; ++j) {
    u.plus(j) = amp / (j * j);
    u.minus(j) = 0.5 * amp / (j * j);
  }
  return u;
}

void BM_SpdeTrajectory(benchmark::State& state) {
  const int S = int(state.range(0));
  LinearBackend backend(2);
  const NoiseSpec ns = NoiseSpec::poly_profile(S, 0.3, 1.0);
  const auto u0 = decaying_field(S, 0.2);
  SpdeConfig cfg;
  cfg.nu = 0.1;
  cfg.S = S;
  const int n_steps = 64;
  cfg.tau_grid = {0.0, cfg.nu * n_steps * cfg.dt_or_default()};
  for (auto _ : state) {
    auto rec = kdv_spde_trajectory(u0, cfg, ns, backend);
    benchmark::DoNotOptimize(rec);
  }
  state.SetItemsProcessed(state.iterations() * n_steps);
}
BENCHMARK(BM_SpdeTrajectory)->Arg(8)->Arg(16)->Arg(32);

void BM_EffectiveStep(benchmark::State& state) {
  const int N = int(state.range(0));
  auto backend = std::make_shared<SyntheticBackend>(N, 0.05);
  const NoiseSpec ns = NoiseSpec::poly_profile(N, 0.3, 1.0);
  const auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(N, 8));
  const auto v0 = backend->forward(decaying_field(N, 0.3));
  const int n_steps = 16;
  const std::vector<double> grid = {0.0, n_steps * 1e-3};
  for (auto _ : state) {
    auto tr = integrate_effective(sys, v0, grid, 1e-3, 17);
    benchmark::DoNotOptimize(tr);
  }
  state.SetItemsProcessed(state.iterations() * n_steps);
}
BENCHMARK(BM_EffectiveStep)->Arg(2)->Arg(3);

void BM_AveragedDrift(benchmark::State& state) {
  const int N = int(state.range(0));
  auto backend = std::make_shared<SyntheticBackend>(N, 0.05);
  const NoiseSpec ns = NoiseSpec::poly_profile(N, 0.3, 1.0);
  const auto fields = build_perturbation_fields(backend, ns);
  const auto quad = TorusQuadrature::tensor(N, 8);
  const auto v = backend->forward(decaying_field(N, 0.3));
  for (auto _ : state) {
    auto d = effective_drift(fields.p_total, v, quad);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * quad.size());
}
BENCHMARK(BM_AveragedDrift)->Arg(2)->Arg(3);

void BM_DispersionColumns(benchmark::State& state) {
  const int N = int(state.range(0));
  auto backend = std::make_shared<SyntheticBackend>(N, 0.05);
  const NoiseSpec ns = NoiseSpec::poly_profile(N, 0.3, 1.0);
  const auto fields = build_perturbation_fields(backend, ns);
  const auto quad = TorusQuadrature::tensor(N, 8);
  const auto v = backend->forward(decaying_field(N, 0.3));
  for (auto _ : state) {
    auto cols = dispersion_columns(fields.b, v, quad);
    benchmark::DoNotOptimize(cols);
  }
}
BENCHMARK(BM_DispersionColumns)->Arg(2)->Arg(3);

void BM_HillActions(benchmark::State& state) {
  const int S = int(state.range(0));
  HillBackend hill(3, 4);
  const auto u = decaying_field(S, 0.2);
  for (auto _ : state) {
    auto I = hill.actions_of_field(u);
    benchmark::DoNotOptimize(I);
  }
}
BENCHMARK(BM_HillActions)->Arg(8)->Arg(16)->Arg(32);

void BM_SyntheticRoundtrip(benchmark::State& state) {
  SyntheticBackend backend(8, 0.05);
  const auto u = decaying_field(8, 0.4);
  for (auto _ : state) {
    auto back = backend.inverse(backend.forward(u));
    benchmark::DoNotOptimize(back);
  }
}
BENCHMARK(BM_SyntheticRoundtrip);

void BM_Wasserstein1(benchmark::State& state) {
  const size_t n = size_t(state.range(0));
  CounterRng rng(88, stream_id(StreamPurpose::scratch, 9, 0));
  std::vector<double> a(n), b(n);
  for (size_t i = 0; i < n; ++i) {
    a[i] = rng.gauss();
    b[i] = 0.1 + rng.gauss();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein1(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Wasserstein1)->Arg(1 << 10)->Arg(1 << 14);

}  // namespace

BENCHMARK_MAIN();
