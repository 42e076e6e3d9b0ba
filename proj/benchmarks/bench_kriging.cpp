#include <benchmark/benchmark.h>

#include "aeromap/kriging.hpp"
#include "aeromap/rng.hpp"

using namespace aeromap;

namespace {

std::vector<SpatialSample> make_samples(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SpatialSample> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pts.push_back({35.6 + rng.uniform(0.0, 0.3), 51.1 + rng.uniform(0.0, 0.4),
                   rng.uniform(10.0, 90.0)});
  }
  return pts;
}

std::vector<Target> make_targets(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Target> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back({35.6 + rng.uniform(0.0, 0.3), 51.1 + rng.uniform(0.0, 0.4)});
  }
  return out;
}

KrigingConfig config_of(KrigingKind kind) {
  KrigingConfig config;
  config.kind = kind;
  config.variogram = {VariogramFamily::Spherical, 0.1, 1.1, 9000.0, 0.0, 1.0};
  return config;
}

}  // namespace

static void BM_KrigeFactorAndSolve(benchmark::State& state) {
  const int n_samples = static_cast<int>(state.range(0));
  const auto samples = make_samples(n_samples, 3);
  const auto targets = make_targets(1728, 5);  // one day of 1 km cells
  const KrigingConfig config = config_of(KrigingKind::Ordinary);
  for (auto _ : state) {
    benchmark::DoNotOptimize(krige(config, samples, targets));
  }
  state.SetItemsProcessed(state.iterations() * targets.size());
}
BENCHMARK(BM_KrigeFactorAndSolve)->Arg(30)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_KrigeUniversal(benchmark::State& state) {
  const auto samples = make_samples(200, 7);
  const auto targets = make_targets(400, 9);
  const KrigingConfig config = config_of(KrigingKind::Universal);
  for (auto _ : state) {
    benchmark::DoNotOptimize(krige(config, samples, targets));
  }
}
BENCHMARK(BM_KrigeUniversal)->Unit(benchmark::kMillisecond);

static void BM_EmpiricalVariogram(benchmark::State& state) {
  const auto samples = make_samples(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_variogram(samples, 12));
  }
}
BENCHMARK(BM_EmpiricalVariogram)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_FitVariogram(benchmark::State& state) {
  const auto samples = make_samples(300, 13);
  const auto empirical = empirical_variogram(samples, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_variogram(empirical, VariogramFamily::Spherical));
  }
}
BENCHMARK(BM_FitVariogram)->Unit(benchmark::kMicrosecond);
