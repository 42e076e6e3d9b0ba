#include <benchmark/benchmark.h>

#include "aeromap/rng.hpp"
#include "aeromap/tree_model.hpp"

using namespace aeromap;

namespace {

std::vector<Sample> make_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> samples(n);
  for (auto& s : samples) {
    for (double& f : s.features) f = rng.normal();
    s.target = 40.0 + 8.0 * s.features[1] + 5.0 * std::max(0.0, s.features[8]) *
                          s.features[1] +
               2.0 * rng.normal();
  }
  return samples;
}

}  // namespace

static void BM_FitGbt(benchmark::State& state) {
  const auto samples = make_samples(static_cast<std::size_t>(state.range(0)), 3);
  GbtParams params;
  params.n_estimators = 100;
  params.max_depth = 6;
  params.learning_rate = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gbt(samples, params, 42));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_FitGbt)->Arg(2000)->Arg(6000)->Unit(benchmark::kMillisecond);

static void BM_FitRandomForest(benchmark::State& state) {
  const auto samples = make_samples(4000, 5);
  ForestParams params;
  params.n_estimators = static_cast<int>(state.range(0));
  params.max_depth = 10;
  params.max_features = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(samples, EnsembleKind::RandomForest, params, 42));
  }
}
BENCHMARK(BM_FitRandomForest)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_FitExtraTrees(benchmark::State& state) {
  const auto samples = make_samples(4000, 7);
  ForestParams params;
  params.n_estimators = 100;
  params.max_depth = 10;
  params.max_features = 0.8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(samples, EnsembleKind::ExtraTrees, params, 42));
  }
}
BENCHMARK(BM_FitExtraTrees)->Unit(benchmark::kMillisecond);

static void BM_PredictGbt(benchmark::State& state) {
  const auto samples = make_samples(4000, 9);
  GbtParams params;
  params.n_estimators = 500;
  params.max_depth = 6;
  const TreeEnsemble model = fit_gbt(samples, params, 42);
  const FeatureTable table = FeatureTable::from_samples(samples);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(table));
  }
  state.SetItemsProcessed(state.iterations() * samples.size());
}
BENCHMARK(BM_PredictGbt)->Unit(benchmark::kMillisecond);
