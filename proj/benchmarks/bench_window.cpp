#include <benchmark/benchmark.h>

#include "aeromap/grid.hpp"
#include "aeromap/preprocess.hpp"
#include "aeromap/rng.hpp"

using namespace aeromap;

namespace {

struct WindowData {
  Raster aod;
  QaRaster qa;
};

WindowData make_data(int n) {
  GridSpec spec{n, n, 35.95, 51.10, 0.01, Date{2018, 1, 1}};
  WindowData data{Raster(spec, "aod"), QaRaster(spec)};
  Rng rng(7);
  for (std::size_t i = 0; i < spec.n_cells(); ++i) {
    if (rng.uniform() < 0.7) {
      data.aod.values[i] = rng.uniform(0.05, 1.2);
      data.qa.cloud[i] = rng.uniform() < 0.9 ? CloudMask::Clear : CloudMask::PossiblyCloudy;
      data.qa.adjacency[i] = AdjacencyMask::NormalClear;
      data.qa.aod_quality[i] = rng.uniform() < 0.75 ? AodQuality::Best : AodQuality::Medium;
    }
  }
  return data;
}

}  // namespace

static void BM_WindowExtract(benchmark::State& state) {
  const int window = static_cast<int>(state.range(0));
  const WindowData data = make_data(96);
  int r = window, c = window;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        extract_aod_window(data.aod, data.qa, {r, c}, window, 3, 0.5));
    if (++c >= 90) {
      c = window;
      if (++r >= 90) r = window;
    }
  }
}
BENCHMARK(BM_WindowExtract)->Arg(3)->Arg(5)->Arg(9)->Arg(15);

static void BM_WindowExtractFullGrid(benchmark::State& state) {
  const WindowData data = make_data(96);
  for (auto _ : state) {
    std::size_t valid = 0;
    for (int r = 0; r < 96; ++r) {
      for (int c = 0; c < 96; ++c) {
        valid += extract_aod_window(data.aod, data.qa, {r, c}, 3, 3, 0.5).valid;
      }
    }
    benchmark::DoNotOptimize(valid);
  }
  state.SetItemsProcessed(state.iterations() * 96 * 96);
}
BENCHMARK(BM_WindowExtractFullGrid);
