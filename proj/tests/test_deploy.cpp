#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aeromap/deploy.hpp"
#include "aeromap/pipeline.hpp"
#include "aeromap/rng.hpp"
#include "helpers.hpp"

using namespace aeromap;

namespace {

GridSpec map_spec() { return GridSpec{10, 12, 35.9, 51.2, 0.01, Date{2018, 1, 1}}; }

PipelineConfig quiet_config() {
  PipelineConfig c = default_config();
  c.threads = 1;
  return c;
}

std::vector<QuasiStation> ground_points(const GridSpec& spec,
                                        std::initializer_list<std::pair<CellIndex, double>> pts,
                                        Date date = Date{2018, 1, 1}) {
  std::vector<QuasiStation> out;
  for (const auto& [cell, value] : pts) {
    const auto [lat, lon] = center_of(spec, cell.row, cell.col);
    out.push_back({lat, lon, date, value, QuasiStation::Source::Ground});
  }
  return out;
}

}  // namespace

TEST_CASE("only ground stations, all equal: uniform gap-free map") {
  const GridSpec spec = map_spec();
  const auto ground = ground_points(
      spec, {{{1, 1}, 40.0}, {{8, 3}, 40.0}, {{4, 9}, 40.0}, {{7, 10}, 40.0}});
  const DailyMap map = fuse_and_interpolate({}, ground, spec, quiet_config());
  CHECK(map.n_quasi == 0);
  CHECK(map.n_ground == 4);
  CHECK(map.pm25.missing_count() == 0);
  for (double v : map.pm25.values) CHECK(v == doctest::Approx(40.0).epsilon(1e-8));
  for (double p : map.provenance.values) {
    CHECK(p == static_cast<double>(Provenance::Interpolated));
  }
}

TEST_CASE("ground wins over a co-located quasi-station") {
  const GridSpec spec = map_spec();
  const auto [lat, lon] = center_of(spec, 5, 5);
  std::vector<QuasiStation> quasi = {
      {lat, lon, Date{2018, 1, 1}, 99.0, QuasiStation::Source::Model}};
  const auto ground = ground_points(
      spec, {{{5, 5}, 30.0}, {{1, 1}, 35.0}, {{8, 9}, 32.0}});
  const DailyMap map = fuse_and_interpolate(quasi, ground, spec, quiet_config());
  CHECK(map.n_quasi == 0);  // the only quasi cell was ceded to the ground station
  // Zero-nugget exactness puts the ground value at its own cell.
  CHECK(map.pm25.at(5, 5) == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(map.provenance.at(5, 5) == static_cast<double>(Provenance::Interpolated));
}

TEST_CASE("quasi cells keep the model estimate with ModelDirect provenance") {
  const GridSpec spec = map_spec();
  Rng rng(3);
  std::vector<QuasiStation> quasi;
  for (int r = 0; r < spec.n_rows; r += 2) {
    for (int c = 0; c < spec.n_cols; c += 3) {
      const auto [lat, lon] = center_of(spec, r, c);
      quasi.push_back({lat, lon, Date{2018, 1, 1}, 30.0 + rng.uniform(0.0, 20.0),
                       QuasiStation::Source::Model});
    }
  }
  const auto ground = ground_points(spec, {{{9, 11}, 45.0}, {{9, 0}, 41.0}});
  const DailyMap map = fuse_and_interpolate(quasi, ground, spec, quiet_config());
  CHECK(map.n_quasi == quasi.size());
  for (const QuasiStation& q : quasi) {
    const auto cell = cell_of(spec, q.lat, q.lon);
    CHECK(map.pm25.at(cell->row, cell->col) == q.pm25_est);  // exact, not interpolated
    CHECK(map.provenance.at(cell->row, cell->col) ==
          static_cast<double>(Provenance::ModelDirect));
  }
  CHECK(map.pm25.missing_count() == 0);
}

TEST_CASE("fewer than two distinct locations cannot produce a map") {
  const GridSpec spec = map_spec();
  const auto one = ground_points(spec, {{{3, 3}, 40.0}});
  CHECK_THROWS(fuse_and_interpolate({}, one, spec, quiet_config()));
}

TEST_CASE("ordinary-kriged cells scale linearly with the station values") {
  const GridSpec spec = map_spec();
  const auto ground = ground_points(
      spec, {{{1, 2}, 20.0}, {{8, 3}, 35.0}, {{4, 9}, 50.0}, {{6, 6}, 28.0}});
  auto scaled = ground;
  for (auto& g : scaled) g.pm25_est *= 2.0;

  const PipelineConfig config = quiet_config();
  const DailyMap base = fuse_and_interpolate({}, ground, spec, config);
  const DailyMap doubled = fuse_and_interpolate({}, scaled, spec, config);
  for (std::size_t i = 0; i < base.pm25.values.size(); ++i) {
    CHECK(doubled.pm25.values[i] == doctest::Approx(2.0 * base.pm25.values[i]).epsilon(1e-6));
  }
}

TEST_CASE("aggregate: single day is the identity") {
  const GridSpec spec = map_spec();
  Raster day(spec, "pm25");
  Rng rng(5);
  for (double& v : day.values) v = rng.uniform(5.0, 80.0);
  const auto monthly = aggregate_maps({day}, Period::Month);
  REQUIRE(monthly.size() == 1);
  CHECK(monthly[0].first == "2018-01");
  CHECK(monthly[0].second.values == day.values);
}

TEST_CASE("aggregate: median of three and boundedness") {
  GridSpec spec = map_spec();
  std::vector<Raster> days;
  for (double fill : {10.0, 20.0, 90.0}) {
    Raster r(spec, "pm25");
    std::fill(r.values.begin(), r.values.end(), fill);
    days.push_back(r);
    spec.timestamp = spec.timestamp.plus_days(1);
    days.back().spec.timestamp = spec.timestamp;
  }
  days[0].spec.timestamp = Date{2018, 1, 1};
  days[1].spec.timestamp = Date{2018, 1, 2};
  days[2].spec.timestamp = Date{2018, 1, 3};
  const auto monthly = aggregate_maps(days, Period::Month);
  REQUIRE(monthly.size() == 1);
  for (double v : monthly[0].second.values) CHECK(v == 20.0);

  // Randomized boundedness: per-cell median lies within [min, max].
  Rng rng(7);
  std::vector<Raster> random_days;
  for (int d = 0; d < 5; ++d) {
    Raster r(map_spec(), "pm25");
    r.spec.timestamp = Date{2018, 2, 1}.plus_days(d);
    for (double& v : r.values) v = rng.uniform(0.0, 100.0);
    random_days.push_back(std::move(r));
  }
  const auto agg = aggregate_maps(random_days, Period::Month);
  REQUIRE(agg.size() == 1);
  for (std::size_t i = 0; i < agg[0].second.values.size(); ++i) {
    double lo = 1e9, hi = -1e9;
    for (const Raster& r : random_days) {
      lo = std::min(lo, r.values[i]);
      hi = std::max(hi, r.values[i]);
    }
    CHECK(agg[0].second.values[i] >= lo);
    CHECK(agg[0].second.values[i] <= hi);
  }
}

TEST_CASE("aggregate groups by month and by year") {
  std::vector<Raster> days;
  for (const Date& date : {Date{2018, 1, 30}, Date{2018, 1, 31}, Date{2018, 2, 1},
                           Date{2019, 1, 1}}) {
    Raster r(map_spec(), "pm25");
    r.spec.timestamp = date;
    std::fill(r.values.begin(), r.values.end(), static_cast<double>(date.month));
    days.push_back(std::move(r));
  }
  const auto monthly = aggregate_maps(days, Period::Month);
  CHECK(monthly.size() == 3);
  const auto yearly = aggregate_maps(days, Period::Year);
  REQUIRE(yearly.size() == 2);
  CHECK(yearly[0].first == "2018");
  CHECK(yearly[1].first == "2019");
}

TEST_CASE("aqi banding uses configured breakpoints") {
  Raster pm(map_spec(), "pm25");
  pm.values[0] = 5.0;    // below every threshold
  pm.values[1] = 12.0;   // exactly the first breakpoint -> next band
  pm.values[2] = 20.0;
  pm.values[3] = 60.0;
  pm.values[4] = kMissing;
  const Raster bands = classify_aqi_band(pm, {12.0, 35.5, 55.5});
  CHECK(bands.values[0] == 0.0);
  CHECK(bands.values[1] == 1.0);
  CHECK(bands.values[2] == 1.0);
  CHECK(bands.values[3] == 3.0);
  CHECK(is_missing(bands.values[4]));
  CHECK_THROWS(classify_aqi_band(pm, {30.0, 10.0}));
}

TEST_CASE("predict_grid on a synthetic day: valid windows become quasi-stations") {
  SceneParams params;
  params.n_rows = 16;
  params.n_cols = 18;
  params.n_stations = 6;
  params.n_days = 12;
  const SyntheticScene scene = generate_synthetic_scene(params, 31);

  // A tiny model trained on quick samples from the same scene.
  std::vector<DayInputs> days;
  for (const SceneDay& sd : scene.days) {
    days.push_back({sd.date, sd.aod_aqua, sd.aod_terra, sd.qa, sd.meteo});
  }
  PipelineConfig config = quiet_config();
  config.model.choice = ModelChoice::GradientBoosting;
  config.model.gbt.n_estimators = 40;
  config.model.gbt.max_depth = 4;

  const PreprocessOutput prep = build_samples(scene.readings, days, config);
  REQUIRE(prep.samples.size() > 20);
  const Model model = fit_model(prep.samples, config.model, config.seed);

  std::size_t clamped = 0;
  const auto quasi = predict_grid(model, days[0], prep.coefficients, config, &clamped);

  // Count valid windows directly.
  const Raster merged = merge_aod_rasters(days[0].aod_aqua, days[0].aod_terra,
                                          prep.coefficients);
  std::size_t n_valid = 0;
  for (int r = 0; r < merged.spec.n_rows; ++r) {
    for (int c = 0; c < merged.spec.n_cols; ++c) {
      n_valid += extract_aod_window(merged, days[0].qa, {r, c}, config.window_size,
                                    config.min_valid_pixels, config.std_threshold)
                     .valid;
    }
  }
  CHECK(quasi.size() == n_valid);
  for (const QuasiStation& q : quasi) {
    CHECK(q.pm25_est >= 0.0);
    CHECK(q.source == QuasiStation::Source::Model);
  }
}

TEST_CASE("fully missing AOD day yields zero quasi-stations") {
  SceneParams params;
  params.n_rows = 12;
  params.n_cols = 12;
  params.n_stations = 4;
  params.n_days = 3;
  const SyntheticScene scene = generate_synthetic_scene(params, 17);
  DayInputs day{scene.days[0].date, scene.days[0].aod_aqua, scene.days[0].aod_terra,
                scene.days[0].qa, scene.days[0].meteo};
  std::fill(day.aod_aqua.values.begin(), day.aod_aqua.values.end(), kMissing);
  std::fill(day.aod_terra.values.begin(), day.aod_terra.values.end(), kMissing);

  PipelineConfig config = quiet_config();
  LinearModel trivial;
  trivial.kind = LinearKind::Univariate;
  trivial.feature_names = {"nAODm"};
  trivial.coefficients = {0.0};
  trivial.feature_means = {0.0};
  trivial.feature_stds = {1.0};
  trivial.intercept = 10.0;

  MergeCoefficients coeffs;  // irrelevant: everything missing
  const auto quasi = predict_grid(Model{trivial}, day, coeffs, config, nullptr);
  CHECK(quasi.empty());
}
