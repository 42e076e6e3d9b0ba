#include "aeromap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "aeromap/errors.hpp"
#include "aeromap/kriging.hpp"
#include "aeromap/raster_io.hpp"
#include "aeromap/rng.hpp"

namespace aeromap {

namespace {

std::vector<SpatialSample> raster_points(const Raster& raster) {
  std::vector<SpatialSample> points;
  points.reserve(raster.values.size());
  for (int r = 0; r < raster.spec.n_rows; ++r) {
    for (int c = 0; c < raster.spec.n_cols; ++c) {
      const double v = raster.at(r, c);
      if (is_missing(v)) continue;
      const auto [lat, lon] = center_of(raster.spec, r, c);
      points.push_back({lat, lon, v});
    }
  }
  return points;
}

bool constant_values(const std::vector<SpatialSample>& points) {
  for (const auto& p : points) {
    if (p.value != points.front().value) return false;
  }
  return true;
}

VariogramModel pure_nugget_model() {
  VariogramModel m;
  m.family = VariogramFamily::Spherical;
  m.nugget = 1.0;
  m.sill = 1.0;
  m.range = 1.0;
  return m;
}

bool degenerate_model(const VariogramModel& m) {
  const bool bounded = m.family == VariogramFamily::Spherical ||
                       m.family == VariogramFamily::Gaussian;
  const double total = bounded ? m.sill : m.nugget + m.scale;
  return !(total > 0.0);
}

}  // namespace

std::vector<double> krige_variable(const std::vector<SpatialSample>& points,
                                   const KrigingChoice& choice,
                                   const std::vector<Target>& targets, int variogram_bins,
                                   int max_neighbors, int threads) {
  if (points.empty()) throw Error("krige_variable: no source points");

  // A constant field (or a degenerate variogram fit) would make the kriging
  // system singular; fall back to a pure-nugget model, which reduces every
  // prediction to the global mean.
  if (points.size() == 1 || constant_values(points)) {
    return std::vector<double>(targets.size(), points.front().value);
  }

  KrigingConfig config;
  config.kind = choice.kind;
  config.max_neighbors = max_neighbors;
  try {
    const auto empirical = empirical_variogram(points, variogram_bins);
    config.variogram = fit_variogram(empirical, choice.family).model;
  } catch (const Error&) {
    config.variogram = pure_nugget_model();
  }
  if (degenerate_model(config.variogram)) config.variogram = pure_nugget_model();

  try {
    const auto results = krige(config, points, targets, threads);
    std::vector<double> values(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) values[i] = results[i].value;
    return values;
  } catch (const SingularSystemError&) {
    config.variogram = pure_nugget_model();
    config.kind = KrigingKind::Ordinary;
    const auto results = krige(config, points, targets, threads);
    std::vector<double> values(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) values[i] = results[i].value;
    return values;
  }
}

std::map<std::string, std::vector<double>> krige_meteo(const DayInputs& day,
                                                       const PipelineConfig& config,
                                                       const std::vector<Target>& targets) {
  const Raster& u10 = day.meteo.at("u10");
  const Raster& v10 = day.meteo.at("v10");
  const Raster& d2m = day.meteo.at("d2m");
  const Raster& t2m = day.meteo.at("t2m");

  // ws10/wd10/RH are derived on the coarse grid first, then interpolated
  // like every other variable.
  Raster ws(u10.spec, "ws10"), wd(u10.spec, "wd10"), rh(u10.spec, "RH");
  for (std::size_t i = 0; i < u10.values.size(); ++i) {
    if (is_missing(u10.values[i]) || is_missing(v10.values[i])) continue;
    ws.values[i] = wind_speed(u10.values[i], v10.values[i]);
    wd.values[i] = wind_direction_deg(u10.values[i], v10.values[i]);
  }
  for (std::size_t i = 0; i < d2m.values.size(); ++i) {
    if (is_missing(d2m.values[i]) || is_missing(t2m.values[i])) continue;
    rh.values[i] = relative_humidity(d2m.values[i], t2m.values[i]);
  }

  std::map<std::string, std::vector<double>> out;
  for (const std::string& var : kKrigedMeteoVariables) {
    const Raster* source = nullptr;
    if (var == "ws10") source = &ws;
    else if (var == "wd10") source = &wd;
    else if (var == "RH") source = &rh;
    else source = &day.meteo.at(var);

    std::vector<double> values =
        krige_variable(raster_points(*source), config.kriging_for(var), targets,
                       config.variogram_bins, config.max_neighbors, config.threads);

    // Keep interpolated values physical: kriging can overshoot the data hull.
    if (var == "RH") {
      for (double& v : values) v = std::clamp(v, 0.0, 99.9);
    } else if (var == "blh") {
      for (double& v : values) v = std::max(v, 50.0);
    } else if (var == "ws10" || var == "lai_hv" || var == "lai_lv" || var == "uvb") {
      for (double& v : values) v = std::max(v, 0.0);
    }
    out.emplace(var, std::move(values));
  }
  return out;
}

MergeCoefficients fit_scene_merge_coefficients(const std::vector<DayInputs>& days,
                                               bool seasonal) {
  std::vector<AodPair> pairs, warm, cold;
  for (const DayInputs& day : days) {
    const bool is_warm = season_of(day.date) == Season::Warm;
    for (std::size_t i = 0; i < day.aod_aqua.values.size(); ++i) {
      const double a = day.aod_aqua.values[i];
      const double t = day.aod_terra.values[i];
      if (is_missing(a) || is_missing(t)) continue;
      pairs.push_back({a, t, day.date});
      (is_warm ? warm : cold).push_back(pairs.back());
    }
  }
  if (!seasonal || warm.size() < 2 || cold.size() < 2) {
    // Single-season inputs cannot support stratified fits; use the pooled
    // regression for both seasons.
    if (pairs.size() < 2) throw Error("not enough coincident Aqua/Terra pixels to merge");
    std::vector<double> aqua(pairs.size()), terra(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      aqua[i] = pairs[i].aqua;
      terra[i] = pairs[i].terra;
    }
    const SeasonalFit pooled = fit_aod_pairs(aqua, terra);
    MergeCoefficients coeffs;
    coeffs.warm = pooled;
    coeffs.cold = pooled;
    coeffs.pooled = pooled;
    return coeffs;
  }
  return fit_merge_coefficients(pairs);
}

namespace {

struct StationMeta {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  CellIndex cell;
};

}  // namespace

PreprocessOutput build_samples(const std::vector<StationRecord>& stations,
                               const std::vector<DayInputs>& days,
                               const PipelineConfig& config) {
  if (days.empty()) throw Error("build_samples: no input days");

  PreprocessOutput out;
  const GridSpec fine = days.front().aod_aqua.spec;

  // Unique stations that fall inside the grid, ordered by id.
  std::vector<StationMeta> metas;
  {
    std::map<std::string, StationMeta> by_id;
    for (const StationRecord& rec : stations) {
      if (by_id.count(rec.station_id)) continue;
      auto cell = cell_of(fine, rec.lat, rec.lon);
      if (!cell) continue;  // outside the modeling grid
      by_id.emplace(rec.station_id, StationMeta{rec.station_id, rec.lat, rec.lon, *cell});
    }
    for (auto& [id, meta] : by_id) metas.push_back(std::move(meta));
  }
  if (metas.empty()) throw Error("build_samples: no station lies inside the grid");
  out.report.n_stations = metas.size();

  std::map<std::pair<std::string, Date>, double> pm_by_station_date;
  for (const StationRecord& rec : stations) {
    if (rec.has_pm25()) pm_by_station_date[{rec.station_id, rec.date}] = rec.pm25;
  }

  out.coefficients = fit_scene_merge_coefficients(days, config.merge_seasonal);
  out.report.merge_coefficients = out.coefficients;

  std::vector<Target> station_targets;
  station_targets.reserve(metas.size());
  for (const auto& meta : metas) station_targets.push_back({meta.lat, meta.lon});

  struct StationDay {
    bool has_pm = false;
    double pm_corrected = 0.0;
    WindowExtract window;
    std::map<std::string, double> meteo;
  };
  std::vector<std::vector<StationDay>> per_day(days.size(),
                                               std::vector<StationDay>(metas.size()));

  out.report.n_dates = days.size();
  std::vector<bool> day_usable(days.size(), false);
  for (std::size_t d = 0; d < days.size(); ++d) {
    const DayInputs& day = days[d];
    if (!day.aod_aqua.spec.join_compatible(fine) ||
        !day.aod_terra.spec.join_compatible(fine) || !day.qa.spec.join_compatible(fine)) {
      out.report.dates_skipped++;
      continue;
    }
    day_usable[d] = true;

    const Raster merged =
        merge_aod_rasters(day.aod_aqua, day.aod_terra, out.coefficients, &out.report.merge);
    const auto meteo = krige_meteo(day, config, station_targets);

    for (std::size_t s = 0; s < metas.size(); ++s) {
      StationDay& sd = per_day[d][s];
      sd.window = extract_aod_window(merged, day.qa, metas[s].cell, config.window_size,
                                     config.min_valid_pixels, config.std_threshold);
      for (const auto& [var, values] : meteo) sd.meteo[var] = values[s];

      auto it = pm_by_station_date.find({metas[s].id, day.date});
      if (it != pm_by_station_date.end()) {
        sd.has_pm = true;
        sd.pm_corrected = correct_pm(it->second, sd.meteo.at("RH"));
        out.report.station_days_with_pm++;
      }
    }
  }

  // Per-station outlier screening across the full corrected series. Series
  // too short for the chosen rule are kept as-is.
  std::vector<std::vector<bool>> keep(days.size(), std::vector<bool>(metas.size(), true));
  const std::size_t min_series = config.outlier_method == OutlierMethod::IQR ? 4 : 2;
  for (std::size_t s = 0; s < metas.size(); ++s) {
    std::vector<double> series;
    std::vector<std::size_t> series_days;
    for (std::size_t d = 0; d < days.size(); ++d) {
      if (day_usable[d] && per_day[d][s].has_pm) {
        series.push_back(per_day[d][s].pm_corrected);
        series_days.push_back(d);
      }
    }
    if (series.size() < min_series) continue;
    const std::vector<std::size_t> kept = filter_outliers(series, config.outlier_method);
    std::vector<bool> kept_mask(series.size(), false);
    for (std::size_t k : kept) kept_mask[k] = true;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (!kept_mask[i]) {
        keep[series_days[i]][s] = false;
        out.report.dropped_outliers++;
      }
    }
  }

  for (std::size_t d = 0; d < days.size(); ++d) {
    if (!day_usable[d]) continue;
    for (std::size_t s = 0; s < metas.size(); ++s) {
      const StationDay& sd = per_day[d][s];
      if (!sd.has_pm || !keep[d][s]) continue;
      if (!sd.window.valid) {
        out.report.invalid_windows++;
        continue;
      }

      Sample sample;
      sample.station_id = metas[s].id;
      sample.date = days[d].date;
      auto set = [&sample](std::string_view name, double value) {
        sample.features[*feature_index(name)] = value;
      };
      set("AODm", sd.window.aod_mean);
      set("nAODm", sd.window.aod_mean / sd.meteo.at("blh"));
      set("Prob_bestm", sd.window.prob_best);
      set("Prob_medm", sd.window.prob_med);
      set("lat", metas[s].lat);
      set("long", metas[s].lon);
      for (const std::string& var : kKrigedMeteoVariables) {
        if (var == "RH") continue;
        set(var, sd.meteo.at(var));
      }
      set("RH", sd.meteo.at("RH"));
      set("month", days[d].date.month);
      set("DOY", days[d].date.day_of_year());
      sample.target = sd.pm_corrected;

      bool complete = std::isfinite(sample.target);
      for (double f : sample.features) complete = complete && std::isfinite(f);
      if (!complete) {
        out.report.dropped_missing_features++;
        continue;
      }
      out.samples.push_back(std::move(sample));
    }
  }

  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const Sample& a, const Sample& b) {
                     if (a.date != b.date) return a.date < b.date;
                     return a.station_id < b.station_id;
                   });
  out.report.samples_built = out.samples.size();
  return out;
}

PreprocessOutput run_preprocess(const std::filesystem::path& data_dir,
                                const PipelineConfig& config) {
  const std::vector<Date> dates = scan_dates(data_dir);
  if (dates.empty()) throw Error("run_preprocess: no AOD rasters in " + data_dir.string());
  std::vector<DayInputs> days;
  days.reserve(dates.size());
  for (const Date& date : dates) days.push_back(load_day(data_dir, date));
  const std::vector<StationRecord> stations = read_stations(data_dir / "stations.csv");
  return build_samples(stations, days, config);
}

TrainOutput run_train(const std::vector<Sample>& samples, const PipelineConfig& config) {
  if (samples.size() < 10) throw Error("run_train: too few samples");

  TrainOutput out;
  auto [train, test] = config.temporal_split
                           ? split_train_test_temporal(samples, config.split_fraction)
                           : split_train_test(samples, config.split_fraction, config.seed);

  out.cv_folds = cross_validate_with(
      train, config.cv_folds, config.seed,
      [&](const std::vector<Sample>& fold_train, const std::vector<Sample>& validation) {
        const Model model = fit_model(fold_train, config.model, config.seed, config.threads);
        return predict(model, FeatureTable::from_samples(validation), config.threads);
      });

  out.model = fit_model(train, config.model, config.seed, config.threads);
  out.train = evaluate(predict(out.model, FeatureTable::from_samples(train), config.threads),
                       targets_of(train), "train");
  out.test = evaluate(predict(out.model, FeatureTable::from_samples(test), config.threads),
                      targets_of(test), "test");

  if (const auto* ensemble = std::get_if<TreeEnsemble>(&out.model)) {
    out.importance = feature_importance(*ensemble);
    out.has_importance = true;
  }
  out.correlation = correlation_matrix(samples);
  return out;
}

}  // namespace aeromap
