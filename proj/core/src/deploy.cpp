#include "aeromap/deploy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "aeromap/errors.hpp"
#include "aeromap/kriging.hpp"
#include "aeromap/pipeline.hpp"
#include "aeromap/raster_io.hpp"

namespace aeromap {

std::vector<QuasiStation> predict_grid(const Model& model, const DayInputs& day,
                                       const MergeCoefficients& coeffs,
                                       const PipelineConfig& config,
                                       std::size_t* clamped_count) {
  const Raster merged = merge_aod_rasters(day.aod_aqua, day.aod_terra, coeffs);
  const GridSpec& grid = merged.spec;

  std::vector<CellIndex> valid_cells;
  std::vector<WindowExtract> extracts;
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      WindowExtract w = extract_aod_window(merged, day.qa, {r, c}, config.window_size,
                                           config.min_valid_pixels, config.std_threshold);
      if (!w.valid) continue;
      valid_cells.push_back({r, c});
      extracts.push_back(w);
    }
  }
  if (valid_cells.empty()) return {};

  std::vector<Target> targets;
  targets.reserve(valid_cells.size());
  for (const CellIndex& cell : valid_cells) {
    const auto [lat, lon] = center_of(grid, cell.row, cell.col);
    targets.push_back({lat, lon});
  }
  const auto meteo = krige_meteo(day, config, targets);

  FeatureTable table;
  table.names.assign(kFeatureNames.begin(), kFeatureNames.end());
  table.columns.assign(kNumFeatures, std::vector<double>(valid_cells.size()));
  auto col = [&table](std::string_view name) -> std::vector<double>& {
    return table.columns[*feature_index(name)];
  };
  for (std::size_t i = 0; i < valid_cells.size(); ++i) {
    const auto [lat, lon] = center_of(grid, valid_cells[i].row, valid_cells[i].col);
    col("AODm")[i] = extracts[i].aod_mean;
    col("nAODm")[i] = extracts[i].aod_mean / meteo.at("blh")[i];
    col("Prob_bestm")[i] = extracts[i].prob_best;
    col("Prob_medm")[i] = extracts[i].prob_med;
    col("lat")[i] = lat;
    col("long")[i] = lon;
    for (const std::string& var : kKrigedMeteoVariables) col(var)[i] = meteo.at(var)[i];
    col("month")[i] = day.date.month;
    col("DOY")[i] = day.date.day_of_year();
  }

  std::vector<double> pred = predict(model, table, config.threads);
  std::vector<QuasiStation> quasi;
  quasi.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double value = pred[i];
    if (value < 0.0) {
      value = 0.0;
      if (clamped_count != nullptr) (*clamped_count)++;
    }
    quasi.push_back({targets[i].lat, targets[i].lon, day.date, value,
                     QuasiStation::Source::Model});
  }
  return quasi;
}

DailyMap fuse_and_interpolate(const std::vector<QuasiStation>& quasi,
                              const std::vector<QuasiStation>& ground,
                              const GridSpec& grid, const PipelineConfig& config) {
  // Ground measurements win at co-located cells.
  std::set<std::pair<int, int>> ground_cells;
  for (const QuasiStation& g : ground) {
    if (auto cell = cell_of(grid, g.lat, g.lon)) {
      ground_cells.emplace(cell->row, cell->col);
    }
  }

  std::map<std::pair<int, int>, double> direct;  // surviving quasi cells
  std::vector<SpatialSample> points;
  for (const QuasiStation& q : quasi) {
    auto cell = cell_of(grid, q.lat, q.lon);
    if (!cell) continue;
    if (ground_cells.count({cell->row, cell->col})) continue;
    direct[{cell->row, cell->col}] = q.pm25_est;
    points.push_back({q.lat, q.lon, q.pm25_est});
  }
  std::size_t n_ground_used = 0;
  for (const QuasiStation& g : ground) {
    points.push_back({g.lat, g.lon, g.pm25_est});
    ++n_ground_used;
  }

  std::set<std::pair<double, double>> distinct;
  for (const auto& p : points) distinct.emplace(p.lat, p.lon);
  if (distinct.size() < 2) {
    throw Error("fuse_and_interpolate: need >= 2 distinct locations, got " +
                std::to_string(distinct.size()));
  }

  std::vector<Target> targets;
  targets.reserve(grid.n_cells());
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const auto [lat, lon] = center_of(grid, r, c);
      targets.push_back({lat, lon});
    }
  }
  const std::vector<double> interpolated =
      krige_variable(points, config.kriging_for("pm25"), targets, config.variogram_bins,
                     config.max_neighbors, config.threads);

  DailyMap map;
  map.pm25 = Raster(grid, "pm25");
  map.provenance = Raster(grid, "provenance");
  map.n_quasi = direct.size();
  map.n_ground = n_ground_used;
  std::size_t i = 0;
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c, ++i) {
      auto it = direct.find({r, c});
      if (it != direct.end()) {
        map.pm25.values[i] = it->second;
        map.provenance.values[i] = static_cast<double>(Provenance::ModelDirect);
      } else {
        map.pm25.values[i] = std::max(0.0, interpolated[i]);
        map.provenance.values[i] = static_cast<double>(Provenance::Interpolated);
      }
    }
  }
  return map;
}

std::vector<std::pair<std::string, Raster>> aggregate_maps(const std::vector<Raster>& daily,
                                                           Period period) {
  if (daily.empty()) throw Error("aggregate_maps: no daily maps");

  std::map<std::string, std::vector<const Raster*>> groups;
  for (const Raster& r : daily) {
    if (!r.spec.join_compatible(daily.front().spec)) {
      throw Error("aggregate_maps: maps are not join-compatible");
    }
    char label[8];
    if (period == Period::Month) {
      std::snprintf(label, sizeof(label), "%04d-%02d", r.spec.timestamp.year,
                    r.spec.timestamp.month);
    } else {
      std::snprintf(label, sizeof(label), "%04d", r.spec.timestamp.year);
    }
    groups[label].push_back(&r);
  }

  std::vector<std::pair<std::string, Raster>> out;
  for (const auto& [label, members] : groups) {
    GridSpec spec = members.front()->spec;
    Raster median(spec, "pm25_median");
    std::vector<double> cell_values;
    cell_values.reserve(members.size());
    for (std::size_t i = 0; i < spec.n_cells(); ++i) {
      cell_values.clear();
      for (const Raster* m : members) {
        if (!is_missing(m->values[i])) cell_values.push_back(m->values[i]);
      }
      if (cell_values.empty()) continue;
      std::sort(cell_values.begin(), cell_values.end());
      const std::size_t n = cell_values.size();
      median.values[i] = n % 2 == 1 ? cell_values[n / 2]
                                    : 0.5 * (cell_values[n / 2 - 1] + cell_values[n / 2]);
    }
    out.emplace_back(label, std::move(median));
  }
  return out;
}

Raster classify_aqi_band(const Raster& pm25, const std::vector<double>& thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] <= thresholds[i - 1]) {
      throw Error("classify_aqi_band: thresholds must be strictly increasing");
    }
  }
  Raster bands(pm25.spec, "aqi_band");
  for (std::size_t i = 0; i < pm25.values.size(); ++i) {
    const double v = pm25.values[i];
    if (is_missing(v)) continue;
    std::size_t band = 0;
    while (band < thresholds.size() && v >= thresholds[band]) ++band;
    bands.values[i] = static_cast<double>(band);
  }
  return bands;
}

MapRunReport run_map(const std::filesystem::path& data_dir, const Model& model,
                     const PipelineConfig& config, const Date& first, const Date& last,
                     const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  std::vector<Date> dates;
  for (const Date& d : scan_dates(data_dir)) {
    if (!(d < first) && !(last < d)) dates.push_back(d);
  }
  if (dates.empty()) {
    throw Error("run_map: no input rasters between " + first.to_string() + " and " +
                last.to_string());
  }

  std::vector<DayInputs> days;
  days.reserve(dates.size());
  for (const Date& d : dates) days.push_back(load_day(data_dir, d));
  const MergeCoefficients coeffs = fit_scene_merge_coefficients(days, config.merge_seasonal);

  std::vector<StationRecord> stations;
  if (std::filesystem::exists(data_dir / "stations.csv")) {
    stations = read_stations(data_dir / "stations.csv");
  }

  const GridSpec grid = days.front().aod_aqua.spec;

  // Ground values are humidity-corrected with the station cell's kriged RH,
  // then screened per station across the mapped range, mirroring the
  // preprocessing stage.
  struct GroundDay {
    std::vector<QuasiStation> ground;
  };
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> series_by_station;
  std::vector<GroundDay> ground_by_day(days.size());
  {
    std::map<std::string, std::pair<double, double>> station_pos;
    std::map<std::pair<std::string, Date>, double> pm_lookup;
    for (const StationRecord& rec : stations) {
      if (!cell_of(grid, rec.lat, rec.lon)) continue;
      station_pos.emplace(rec.station_id, std::make_pair(rec.lat, rec.lon));
      if (rec.has_pm25()) pm_lookup[{rec.station_id, rec.date}] = rec.pm25;
    }
    std::vector<Target> station_targets;
    std::vector<std::string> station_ids;
    for (const auto& [id, pos] : station_pos) {
      station_ids.push_back(id);
      station_targets.push_back({pos.first, pos.second});
    }
    for (std::size_t d = 0; d < days.size() && !station_ids.empty(); ++d) {
      const auto meteo = krige_meteo(days[d], config, station_targets);
      for (std::size_t s = 0; s < station_ids.size(); ++s) {
        auto it = pm_lookup.find({station_ids[s], days[d].date});
        if (it == pm_lookup.end()) continue;
        const double corrected = correct_pm(it->second, meteo.at("RH")[s]);
        series_by_station[station_ids[s]].push_back({d, corrected});
      }
    }
    const std::size_t min_series = config.outlier_method == OutlierMethod::IQR ? 4 : 2;
    for (const auto& [id, series] : series_by_station) {
      std::vector<bool> keep(series.size(), true);
      if (series.size() >= min_series) {
        std::vector<double> values;
        values.reserve(series.size());
        for (const auto& [d, v] : series) values.push_back(v);
        std::fill(keep.begin(), keep.end(), false);
        for (std::size_t k : filter_outliers(values, config.outlier_method)) keep[k] = true;
      }
      const auto& pos = station_pos.at(id);
      for (std::size_t i = 0; i < series.size(); ++i) {
        if (!keep[i]) continue;
        ground_by_day[series[i].first].ground.push_back(
            {pos.first, pos.second, days[series[i].first].date, series[i].second,
             QuasiStation::Source::Ground});
      }
    }
  }

  MapRunReport report;
  std::vector<Raster> daily_maps;
  for (std::size_t d = 0; d < days.size(); ++d) {
    try {
      std::size_t clamped = 0;
      const std::vector<QuasiStation> quasi =
          predict_grid(model, days[d], coeffs, config, &clamped);
      DailyMap map =
          fuse_and_interpolate(quasi, ground_by_day[d].ground, grid, config);
      report.clamped_negative += clamped;
      report.total_quasi += map.n_quasi;
      report.total_ground += map.n_ground;

      map.pm25.spec.timestamp = days[d].date;
      map.pm25.variable = "pm25";
      map.provenance.spec.timestamp = days[d].date;
      map.provenance.variable = "provenance";
      const auto pm_path = out_dir / ("pm25_" + days[d].date.to_string() + ".grid");
      const auto prov_path = out_dir / ("provenance_" + days[d].date.to_string() + ".grid");
      write_raster(map.pm25, pm_path);
      write_raster(map.provenance, prov_path);
      report.outputs.push_back(pm_path.filename().string());
      report.outputs.push_back(prov_path.filename().string());
      daily_maps.push_back(std::move(map.pm25));
      report.days_mapped++;
    } catch (const Error&) {
      report.days_skipped++;
    }
  }

  if (!daily_maps.empty()) {
    for (const auto& [label, raster] : aggregate_maps(daily_maps, Period::Month)) {
      const auto path = out_dir / ("pm25_monthly_" + label + ".grid");
      write_raster(raster, path);
      report.outputs.push_back(path.filename().string());
    }
    for (const auto& [label, raster] : aggregate_maps(daily_maps, Period::Year)) {
      const auto path = out_dir / ("pm25_yearly_" + label + ".grid");
      write_raster(raster, path);
      report.outputs.push_back(path.filename().string());
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace aeromap
