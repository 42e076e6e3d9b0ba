#include <cmath>

#include <nlohmann/json.hpp>

#include "aeromap/deploy.hpp"
#include "aeromap/kriging.hpp"
#include "aeromap/metrics.hpp"
#include "aeromap/model.hpp"
#include "aeromap/pipeline.hpp"
#include "aeromap/preprocess.hpp"
#include "aeromap/tree_model.hpp"

namespace aeromap {

namespace {

using json = nlohmann::ordered_json;

json eval_to_json(const EvalReport& r) {
  json j;
  j["split"] = r.split_label;
  j["rmse"] = r.rmse;
  j["mae"] = r.mae;
  j["r2"] = r.r2;
  j["n"] = r.n;
  if (r.degenerate_r2) j["degenerate_r2"] = true;
  return j;
}

json seasonal_fit_to_json(const SeasonalFit& f) {
  json j;
  j["terra_to_aqua"] = {{"slope", f.terra_to_aqua.slope},
                        {"intercept", f.terra_to_aqua.intercept}};
  j["aqua_to_terra"] = {{"slope", f.aqua_to_terra.slope},
                        {"intercept", f.aqua_to_terra.intercept}};
  j["r2"] = f.r2;
  j["n_pairs"] = f.n_pairs;
  return j;
}

}  // namespace

std::string to_json_string(const PreprocessReport& r) {
  json j;
  j["n_stations"] = r.n_stations;
  j["n_dates"] = r.n_dates;
  j["station_days_with_pm"] = r.station_days_with_pm;
  j["dropped_outliers"] = r.dropped_outliers;
  j["invalid_windows"] = r.invalid_windows;
  j["dropped_missing_features"] = r.dropped_missing_features;
  j["dates_skipped"] = r.dates_skipped;
  j["samples_built"] = r.samples_built;
  j["imputed_aod"] = {{"aqua", {{"warm", r.merge.imputed_aqua_warm},
                                {"cold", r.merge.imputed_aqua_cold}}},
                      {"terra", {{"warm", r.merge.imputed_terra_warm},
                                 {"cold", r.merge.imputed_terra_cold}}}};
  j["merge_coefficients"] = {{"warm", seasonal_fit_to_json(r.merge_coefficients.warm)},
                             {"cold", seasonal_fit_to_json(r.merge_coefficients.cold)},
                             {"pooled", seasonal_fit_to_json(r.merge_coefficients.pooled)}};
  return j.dump(1);
}

std::string to_json_string(const KrigingSearchResult& result) {
  json j;
  j["best"] = {{"kind", to_string(result.best.kind)},
               {"family", to_string(result.best.variogram.family)},
               {"variogram",
                {{"nugget", result.best.variogram.nugget},
                 {"sill", result.best.variogram.sill},
                 {"range_m", result.best.variogram.range},
                 {"scale", result.best.variogram.scale},
                 {"exponent", result.best.variogram.exponent}}}};
  json rows = json::array();
  for (const KrigingCvCell& cell : result.table) {
    json row;
    row["kind"] = to_string(cell.kind);
    row["family"] = to_string(cell.family);
    row["fold_rmse"] = cell.fold_rmse;
    if (std::isfinite(cell.mean_rmse)) {
      row["mean_rmse"] = cell.mean_rmse;
    } else {
      row["mean_rmse"] = "inf";
    }
    rows.push_back(std::move(row));
  }
  j["table"] = std::move(rows);
  return j.dump(1);
}

std::string to_json_string(const ImportanceReport& report) {
  json j;
  j["no_splits"] = report.no_splits;
  json shares = json::object();
  for (std::size_t i = 0; i < report.feature_names.size(); ++i) {
    shares[report.feature_names[i]] = report.shares[i];
  }
  j["gain_share"] = std::move(shares);
  json ranking = json::array();
  for (std::size_t idx : report.ranking) ranking.push_back(report.feature_names[idx]);
  j["ranking"] = std::move(ranking);
  return j.dump(1);
}

std::string to_json_string(const CorrelationMatrix& matrix) {
  json j;
  j["labels"] = matrix.labels;
  j["abs_pearson"] = matrix.values;
  return j.dump(1);
}

std::string to_json_string(const std::vector<EvalReport>& reports) {
  json j = json::array();
  for (const EvalReport& r : reports) j.push_back(eval_to_json(r));
  return j.dump(1);
}

std::string to_json_string(const AblationResult& result) {
  json rows = json::array();
  for (const AblationRow& row : result.rows) {
    rows.push_back({{"setting", row.setting},
                    {"removed", row.removed_features},
                    {"test_rmse", row.test_rmse},
                    {"test_r2", row.test_r2}});
  }
  json j;
  j["rows"] = std::move(rows);
  return j.dump(1);
}

std::string to_json_string(const MapRunReport& report) {
  json j;
  j["days_mapped"] = report.days_mapped;
  j["days_skipped"] = report.days_skipped;
  j["total_quasi"] = report.total_quasi;
  j["total_ground"] = report.total_ground;
  j["clamped_negative"] = report.clamped_negative;
  j["wall_seconds"] = report.wall_seconds;
  j["outputs"] = report.outputs;
  return j.dump(1);
}

std::string to_json_string(const TrainOutput& output) {
  json j;
  j["train"] = eval_to_json(output.train);
  j["test"] = eval_to_json(output.test);
  json cv = json::array();
  for (const EvalReport& r : output.cv_folds) cv.push_back(eval_to_json(r));
  j["cv"] = std::move(cv);
  if (output.has_importance) {
    json shares = json::object();
    for (std::size_t i = 0; i < output.importance.feature_names.size(); ++i) {
      shares[output.importance.feature_names[i]] = output.importance.shares[i];
    }
    j["importance"] = std::move(shares);
  }
  j["correlation"] = {{"labels", output.correlation.labels},
                      {"abs_pearson", output.correlation.values}};
  return j.dump(1);
}

}  // namespace aeromap
