#include "aeromap/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "aeromap/dataset.hpp"
#include "aeromap/errors.hpp"

namespace aeromap {

namespace {
using json = nlohmann::ordered_json;
}

KrigingChoice PipelineConfig::kriging_for(const std::string& variable) const {
  auto it = kriging.find(variable);
  if (it != kriging.end()) return it->second;
  return KrigingChoice{};
}

PipelineConfig default_config() {
  PipelineConfig config;
  config.kriging = {
      {"d2m", {KrigingKind::Universal, VariogramFamily::Spherical}},
      {"t2m", {KrigingKind::Universal, VariogramFamily::Spherical}},
      {"blh", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"lai_hv", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"lai_lv", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"sp", {KrigingKind::Universal, VariogramFamily::Power}},
      {"ws10", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"wd10", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"uvb", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"cdir", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
      {"RH", {KrigingKind::Universal, VariogramFamily::Spherical}},
      {"pm25", {KrigingKind::Ordinary, VariogramFamily::Spherical}},
  };
  return config;
}

namespace {

void validate(const PipelineConfig& c) {
  if (c.window_size < 1 || c.window_size % 2 == 0) {
    throw Error("config: window_size must be an odd integer >= 1");
  }
  if (c.split_fraction <= 0.0 || c.split_fraction >= 1.0) {
    throw Error("config: split_fraction must be in (0, 1)");
  }
  if (c.cv_folds < 2) throw Error("config: cv_folds must be >= 2");
  if (c.min_valid_pixels < 0) throw Error("config: min_valid_pixels must be >= 0");
  if (c.std_threshold < 0.0) throw Error("config: std_threshold must be >= 0");
  if (c.threads < 0) throw Error("config: threads must be >= 0");
  if (c.scene.n_stations < 2) throw Error("config: scene.n_stations must be >= 2");
}

json kriging_to_json(const std::map<std::string, KrigingChoice>& kriging) {
  json j = json::object();
  for (const auto& [var, choice] : kriging) {
    j[var] = std::string(to_string(choice.kind)) + "/" + to_string(choice.family);
  }
  return j;
}

KrigingChoice kriging_choice_from_string(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    throw Error("config: kriging entry '" + s + "' must look like 'ordinary/spherical'");
  }
  return KrigingChoice{kriging_kind_from_string(s.substr(0, slash)),
                       variogram_family_from_string(s.substr(slash + 1))};
}

json scene_to_json(const SceneParams& s) {
  json j;
  j["n_rows"] = s.n_rows;
  j["n_cols"] = s.n_cols;
  j["origin_lat"] = s.origin_lat;
  j["origin_lon"] = s.origin_lon;
  j["cell_size"] = s.cell_size;
  j["coarse_factor"] = s.coarse_factor;
  j["n_stations"] = s.n_stations;
  j["n_days"] = s.n_days;
  j["start_date"] = s.start_date.to_string();
  j["obs_noise"] = s.obs_noise;
  j["station_missing_fraction"] = s.station_missing_fraction;
  j["outlier_fraction"] = s.outlier_fraction;
  j["outlier_scale"] = s.outlier_scale;
  j["aqua_missing_fraction"] = s.aqua_missing_fraction;
  j["terra_missing_fraction"] = s.terra_missing_fraction;
  j["aqua_structural_noise"] = s.aqua_structural_noise;
  j["retrieval_noise"] = s.retrieval_noise;
  j["pm_base"] = s.pm_base;
  j["pm_naod_gain"] = s.pm_naod_gain;
  j["pm_interaction_gain"] = s.pm_interaction_gain;
  j["pm_rh_gain"] = s.pm_rh_gain;
  j["pm_t2m_gain"] = s.pm_t2m_gain;
  j["pm_spatial_gain"] = s.pm_spatial_gain;
  j["pm_residual_noise"] = s.pm_residual_noise;
  return j;
}

void scene_from_json(const json& j, SceneParams& s) {
  for (const auto& [key, value] : j.items()) {
    if (key == "n_rows") s.n_rows = value;
    else if (key == "n_cols") s.n_cols = value;
    else if (key == "origin_lat") s.origin_lat = value;
    else if (key == "origin_lon") s.origin_lon = value;
    else if (key == "cell_size") s.cell_size = value;
    else if (key == "coarse_factor") s.coarse_factor = value;
    else if (key == "n_stations") s.n_stations = value;
    else if (key == "n_days") s.n_days = value;
    else if (key == "start_date") s.start_date = Date::parse(value);
    else if (key == "obs_noise") s.obs_noise = value;
    else if (key == "station_missing_fraction") s.station_missing_fraction = value;
    else if (key == "outlier_fraction") s.outlier_fraction = value;
    else if (key == "outlier_scale") s.outlier_scale = value;
    else if (key == "aqua_missing_fraction") s.aqua_missing_fraction = value;
    else if (key == "terra_missing_fraction") s.terra_missing_fraction = value;
    else if (key == "aqua_structural_noise") s.aqua_structural_noise = value;
    else if (key == "retrieval_noise") s.retrieval_noise = value;
    else if (key == "pm_base") s.pm_base = value;
    else if (key == "pm_naod_gain") s.pm_naod_gain = value;
    else if (key == "pm_interaction_gain") s.pm_interaction_gain = value;
    else if (key == "pm_rh_gain") s.pm_rh_gain = value;
    else if (key == "pm_t2m_gain") s.pm_t2m_gain = value;
    else if (key == "pm_spatial_gain") s.pm_spatial_gain = value;
    else if (key == "pm_residual_noise") s.pm_residual_noise = value;
    else throw Error("config: unknown scene key '" + key + "'");
  }
}

json ablation_to_json(const std::vector<AblationSetting>& settings) {
  json j = json::array();
  for (const auto& s : settings) {
    j.push_back({{"name", s.name}, {"removed", s.removed_features}});
  }
  return j;
}

}  // namespace

std::string to_json_string(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["window_size"] = c.window_size;
  j["std_threshold"] = c.std_threshold;
  j["min_valid_pixels"] = c.min_valid_pixels;
  j["outlier_method"] = to_string(c.outlier_method);
  j["merge_seasonal"] = c.merge_seasonal;
  j["split_fraction"] = c.split_fraction;
  j["temporal_split"] = c.temporal_split;
  j["cv_folds"] = c.cv_folds;
  j["model"] = to_string(c.model.choice);
  j["univariate_feature"] = c.model.linear.univariate_feature;
  j["ridge_lambda"] = c.model.linear.lambda;
  j["lasso_lambda"] = c.model.linear.lambda;
  j["rf_n_estimators"] = c.model.random_forest.n_estimators;
  j["rf_max_depth"] = c.model.random_forest.max_depth;
  j["rf_max_features"] = c.model.random_forest.max_features;
  j["rf_min_samples_leaf"] = c.model.random_forest.min_samples_leaf;
  j["et_n_estimators"] = c.model.extra_trees.n_estimators;
  j["et_max_depth"] = c.model.extra_trees.max_depth;
  j["et_max_features"] = c.model.extra_trees.max_features;
  j["et_min_samples_leaf"] = c.model.extra_trees.min_samples_leaf;
  j["gb_n_estimators"] = c.model.gbt.n_estimators;
  j["gb_learning_rate"] = c.model.gbt.learning_rate;
  j["gb_max_depth"] = c.model.gbt.max_depth;
  j["gb_max_features"] = c.model.gbt.max_features;
  j["gb_min_child_weight"] = c.model.gbt.min_child_weight;
  j["gb_gamma"] = c.model.gbt.gamma;
  j["gb_early_stopping_rounds"] = c.model.gbt.early_stopping_rounds;
  j["gb_validation_fraction"] = c.model.gbt.validation_fraction;
  j["kriging"] = kriging_to_json(c.kriging);
  j["variogram_bins"] = c.variogram_bins;
  j["max_neighbors"] = c.max_neighbors;
  j["aqi_thresholds"] = c.aqi_thresholds;
  j["ablation"] = ablation_to_json(c.ablation);
  j["scene"] = scene_to_json(c.scene);
  return j.dump(1);
}

namespace {

// Separate lambda knobs in the file, one shared field per linear kind at fit
// time (the reference settings use 0.1 for both).
struct LambdaOverrides {
  double ridge = 0.1;
  double lasso = 0.1;
};

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config.json: " + std::string(e.what()));
  }

  PipelineConfig c = default_config();
  LambdaOverrides lambdas;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") c.seed = value;
    else if (key == "threads") c.threads = value;
    else if (key == "window_size") c.window_size = value;
    else if (key == "std_threshold") c.std_threshold = value;
    else if (key == "min_valid_pixels") c.min_valid_pixels = value;
    else if (key == "outlier_method") c.outlier_method = outlier_method_from_string(value);
    else if (key == "merge_seasonal") c.merge_seasonal = value;
    else if (key == "split_fraction") c.split_fraction = value;
    else if (key == "temporal_split") c.temporal_split = value;
    else if (key == "cv_folds") c.cv_folds = value;
    else if (key == "model") c.model.choice = model_choice_from_string(value);
    else if (key == "univariate_feature") c.model.linear.univariate_feature = value;
    else if (key == "ridge_lambda") lambdas.ridge = value;
    else if (key == "lasso_lambda") lambdas.lasso = value;
    else if (key == "rf_n_estimators") c.model.random_forest.n_estimators = value;
    else if (key == "rf_max_depth") c.model.random_forest.max_depth = value;
    else if (key == "rf_max_features") c.model.random_forest.max_features = value;
    else if (key == "rf_min_samples_leaf") c.model.random_forest.min_samples_leaf = value;
    else if (key == "et_n_estimators") c.model.extra_trees.n_estimators = value;
    else if (key == "et_max_depth") c.model.extra_trees.max_depth = value;
    else if (key == "et_max_features") c.model.extra_trees.max_features = value;
    else if (key == "et_min_samples_leaf") c.model.extra_trees.min_samples_leaf = value;
    else if (key == "gb_n_estimators") c.model.gbt.n_estimators = value;
    else if (key == "gb_learning_rate") c.model.gbt.learning_rate = value;
    else if (key == "gb_max_depth") c.model.gbt.max_depth = value;
    else if (key == "gb_max_features") c.model.gbt.max_features = value;
    else if (key == "gb_min_child_weight") c.model.gbt.min_child_weight = value;
    else if (key == "gb_gamma") c.model.gbt.gamma = value;
    else if (key == "gb_early_stopping_rounds") c.model.gbt.early_stopping_rounds = value;
    else if (key == "gb_validation_fraction") c.model.gbt.validation_fraction = value;
    else if (key == "variogram_bins") c.variogram_bins = value;
    else if (key == "max_neighbors") c.max_neighbors = value;
    else if (key == "aqi_thresholds") value.get_to(c.aqi_thresholds);
    else if (key == "kriging") {
      for (const auto& [var, choice] : value.items()) {
        c.kriging[var] = kriging_choice_from_string(choice);
      }
    } else if (key == "ablation") {
      c.ablation.clear();
      for (const auto& setting : value) {
        AblationSetting s;
        s.name = setting.at("name");
        setting.at("removed").get_to(s.removed_features);
        c.ablation.push_back(std::move(s));
      }
    } else if (key == "scene") {
      scene_from_json(value, c.scene);
    } else {
      throw Error("config: unknown key '" + key + "'");
    }
  }

  const bool lasso = c.model.choice == ModelChoice::Lasso;
  c.model.linear.lambda = lasso ? lambdas.lasso : lambdas.ridge;

  validate(c);
  return c;
}

std::string config_hash(const PipelineConfig& config) {
  const std::string canonical = to_json_string(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : canonical) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace aeromap
