#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "aeromap/linear_model.hpp"
#include "aeromap/metrics.hpp"
#include "aeromap/tree_model.hpp"

namespace aeromap {

enum class ModelChoice {
  Univariate,
  Multivariate,
  Ridge,
  Lasso,
  RandomForest,
  ExtraTrees,
  GradientBoosting
};

const char* to_string(ModelChoice m);
ModelChoice model_choice_from_string(const std::string& s);

/// Everything needed to train one model: the kind plus its hyperparameters.
struct ModelSpec {
  ModelChoice choice = ModelChoice::GradientBoosting;
  LinearFitOptions linear;
  ForestParams random_forest;
  ForestParams extra_trees{.n_estimators = 500, .max_depth = 10, .max_features = 0.8,
                           .min_samples_leaf = 1};
  GbtParams gbt;
};

using Model = std::variant<LinearModel, TreeEnsemble>;

Model fit_model(const std::vector<Sample>& samples, const ModelSpec& spec,
                std::uint64_t seed, int threads = 1);

/// Predicts by feature name; missing mandatory columns raise an error naming
/// the feature, extra columns are ignored.
std::vector<double> predict(const Model& model, const FeatureTable& table, int threads = 1);

const std::vector<std::string>& feature_names_of(const Model& model);

// Self-describing JSON serialization (`model.json`). Doubles are written
// with 17 significant digits so a load/save cycle reproduces predictions
// bit-identically. A schema_version mismatch raises an error.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Setting removal lists for the feature-ablation protocol, applied
/// cumulatively (S1..S8) on top of the all-features baseline S0.
struct AblationSetting {
  std::string name;
  std::vector<std::string> removed_features;
};

std::vector<AblationSetting> default_ablation_settings();

struct AblationRow {
  std::string setting;
  std::vector<std::string> removed_features;
  double test_rmse = 0.0;
  double test_r2 = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;  // S0 baseline first
};

/// Retrains the boosted model per setting (each discarding the listed
/// features) and reports the test RMSE curve.
AblationResult run_ablation(const std::vector<Sample>& train,
                            const std::vector<Sample>& test, const ModelSpec& spec,
                            const std::vector<AblationSetting>& settings,
                            std::uint64_t seed, int threads = 1);

std::string to_json_string(const AblationResult& result);

}  // namespace aeromap
