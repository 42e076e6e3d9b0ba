#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeromap/sample.hpp"

namespace aeromap {

enum class EnsembleKind { RandomForest, ExtraTrees, GradientBoosting };

const char* to_string(EnsembleKind k);

/// Flat binary regression tree. Internal nodes carry split feature/threshold
/// and child indices; leaves carry the fitted value. Node 0 is the root.
struct TreeNode {
  int feature = -1;        // -1 for leaves
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;      // leaf value (mean of node targets)
  double gain = 0.0;       // SSE reduction of the split, 0 for leaves
  int n_samples = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict_row(const std::vector<const std::vector<double>*>& cols, std::size_t row) const;
};

struct ForestParams {
  int n_estimators = 500;
  int max_depth = 10;
  double max_features = 0.5;  // fraction of features searched per split
  int min_samples_leaf = 1;
};

struct GbtParams {
  int n_estimators = 2000;
  double learning_rate = 0.3;
  int max_depth = 6;
  double max_features = 1.0;
  int min_child_weight = 1;  // minimum samples (unit hessians) per leaf
  double gamma = 0.0;        // minimum SSE reduction to accept a split
  int early_stopping_rounds = 0;   // 0 = off
  double validation_fraction = 0.1;  // used only when early stopping is on
};

/// Forest (mean of trees) or boosted (base + lr * sum of trees) ensemble.
struct TreeEnsemble {
  EnsembleKind kind = EnsembleKind::GradientBoosting;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  double learning_rate = 1.0;  // GradientBoosting only
  double base_score = 0.0;     // GradientBoosting only

  std::vector<double> predict(const FeatureTable& table, int threads = 1) const;
};

/// Bagged forests: RandomForest bootstraps rows and searches the best split
/// over a random feature subset; ExtraTrees uses all rows and one random
/// threshold per candidate feature. Deterministic given seed: per-tree RNG
/// streams are derived from the master seed, so any parallel schedule
/// reproduces the serial result.
TreeEnsemble fit_forest(const std::vector<Sample>& samples, EnsembleKind kind,
                        const ForestParams& params, std::uint64_t seed, int threads = 1);

/// Stagewise least-squares boosting: base_score = mean target, each stage
/// fits a depth-bounded tree to the residuals. Optionally records the
/// training MSE after every stage.
TreeEnsemble fit_gbt(const std::vector<Sample>& samples, const GbtParams& params,
                     std::uint64_t seed, std::vector<double>* train_mse_per_stage = nullptr);

/// Explicit-design variants (custom feature subsets, e.g. for the ablation
/// protocol); feature_names selects columns from the table.
TreeEnsemble fit_forest(const FeatureTable& table, const std::vector<double>& targets,
                        const std::vector<std::string>& feature_names, EnsembleKind kind,
                        const ForestParams& params, std::uint64_t seed, int threads = 1);
TreeEnsemble fit_gbt(const FeatureTable& table, const std::vector<double>& targets,
                     const std::vector<std::string>& feature_names, const GbtParams& params,
                     std::uint64_t seed, std::vector<double>* train_mse_per_stage = nullptr);

struct ImportanceReport {
  std::vector<std::string> feature_names;  // canonical order of the model
  std::vector<double> shares;              // gain totals normalized to sum 1
  std::vector<std::size_t> ranking;        // feature indices, highest share first
  bool no_splits = false;                  // constant target: nothing to rank
};

/// Total split gain per feature across all trees, normalized to sum 1.
ImportanceReport feature_importance(const TreeEnsemble& model);

std::string to_json_string(const ImportanceReport& report);

}  // namespace aeromap
