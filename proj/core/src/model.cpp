#include "aeromap/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "aeromap/errors.hpp"
#include "aeromap/rng.hpp"

namespace aeromap {

namespace {
using json = nlohmann::ordered_json;
constexpr int kModelSchemaVersion = 1;
}  // namespace

const char* to_string(ModelChoice m) {
  switch (m) {
    case ModelChoice::Univariate: return "univariate";
    case ModelChoice::Multivariate: return "multivariate";
    case ModelChoice::Ridge: return "ridge";
    case ModelChoice::Lasso: return "lasso";
    case ModelChoice::RandomForest: return "random_forest";
    case ModelChoice::ExtraTrees: return "extra_trees";
    case ModelChoice::GradientBoosting: return "gradient_boosting";
  }
  return "?";
}

ModelChoice model_choice_from_string(const std::string& s) {
  if (s == "univariate") return ModelChoice::Univariate;
  if (s == "multivariate") return ModelChoice::Multivariate;
  if (s == "ridge") return ModelChoice::Ridge;
  if (s == "lasso") return ModelChoice::Lasso;
  if (s == "random_forest") return ModelChoice::RandomForest;
  if (s == "extra_trees") return ModelChoice::ExtraTrees;
  if (s == "gradient_boosting") return ModelChoice::GradientBoosting;
  throw Error("unknown model '" + s + "'");
}

Model fit_model(const std::vector<Sample>& samples, const ModelSpec& spec,
                std::uint64_t seed, int threads) {
  switch (spec.choice) {
    case ModelChoice::Univariate:
      return fit_linear(samples, LinearKind::Univariate, spec.linear);
    case ModelChoice::Multivariate:
      return fit_linear(samples, LinearKind::Multivariate, spec.linear);
    case ModelChoice::Ridge:
      return fit_linear(samples, LinearKind::Ridge, spec.linear);
    case ModelChoice::Lasso:
      return fit_linear(samples, LinearKind::Lasso, spec.linear);
    case ModelChoice::RandomForest:
      return fit_forest(samples, EnsembleKind::RandomForest, spec.random_forest,
                        derive_seed(seed, "random-forest"), threads);
    case ModelChoice::ExtraTrees:
      return fit_forest(samples, EnsembleKind::ExtraTrees, spec.extra_trees,
                        derive_seed(seed, "extra-trees"), threads);
    case ModelChoice::GradientBoosting:
      return fit_gbt(samples, spec.gbt, derive_seed(seed, "gradient-boosting"));
  }
  throw Error("fit_model: unhandled model choice");
}

std::vector<double> predict(const Model& model, const FeatureTable& table, int threads) {
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    return linear->predict(table);
  }
  return std::get<TreeEnsemble>(model).predict(table, threads);
}

const std::vector<std::string>& feature_names_of(const Model& model) {
  if (const auto* linear = std::get_if<LinearModel>(&model)) return linear->feature_names;
  return std::get<TreeEnsemble>(model).feature_names;
}

namespace {

json linear_to_json(const LinearModel& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["feature_names"] = m.feature_names;
  j["intercept"] = m.intercept;
  j["coefficients"] = m.coefficients;
  j["feature_means"] = m.feature_means;
  j["feature_stds"] = m.feature_stds;
  j["lambda"] = m.lambda;
  return j;
}

LinearModel linear_from_json(const json& j) {
  LinearModel m;
  const std::string kind = j.at("kind");
  if (kind == "univariate") m.kind = LinearKind::Univariate;
  else if (kind == "multivariate") m.kind = LinearKind::Multivariate;
  else if (kind == "ridge") m.kind = LinearKind::Ridge;
  else if (kind == "lasso") m.kind = LinearKind::Lasso;
  else throw Error("model.json: unknown linear kind '" + kind + "'");
  j.at("feature_names").get_to(m.feature_names);
  m.intercept = j.at("intercept");
  j.at("coefficients").get_to(m.coefficients);
  j.at("feature_means").get_to(m.feature_means);
  j.at("feature_stds").get_to(m.feature_stds);
  m.lambda = j.at("lambda");
  if (m.coefficients.size() != m.feature_names.size() ||
      m.feature_means.size() != m.feature_names.size() ||
      m.feature_stds.size() != m.feature_names.size()) {
    throw Error("model.json: inconsistent linear coefficient arrays");
  }
  return m;
}

json ensemble_to_json(const TreeEnsemble& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["feature_names"] = m.feature_names;
  j["learning_rate"] = m.learning_rate;
  j["base_score"] = m.base_score;
  json trees = json::array();
  for (const Tree& tree : m.trees) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
      nodes.push_back(json::array(
          {n.feature, n.threshold, n.left, n.right, n.value, n.gain, n.n_samples}));
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

TreeEnsemble ensemble_from_json(const json& j) {
  TreeEnsemble m;
  const std::string kind = j.at("kind");
  if (kind == "random_forest") m.kind = EnsembleKind::RandomForest;
  else if (kind == "extra_trees") m.kind = EnsembleKind::ExtraTrees;
  else if (kind == "gradient_boosting") m.kind = EnsembleKind::GradientBoosting;
  else throw Error("model.json: unknown ensemble kind '" + kind + "'");
  j.at("feature_names").get_to(m.feature_names);
  m.learning_rate = j.at("learning_rate");
  m.base_score = j.at("base_score");
  for (const json& tj : j.at("trees")) {
    Tree tree;
    tree.nodes.reserve(tj.size());
    for (const json& nj : tj) {
      if (!nj.is_array() || nj.size() != 7) throw Error("model.json: malformed tree node");
      TreeNode n;
      n.feature = nj[0];
      n.threshold = nj[1];
      n.left = nj[2];
      n.right = nj[3];
      n.value = nj[4];
      n.gain = nj[5];
      n.n_samples = nj[6];
      tree.nodes.push_back(n);
    }
    if (tree.nodes.empty()) throw Error("model.json: empty tree");
    m.trees.push_back(std::move(tree));
  }
  return m;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    j["model_family"] = "linear";
    j["model"] = linear_to_json(*linear);
  } else {
    j["model_family"] = "tree_ensemble";
    j["model"] = ensemble_to_json(std::get<TreeEnsemble>(model));
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("model.json: " + std::string(e.what()));
  }
  const int version = j.at("schema_version");
  if (version != kModelSchemaVersion) {
    throw Error("model.json schema_version " + std::to_string(version) +
                " does not match supported version " + std::to_string(kModelSchemaVersion));
  }
  const std::string family = j.at("model_family");
  if (family == "linear") return linear_from_json(j.at("model"));
  if (family == "tree_ensemble") return ensemble_from_json(j.at("model"));
  throw Error("model.json: unknown model_family '" + family + "'");
}

std::vector<AblationSetting> default_ablation_settings() {
  // Cumulative least-important-first removal lists.
  const std::vector<std::string> order = {"lai_lv", "month", "Prob_medm", "cdir",
                                          "sp",     "Prob_bestm", "ws10",  "wd10"};
  std::vector<AblationSetting> settings;
  std::vector<std::string> removed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    removed.push_back(order[i]);
    settings.push_back({"S" + std::to_string(i + 1), removed});
  }
  return settings;
}

AblationResult run_ablation(const std::vector<Sample>& train, const std::vector<Sample>& test,
                            const ModelSpec& spec, const std::vector<AblationSetting>& settings,
                            std::uint64_t seed, int threads) {
  if (train.empty() || test.empty()) throw Error("run_ablation: empty train or test split");

  FeatureTable train_table = FeatureTable::from_samples(train);
  FeatureTable test_table = FeatureTable::from_samples(test);
  const std::vector<double> train_y = targets_of(train);
  const std::vector<double> test_y = targets_of(test);

  auto evaluate_subset = [&](const std::vector<std::string>& names) {
    TreeEnsemble model;
    if (spec.choice == ModelChoice::RandomForest) {
      model = fit_forest(train_table, train_y, names, EnsembleKind::RandomForest,
                         spec.random_forest, derive_seed(seed, "ablation-forest"), threads);
    } else if (spec.choice == ModelChoice::ExtraTrees) {
      model = fit_forest(train_table, train_y, names, EnsembleKind::ExtraTrees,
                         spec.extra_trees, derive_seed(seed, "ablation-forest"), threads);
    } else {
      model = fit_gbt(train_table, train_y, names, spec.gbt,
                      derive_seed(seed, "ablation-gbt"));
    }
    return evaluate(model.predict(test_table, threads), test_y);
  };

  AblationResult result;
  std::vector<std::string> all_names(kFeatureNames.begin(), kFeatureNames.end());
  {
    EvalReport baseline = evaluate_subset(all_names);
    result.rows.push_back({"S0", {}, baseline.rmse, baseline.r2});
  }
  for (const AblationSetting& setting : settings) {
    std::set<std::string> removed(setting.removed_features.begin(),
                                  setting.removed_features.end());
    for (const std::string& name : setting.removed_features) {
      if (!feature_index(name)) {
        throw Error("run_ablation: unknown feature '" + name + "' in setting " + setting.name);
      }
    }
    std::vector<std::string> names;
    for (const std::string& name : all_names) {
      if (!removed.count(name)) names.push_back(name);
    }
    if (names.empty()) throw Error("run_ablation: setting " + setting.name +
                                   " removes every feature");
    EvalReport report = evaluate_subset(names);
    result.rows.push_back({setting.name, setting.removed_features, report.rmse, report.r2});
  }
  return result;
}

}  // namespace aeromap
