#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "aeromap/errors.hpp"
#include "aeromap/linear_model.hpp"
#include "aeromap/model.hpp"
#include "aeromap/rng.hpp"
#include "aeromap/tree_model.hpp"
#include "helpers.hpp"

using namespace aeromap;

namespace {

// Random feature table with a chosen response.
std::vector<Sample> make_samples(std::size_t n, std::uint64_t seed,
                                 double (*response)(const std::array<double, kNumFeatures>&,
                                                    Rng&)) {
  Rng rng(seed);
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].station_id = "S" + std::to_string(i % 7);
    samples[i].date = Date{2018, 1, 1}.plus_days(static_cast<long long>(i / 7));
    for (double& f : samples[i].features) f = rng.uniform(-2.0, 2.0);
    samples[i].target = response(samples[i].features, rng);
  }
  return samples;
}

double line_on_naod(const std::array<double, kNumFeatures>& f, Rng&) {
  return 2.0 * f[*feature_index("nAODm")] + 1.0;
}

double linear_combo(const std::array<double, kNumFeatures>& f, Rng& rng) {
  return 3.0 + 1.5 * f[2] - 2.0 * f[5] + 0.5 * f[10] + 0.05 * rng.normal();
}

double step_on_first(const std::array<double, kNumFeatures>& f, Rng&) {
  return f[0] > 0.5 ? 1.0 : 0.0;
}

}  // namespace

TEST_CASE("univariate fit recovers a noiseless line") {
  const auto samples = make_samples(60, 11, line_on_naod);
  const LinearModel model = fit_linear(samples, LinearKind::Univariate);
  const FeatureTable table = FeatureTable::from_samples(samples);
  const auto pred = model.predict(table);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(pred[i] == doctest::Approx(samples[i].target).epsilon(1e-8));
  }
  REQUIRE(model.feature_names.size() == 1);
  CHECK(model.feature_names[0] == "nAODm");
  // De-standardized slope equals 2.
  CHECK(model.coefficients[0] / model.feature_stds[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("ridge with lambda 0 equals multivariate OLS") {
  const auto samples = make_samples(120, 13, linear_combo);
  const LinearModel ols = fit_linear(samples, LinearKind::Multivariate);
  LinearFitOptions opts;
  opts.lambda = 0.0;
  const LinearModel ridge = fit_linear(samples, LinearKind::Ridge, opts);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    CHECK(testutil::approx_rel(ridge.coefficients[f], ols.coefficients[f], 1e-6));
  }
}

TEST_CASE("lasso with huge lambda zeroes all coefficients") {
  const auto samples = make_samples(80, 17, linear_combo);
  LinearFitOptions opts;
  opts.lambda = 1e6;
  const LinearModel lasso = fit_linear(samples, LinearKind::Lasso, opts);
  double y_mean = 0;
  for (const auto& s : samples) y_mean += s.target;
  y_mean /= static_cast<double>(samples.size());
  for (double c : lasso.coefficients) CHECK(c == 0.0);
  CHECK(lasso.intercept == doctest::Approx(y_mean).epsilon(1e-12));
}

TEST_CASE("lasso approaches OLS as lambda -> 0 on clean data") {
  const auto samples = make_samples(150, 19, linear_combo);
  LinearFitOptions opts;
  opts.lambda = 1e-10;
  const LinearModel lasso = fit_linear(samples, LinearKind::Lasso, opts);
  const LinearModel ols = fit_linear(samples, LinearKind::Multivariate);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    CHECK(std::abs(lasso.coefficients[f] - ols.coefficients[f]) < 1e-5);
  }
}

TEST_CASE("ridge coefficient norm is nonincreasing in lambda") {
  const auto samples = make_samples(100, 23, linear_combo);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
    LinearFitOptions opts;
    opts.lambda = lambda;
    const LinearModel m = fit_linear(samples, LinearKind::Ridge, opts);
    double norm = 0.0;
    for (double c : m.coefficients) norm += c * c;
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("rank-deficient OLS raises an error pointing at ridge") {
  auto samples = make_samples(50, 29, linear_combo);
  for (auto& s : samples) s.features[3] = 2.0 * s.features[2];  // exact collinearity
  try {
    fit_linear(samples, LinearKind::Multivariate);
    FAIL("expected rank-deficiency error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("ridge") != std::string::npos);
  }
  // Ridge shrugs it off.
  CHECK_NOTHROW(fit_linear(samples, LinearKind::Ridge));
}

TEST_CASE("prediction by name: missing mandatory feature errors, extras ignored") {
  const auto samples = make_samples(40, 31, line_on_naod);
  const LinearModel model = fit_linear(samples, LinearKind::Univariate);

  FeatureTable missing;
  missing.names = {"AODm"};
  missing.columns = {{1.0, 2.0}};
  CHECK_THROWS_WITH_AS(model.predict(missing) /* nAODm absent */,
                       doctest::Contains("nAODm"), Error);

  FeatureTable extra;
  extra.names = {"bogus", "nAODm"};
  extra.columns = {{9.0, 9.0}, {0.5, 1.5}};
  const auto pred = extra.n_rows() ? model.predict(extra) : std::vector<double>{};
  REQUIRE(pred.size() == 2);
  CHECK(pred[0] == doctest::Approx(2.0 * 0.5 + 1.0).epsilon(1e-8));
}

TEST_CASE("a deep tree drives training error to zero on a step function") {
  const auto samples = make_samples(64, 37, step_on_first);
  ForestParams params;
  params.n_estimators = 1;
  params.max_depth = 4;
  params.max_features = 1.0;
  // ExtraTrees path (random thresholds) also separates a clean step.
  const TreeEnsemble forest =
      fit_forest(samples, EnsembleKind::ExtraTrees, params, 5);
  const auto pred = forest.predict(FeatureTable::from_samples(samples));
  double max_err = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    max_err = std::max(max_err, std::abs(pred[i] - samples[i].target));
  }
  CHECK(max_err < 1e-9);
}

TEST_CASE("gbt with one stage and unit learning rate reduces to a single tree fit") {
  const auto samples = make_samples(100, 41, linear_combo);
  GbtParams params;
  params.n_estimators = 1;
  params.learning_rate = 1.0;
  params.max_depth = 24;  // effectively unbounded for 100 distinct rows
  const TreeEnsemble gbt = fit_gbt(samples, params, 7);
  const auto pred = gbt.predict(FeatureTable::from_samples(samples));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(pred[i] == doctest::Approx(samples[i].target).epsilon(1e-9));
  }
}

TEST_CASE("constant target collapses every leaf to that constant") {
  auto samples = make_samples(50, 43, linear_combo);
  for (auto& s : samples) s.target = 5.5;
  ForestParams params;
  params.n_estimators = 10;
  const TreeEnsemble rf = fit_forest(samples, EnsembleKind::RandomForest, params, 3);
  for (const Tree& t : rf.trees) {
    REQUIRE(t.nodes.size() == 1);  // no split has positive gain
    CHECK(t.nodes[0].value == doctest::Approx(5.5));
  }
  const auto pred = rf.predict(FeatureTable::from_samples(samples));
  for (double p : pred) CHECK(p == doctest::Approx(5.5));
}

TEST_CASE("gbt training MSE is nonincreasing stage by stage") {
  const auto samples = make_samples(120, 47, linear_combo);
  GbtParams params;
  params.n_estimators = 60;
  params.learning_rate = 0.3;
  params.max_depth = 3;
  std::vector<double> curve;
  fit_gbt(samples, params, 11, &curve);
  REQUIRE(curve.size() == 60);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i] <= curve[i - 1] + 1e-12);
  }
}

TEST_CASE("forest predictions stay within the leaf-value envelope") {
  const auto samples = make_samples(90, 53, linear_combo);
  ForestParams params;
  params.n_estimators = 25;
  params.max_depth = 5;
  const TreeEnsemble rf = fit_forest(samples, EnsembleKind::RandomForest, params, 13);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Tree& t : rf.trees) {
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        lo = std::min(lo, n.value);
        hi = std::max(hi, n.value);
      }
    }
  }
  for (double p : rf.predict(FeatureTable::from_samples(samples))) {
    CHECK(p >= lo - 1e-12);
    CHECK(p <= hi + 1e-12);
  }
}

TEST_CASE("ensembles are bit-deterministic in seed and invariant to threads") {
  const auto samples = make_samples(150, 59, linear_combo);
  testutil::TempDir tmp("det");

  ForestParams params;
  params.n_estimators = 30;
  params.max_depth = 6;
  params.max_features = 0.5;

  const TreeEnsemble a = fit_forest(samples, EnsembleKind::RandomForest, params, 1234, 1);
  const TreeEnsemble b = fit_forest(samples, EnsembleKind::RandomForest, params, 1234, 4);
  save_model(Model{a}, tmp.path() / "a.json");
  save_model(Model{b}, tmp.path() / "b.json");
  std::ifstream fa(tmp.path() / "a.json"), fb(tmp.path() / "b.json");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);

  const TreeEnsemble c = fit_forest(samples, EnsembleKind::RandomForest, params, 1235, 1);
  const auto pa = a.predict(FeatureTable::from_samples(samples));
  const auto pc = c.predict(FeatureTable::from_samples(samples));
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) any_diff = any_diff || pa[i] != pc[i];
  CHECK(any_diff);  // different seed, different forest
}

TEST_CASE("importance: single-signal target concentrates gain on that feature") {
  const auto samples = make_samples(200, 61, step_on_first);
  GbtParams params;
  params.n_estimators = 30;
  params.max_depth = 3;
  params.learning_rate = 0.5;
  const TreeEnsemble gbt = fit_gbt(samples, params, 3);
  const ImportanceReport report = feature_importance(gbt);
  REQUIRE_FALSE(report.no_splits);
  double total = 0.0;
  for (double s : report.shares) {
    CHECK(s >= 0.0);
    total += s;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.shares[0] > 0.9);
  CHECK(report.ranking.front() == 0);
}

TEST_CASE("importance: constant target has no splits and is flagged") {
  auto samples = make_samples(30, 67, linear_combo);
  for (auto& s : samples) s.target = 1.0;
  GbtParams params;
  params.n_estimators = 5;
  const TreeEnsemble gbt = fit_gbt(samples, params, 3);
  const ImportanceReport report = feature_importance(gbt);
  CHECK(report.no_splits);
  CHECK(report.ranking.empty());
}

TEST_CASE("gbt min_child_weight and gamma restrain splitting") {
  const auto samples = make_samples(80, 71, step_on_first);
  GbtParams strict;
  strict.n_estimators = 1;
  strict.learning_rate = 1.0;
  strict.max_depth = 6;
  strict.gamma = 1e12;  // no split can clear this bar
  const TreeEnsemble stump = fit_gbt(samples, strict, 5);
  CHECK(stump.trees[0].nodes.size() == 1);

  GbtParams heavy;
  heavy.n_estimators = 1;
  heavy.learning_rate = 1.0;
  heavy.max_depth = 6;
  heavy.min_child_weight = 60;  // of 80 rows: only lopsided splits are legal, none valid
  const TreeEnsemble stump2 = fit_gbt(samples, heavy, 5);
  CHECK(stump2.trees[0].nodes.size() == 1);
}

TEST_CASE("gbt early stopping truncates at the best validation stage") {
  const auto samples = make_samples(300, 73, linear_combo);
  GbtParams params;
  params.n_estimators = 400;
  params.learning_rate = 0.5;
  params.max_depth = 6;
  params.early_stopping_rounds = 10;
  params.validation_fraction = 0.25;
  const TreeEnsemble gbt = fit_gbt(samples, params, 17);
  CHECK(gbt.trees.size() < 400);
  CHECK(gbt.trees.size() >= 1);
}

TEST_CASE("fit_model dispatch covers every choice") {
  const auto samples = make_samples(60, 79, linear_combo);
  ModelSpec spec;
  spec.random_forest.n_estimators = 5;
  spec.extra_trees.n_estimators = 5;
  spec.gbt.n_estimators = 5;
  for (ModelChoice choice :
       {ModelChoice::Univariate, ModelChoice::Multivariate, ModelChoice::Ridge,
        ModelChoice::Lasso, ModelChoice::RandomForest, ModelChoice::ExtraTrees,
        ModelChoice::GradientBoosting}) {
    spec.choice = choice;
    const Model model = fit_model(samples, spec, 3);
    const auto pred = predict(model, FeatureTable::from_samples(samples));
    CHECK(pred.size() == samples.size());
    for (double p : pred) CHECK(std::isfinite(p));
  }
}
