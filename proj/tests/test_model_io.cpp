#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "aeromap/errors.hpp"
#include "aeromap/model.hpp"
#include "aeromap/rng.hpp"
#include "helpers.hpp"

using namespace aeromap;

namespace {

std::vector<Sample> random_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> samples(n);
  for (auto& s : samples) {
    for (double& f : s.features) f = rng.normal();
    s.target = 3.0 + 2.0 * s.features[1] - s.features[4] * s.features[8] + 0.2 * rng.normal();
  }
  return samples;
}

}  // namespace

TEST_CASE("save/load/predict is exact for every model kind") {
  const auto samples = random_samples(150, 3);
  const auto probe = random_samples(60, 4);
  const FeatureTable table = FeatureTable::from_samples(probe);
  testutil::TempDir tmp("modelio");

  ModelSpec spec;
  spec.random_forest.n_estimators = 12;
  spec.extra_trees.n_estimators = 12;
  spec.gbt.n_estimators = 25;
  spec.gbt.max_depth = 4;

  for (ModelChoice choice :
       {ModelChoice::Univariate, ModelChoice::Multivariate, ModelChoice::Ridge,
        ModelChoice::Lasso, ModelChoice::RandomForest, ModelChoice::ExtraTrees,
        ModelChoice::GradientBoosting}) {
    CAPTURE(to_string(choice));
    spec.choice = choice;
    const Model model = fit_model(samples, spec, 99);
    const auto before = predict(model, table);

    const auto path = tmp.path() / (std::string(to_string(choice)) + ".json");
    save_model(model, path);
    const Model loaded = load_model(path);
    const auto after = predict(loaded, table);

    REQUIRE(after.size() == before.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(after[i] == before[i]);  // bit-identical
    }
  }
}

TEST_CASE("schema version mismatch is rejected") {
  testutil::TempDir tmp("modelio2");
  const auto samples = random_samples(50, 7);
  ModelSpec spec;
  spec.choice = ModelChoice::Ridge;
  save_model(fit_model(samples, spec, 1), tmp.path() / "m.json");

  std::ifstream in(tmp.path() / "m.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  const auto pos = text.find("\"schema_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 19, "\"schema_version\": 9");
  std::ofstream out(tmp.path() / "m.json");
  out << text;
  out.close();

  CHECK_THROWS(load_model(tmp.path() / "m.json"));
}

TEST_CASE("malformed model files raise parse errors") {
  testutil::TempDir tmp("modelio3");
  std::ofstream(tmp.path() / "junk.json") << "{ not json";
  CHECK_THROWS_AS(load_model(tmp.path() / "junk.json"), ParseError);
  CHECK_THROWS(load_model(tmp.path() / "missing.json"));
}
