#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "aeromap/config.hpp"
#include "aeromap/errors.hpp"
#include "aeromap/raster_io.hpp"
#include "aeromap/rng.hpp"
#include "helpers.hpp"

using namespace aeromap;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("smallest well-formed raster file") {
  testutil::TempDir tmp("io1");
  spit(tmp.path() / "a.grid",
       "nrows 1\nncols 1\norigin_lat 35.7\norigin_lon 51.4\ncell_size 0.01\n"
       "date 2018-01-01\nvariable aod\n0.5\n");
  const Raster r = read_raster(tmp.path() / "a.grid");
  CHECK(r.spec.n_rows == 1);
  CHECK(r.spec.n_cols == 1);
  CHECK(r.values[0] == 0.5);
  CHECK(r.variable == "aod");
  CHECK(r.spec.timestamp == Date{2018, 1, 1});
}

TEST_CASE("NA token becomes the missing sentinel") {
  testutil::TempDir tmp("io2");
  spit(tmp.path() / "a.grid",
       "nrows 1\nncols 2\norigin_lat 35.7\norigin_lon 51.4\ncell_size 0.01\n"
       "date 2018-01-01\nvariable aod\n0.25 NA\n");
  const Raster r = read_raster(tmp.path() / "a.grid");
  CHECK(r.values[0] == 0.25);
  CHECK(is_missing(r.values[1]));
}

TEST_CASE("value-count mismatches are parse errors") {
  testutil::TempDir tmp("io3");
  spit(tmp.path() / "short.grid",
       "nrows 2\nncols 2\norigin_lat 35.7\norigin_lon 51.4\ncell_size 0.01\n"
       "date 2018-01-01\nvariable aod\n1 2 3\n");
  CHECK_THROWS_AS(read_raster(tmp.path() / "short.grid"), ParseError);

  spit(tmp.path() / "long.grid",
       "nrows 2\nncols 2\norigin_lat 35.7\norigin_lon 51.4\ncell_size 0.01\n"
       "date 2018-01-01\nvariable aod\n1 2 3 4 5\n");
  CHECK_THROWS_AS(read_raster(tmp.path() / "long.grid"), ParseError);
}

TEST_CASE("non-numeric tokens name line and column") {
  testutil::TempDir tmp("io4");
  spit(tmp.path() / "bad.grid",
       "nrows 2\nncols 2\norigin_lat 35.7\norigin_lon 51.4\ncell_size 0.01\n"
       "date 2018-01-01\nvariable aod\n1 2\n3 oops\n");
  try {
    read_raster(tmp.path() / "bad.grid");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 9);
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
}

TEST_CASE("malformed headers are rejected") {
  testutil::TempDir tmp("io5");
  spit(tmp.path() / "h.grid", "nrows 1\nncols 1\nwrong 1\n");
  CHECK_THROWS_AS(read_raster(tmp.path() / "h.grid"), ParseError);
  spit(tmp.path() / "h2.grid", "nrows x\n");
  CHECK_THROWS_AS(read_raster(tmp.path() / "h2.grid"), ParseError);
}

TEST_CASE("write then read is identity, write again is byte-identical") {
  testutil::TempDir tmp("io6");
  GridSpec spec{5, 7, 35.95, 51.10, 0.01, Date{2018, 3, 5}};
  Raster r(spec, "blh");
  Rng rng(12);
  for (double& v : r.values) {
    v = rng.uniform() < 0.2 ? kMissing : rng.uniform(-1000.0, 1000.0);
  }
  write_raster(r, tmp.path() / "a.grid");
  const Raster back = read_raster(tmp.path() / "a.grid");
  CHECK(back.spec.join_compatible(spec));
  CHECK(back.spec.timestamp == spec.timestamp);
  CHECK(back.variable == "blh");
  write_raster(back, tmp.path() / "b.grid");
  CHECK(slurp(tmp.path() / "a.grid") == slurp(tmp.path() / "b.grid"));
}

TEST_CASE("station CSV happy path and sentinel") {
  testutil::TempDir tmp("io7");
  spit(tmp.path() / "stations.csv",
       "station_id,lat,lon,date,pm25\n"
       "S01,35.70,51.40,2018-01-01,73.2\n"
       "S01,35.70,51.40,2018-01-02,\n");
  const auto records = read_stations(tmp.path() / "stations.csv");
  REQUIRE(records.size() == 2);
  CHECK(records[0].pm25 == 73.2);
  CHECK(records[0].lat == 35.70);
  CHECK(records[0].date == Date{2018, 1, 1});
  CHECK_FALSE(records[1].has_pm25());
}

TEST_CASE("station CSV rejects duplicates and negatives") {
  testutil::TempDir tmp("io8");
  spit(tmp.path() / "dup.csv",
       "station_id,lat,lon,date,pm25\n"
       "S01,35.70,51.40,2018-01-01,73.2\n"
       "S01,35.71,51.41,2018-01-01,10\n");
  CHECK_THROWS_AS(read_stations(tmp.path() / "dup.csv"), ParseError);

  spit(tmp.path() / "neg.csv",
       "station_id,lat,lon,date,pm25\n"
       "S01,35.70,51.40,2018-01-01,-3\n");
  CHECK_THROWS_AS(read_stations(tmp.path() / "neg.csv"), ParseError);

  spit(tmp.path() / "hdr.csv", "id,lat,lon,date,pm\nS01,1,2,2018-01-01,3\n");
  CHECK_THROWS_AS(read_stations(tmp.path() / "hdr.csv"), ParseError);
}

TEST_CASE("stations write/read round trip") {
  testutil::TempDir tmp("io9");
  std::vector<StationRecord> records = {
      {"S01", 35.7042, 51.4005, Date{2018, 1, 1}, 73.2},
      {"S02", 35.71, 51.39, Date{2018, 1, 1}, kMissing},
  };
  write_stations(records, tmp.path() / "s.csv");
  const auto back = read_stations(tmp.path() / "s.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].station_id == "S01");
  CHECK(back[0].pm25 == 73.2);
  CHECK_FALSE(back[1].has_pm25());
}

TEST_CASE("QA planes round trip through integer-coded grids") {
  testutil::TempDir tmp("io10");
  GridSpec spec{2, 2, 35.8, 51.2, 0.01, Date{2018, 1, 1}};
  QaRaster qa(spec);
  qa.cloud = {CloudMask::Clear, CloudMask::PossiblyCloudy, CloudMask::Cloudy,
              CloudMask::Missing};
  qa.adjacency = {AdjacencyMask::NormalClear, AdjacencyMask::Adjacent,
                  AdjacencyMask::Missing, AdjacencyMask::Missing};
  qa.aod_quality = {AodQuality::Best, AodQuality::Medium, AodQuality::Low,
                    AodQuality::Missing};
  write_qa(qa, tmp.path() / "c.grid", tmp.path() / "a.grid", tmp.path() / "q.grid");
  const QaRaster back = read_qa(tmp.path() / "c.grid", tmp.path() / "a.grid",
                                tmp.path() / "q.grid");
  CHECK(back.cloud == qa.cloud);
  CHECK(back.adjacency == qa.adjacency);
  CHECK(back.aod_quality == qa.aod_quality);
}

TEST_CASE("samples round trip") {
  testutil::TempDir tmp("io11");
  std::vector<Sample> samples(3);
  Rng rng(5);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].station_id = "S0" + std::to_string(i + 1);
    samples[i].date = Date{2018, 1, static_cast<int>(i) + 1};
    for (double& f : samples[i].features) f = rng.uniform(-5.0, 5.0);
    samples[i].target = rng.uniform(0.0, 100.0);
  }
  write_samples(samples, tmp.path() / "samples.csv");
  const auto back = read_samples(tmp.path() / "samples.csv");
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].station_id == samples[i].station_id);
    CHECK(back[i].date == samples[i].date);
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      CHECK(testutil::approx_rel(back[i].features[f], samples[i].features[f], 1e-11));
    }
  }
}

TEST_CASE("config defaults match the reference settings") {
  const PipelineConfig c = default_config();
  CHECK(c.window_size == 3);
  CHECK(c.std_threshold == 0.5);
  CHECK(c.min_valid_pixels == 3);
  CHECK(c.outlier_method == OutlierMethod::IQR);
  CHECK(c.split_fraction == 0.7);
  CHECK(c.cv_folds == 5);
  CHECK(c.seed == 42);
  CHECK(c.model.choice == ModelChoice::GradientBoosting);
  CHECK(c.model.linear.lambda == 0.1);
  CHECK(c.model.random_forest.n_estimators == 500);
  CHECK(c.model.random_forest.max_depth == 10);
  CHECK(c.model.random_forest.max_features == 0.5);
  CHECK(c.model.random_forest.min_samples_leaf == 1);
  CHECK(c.model.extra_trees.max_features == 0.8);
  CHECK(c.model.gbt.n_estimators == 2000);
  CHECK(c.model.gbt.learning_rate == 0.3);
  CHECK(c.model.gbt.max_depth == 6);
  CHECK(c.model.gbt.max_features == 1.0);
  CHECK(c.model.gbt.min_child_weight == 1);
  CHECK(c.model.gbt.gamma == 0.0);
  CHECK(c.kriging_for("blh").kind == KrigingKind::Ordinary);
  CHECK(c.kriging_for("blh").family == VariogramFamily::Spherical);
  CHECK(c.kriging_for("sp").kind == KrigingKind::Universal);
  CHECK(c.kriging_for("sp").family == VariogramFamily::Power);
  CHECK(c.kriging_for("RH").kind == KrigingKind::Universal);
}

TEST_CASE("config loading: overrides, unknown keys, hash stability") {
  testutil::TempDir tmp("io12");
  spit(tmp.path() / "c.json",
       R"({"seed": 7, "window_size": 5, "model": "ridge", "kriging": {"blh": "universal/gaussian"}})");
  const PipelineConfig c = load_config(tmp.path() / "c.json");
  CHECK(c.seed == 7);
  CHECK(c.window_size == 5);
  CHECK(c.model.choice == ModelChoice::Ridge);
  CHECK(c.kriging_for("blh").kind == KrigingKind::Universal);
  CHECK(c.kriging_for("blh").family == VariogramFamily::Gaussian);
  CHECK(c.kriging_for("t2m").kind == KrigingKind::Universal);  // untouched default

  spit(tmp.path() / "bad.json", R"({"sedd": 7})");
  CHECK_THROWS(load_config(tmp.path() / "bad.json"));
  spit(tmp.path() / "even.json", R"({"window_size": 4})");
  CHECK_THROWS(load_config(tmp.path() / "even.json"));

  CHECK(config_hash(c) == config_hash(c));
  CHECK(config_hash(c) != config_hash(default_config()));
}
