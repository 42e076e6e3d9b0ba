// End-to-end exercises of the aeromap binary. The binary path arrives via
// the AEROMAP_BIN environment variable (set by CTest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aeromap/raster_io.hpp"
#include "helpers.hpp"

namespace {

std::string binary_path() {
  const char* env = std::getenv("AEROMAP_BIN");
  REQUIRE_MESSAGE(env != nullptr, "AEROMAP_BIN must point at the aeromap binary");
  return env;
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args, const std::filesystem::path& workdir) {
  const auto out_file = workdir / "stdout.txt";
  const std::string cmd = binary_path() + " " + args + " >" + out_file.string() + " 2>" +
                          (workdir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  result.stdout_text = ss.str();
  return result;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << R"({
    "seed": 11,
    "gb_n_estimators": 50, "gb_max_depth": 4,
    "rf_n_estimators": 20, "et_n_estimators": 20,
    "scene": {"n_rows": 16, "n_cols": 18, "n_stations": 8, "n_days": 24}
  })";
}

}  // namespace

TEST_CASE("synth -> preprocess -> train -> eval -> map round trip") {
  testutil::TempDir tmp("cli");
  const auto dir = tmp.path();
  write_config(dir / "config.json");
  const std::string cfg = " --config " + (dir / "config.json").string();

  auto synth = run("synth" + cfg + " --out " + (dir / "scene").string(), dir);
  CHECK(synth.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "scene" / "stations.csv"));
  CHECK(std::filesystem::exists(dir / "scene" / "run_manifest.json"));

  auto prep = run("preprocess" + cfg + " --data " + (dir / "scene").string() + " --out " +
                      (dir / "prep").string(),
                  dir);
  CHECK(prep.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "prep" / "samples.csv"));
  CHECK(std::filesystem::exists(dir / "prep" / "preprocess_report.json"));

  auto train = run("train" + cfg + " --samples " + (dir / "prep" / "samples.csv").string() +
                       " --out " + (dir / "trained").string(),
                   dir);
  CHECK(train.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "trained" / "model.json"));
  const std::string report = slurp(dir / "trained" / "train_report.json");
  CHECK(report.find("\"test\"") != std::string::npos);
  CHECK(report.find("\"cv\"") != std::string::npos);

  auto eval = run("eval --model " + (dir / "trained" / "model.json").string() +
                      " --samples " + (dir / "prep" / "samples.csv").string() + " --out " +
                      (dir / "evaled").string(),
                  dir);
  CHECK(eval.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "evaled" / "eval_report.json"));

  auto map = run("map" + cfg + " --model " + (dir / "trained" / "model.json").string() +
                     " --data " + (dir / "scene").string() +
                     " --from 2018-01-03 --to 2018-01-08 --out " + (dir / "maps").string() +
                     " --aqi",
                 dir);
  CHECK(map.exit_code == 0);
  for (const char* date : {"2018-01-03", "2018-01-05", "2018-01-08"}) {
    CHECK(std::filesystem::exists(dir / "maps" / ("pm25_" + std::string(date) + ".grid")));
    CHECK(std::filesystem::exists(dir / "maps" /
                                  ("provenance_" + std::string(date) + ".grid")));
    CHECK(std::filesystem::exists(dir / "maps" / ("aqi_" + std::string(date) + ".grid")));
  }
  CHECK(std::filesystem::exists(dir / "maps" / "pm25_monthly_2018-01.grid"));
  CHECK(std::filesystem::exists(dir / "maps" / "pm25_yearly_2018.grid"));
  CHECK(std::filesystem::exists(dir / "maps" / "map_report.json"));

  // Gap-free daily maps.
  const aeromap::Raster pm = aeromap::read_raster(dir / "maps" / "pm25_2018-01-05.grid");
  CHECK(pm.missing_count() == 0);
}

TEST_CASE("rerunning synth with the same seed is byte-identical") {
  testutil::TempDir tmp("cli2");
  const auto dir = tmp.path();
  write_config(dir / "config.json");
  const std::string cfg = " --config " + (dir / "config.json").string();

  CHECK(run("synth" + cfg + " --out " + (dir / "a").string(), dir).exit_code == 0);
  CHECK(run("synth" + cfg + " --out " + (dir / "b").string(), dir).exit_code == 0);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    if (name == "run_manifest.json") continue;  // carries wall-clock timings
    CHECK(slurp(entry.path()) == slurp(dir / "b" / name));
    ++files;
  }
  CHECK(files > 20);
}

TEST_CASE("seed override changes outputs") {
  testutil::TempDir tmp("cli3");
  const auto dir = tmp.path();
  write_config(dir / "config.json");
  const std::string cfg = " --config " + (dir / "config.json").string();
  CHECK(run("synth" + cfg + " --out " + (dir / "a").string(), dir).exit_code == 0);
  CHECK(run("synth" + cfg + " --seed 99 --out " + (dir / "b").string(), dir).exit_code == 0);
  CHECK(slurp(dir / "a" / "stations.csv") != slurp(dir / "b" / "stations.csv"));
}

TEST_CASE("failures exit nonzero with a machine-readable error JSON") {
  testutil::TempDir tmp("cli4");
  const auto dir = tmp.path();
  auto missing = run("preprocess --data " + (dir / "nope").string() + " --out " +
                         (dir / "out").string(),
                     dir);
  CHECK(missing.exit_code != 0);
  CHECK(missing.stdout_text.find("\"error\"") != std::string::npos);

  std::ofstream(dir / "bad.json") << "{\"sedd\": 1}";
  auto bad = run("synth --config " + (dir / "bad.json").string() + " --out " +
                     (dir / "o2").string(),
                 dir);
  CHECK(bad.exit_code != 0);
  CHECK(bad.stdout_text.find("unknown key") != std::string::npos);

  auto no_sub = run("", dir);
  CHECK(no_sub.exit_code != 0);
}

TEST_CASE("manifest records config hash, inputs, and timings") {
  testutil::TempDir tmp("cli5");
  const auto dir = tmp.path();
  write_config(dir / "config.json");
  const std::string cfg = " --config " + (dir / "config.json").string();
  REQUIRE(run("synth" + cfg + " --out " + (dir / "scene").string(), dir).exit_code == 0);
  const std::string manifest = slurp(dir / "scene" / "run_manifest.json");
  CHECK(manifest.find("\"config_hash\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": 11") != std::string::npos);
  CHECK(manifest.find("\"timings_seconds\"") != std::string::npos);
  CHECK(manifest.find("\"outputs\"") != std::string::npos);
}
