// aeromap: batch front end for the PM2.5 mapping pipeline.
// Subcommands: synth, preprocess, train, ablate, map, eval.
// All reports land on disk as JSON; progress goes to stderr; a failed run
// prints one machine-readable error JSON line on stdout and exits nonzero.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "aeromap/config.hpp"
#include "aeromap/dataset.hpp"
#include "aeromap/deploy.hpp"
#include "aeromap/errors.hpp"
#include "aeromap/model.hpp"
#include "aeromap/pipeline.hpp"
#include "aeromap/raster_io.hpp"
#include "aeromap/synth.hpp"

namespace {

using aeromap::PipelineConfig;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aeromap::Error("cannot checksum '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  (void)hex;
  return h;
}

std::string hex64(std::uint64_t h) {
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

/// Collects everything the manifest records and writes it atomically.
class RunManifest {
 public:
  RunManifest(std::string command, const PipelineConfig& config)
      : command_(std::move(command)), config_hash_(aeromap::config_hash(config)),
        seed_(config.seed) {}

  void add_input(const fs::path& path) {
    inputs_.push_back({path.string(), hex64(fnv1a_file(path))});
  }
  void add_inputs_dir(const fs::path& dir) {
    // One directory-level checksum keeps manifests small for raster trees.
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const fs::path& f : files) {
      const std::uint64_t fh = fnv1a_file(f);
      for (int b = 0; b < 8; ++b) {
        h ^= static_cast<unsigned char>(fh >> (8 * b));
        h *= 0x100000001b3ULL;
      }
    }
    inputs_.push_back({dir.string() + " (" + std::to_string(files.size()) + " files)",
                       hex64(h)});
  }
  void add_output(const fs::path& path) { outputs_.push_back(path.string()); }
  void add_timing(const std::string& stage, double seconds) {
    timings_.emplace_back(stage, seconds);
  }

  void write(const fs::path& out_dir) const {
    json j;
    j["command"] = command_;
    j["config_hash"] = config_hash_;
    j["seed"] = seed_;
    json in = json::array();
    for (const auto& [path, checksum] : inputs_) {
      in.push_back({{"path", path}, {"checksum", checksum}});
    }
    j["inputs"] = std::move(in);
    j["outputs"] = outputs_;
    json t = json::object();
    for (const auto& [stage, seconds] : timings_) t[stage] = seconds;
    j["timings_seconds"] = std::move(t);

    const fs::path final_path = out_dir / "run_manifest.json";
    const fs::path tmp_path = out_dir / "run_manifest.json.tmp";
    {
      std::ofstream out(tmp_path);
      if (!out) throw aeromap::Error("cannot write manifest in " + out_dir.string());
      out << j.dump(1) << '\n';
    }
    fs::rename(tmp_path, final_path);
  }

 private:
  std::string command_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

class StageTimer {
 public:
  explicit StageTimer(RunManifest& manifest, std::string stage)
      : manifest_(manifest), stage_(std::move(stage)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    manifest_.add_timing(
        stage_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
                    .count());
  }

 private:
  RunManifest& manifest_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw aeromap::Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw aeromap::Error("failed writing '" + path.string() + "'");
}

struct CommonOptions {
  std::string config_path;
  std::int64_t seed = -1;
  int window_size = 0;
  std::string model;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool model_override = true) {
  cmd->add_option("--config", opts.config_path, "Pipeline config JSON");
  cmd->add_option("--seed", opts.seed, "Override the master seed");
  cmd->add_option("--window-size", opts.window_size, "Override the AOD window size");
  if (model_override) cmd->add_option("--model", opts.model, "Override the model choice");
  cmd->add_option("--threads", opts.threads,
                  "Worker cap (also via AEROMAP_THREADS); does not change results");
}

PipelineConfig resolve_config(const CommonOptions& opts) {
  PipelineConfig config = opts.config_path.empty()
                              ? aeromap::default_config()
                              : aeromap::load_config(opts.config_path);
  if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.window_size > 0) config.window_size = opts.window_size;
  if (!opts.model.empty()) config.model.choice = aeromap::model_choice_from_string(opts.model);
  if (opts.threads >= 0) {
    config.threads = opts.threads;
  } else if (const char* env = std::getenv("AEROMAP_THREADS")) {
    config.threads = std::max(0, std::atoi(env));
  }
  if (config.threads == 0) {
    config.threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  return config;
}

int run_synth(const CommonOptions& opts, const std::string& out_dir) {
  const PipelineConfig config = resolve_config(opts);
  RunManifest manifest("synth", config);
  fs::create_directories(out_dir);
  {
    StageTimer timer(manifest, "synth");
    std::cerr << "generating synthetic scene (" << config.scene.n_days << " days, "
              << config.scene.n_stations << " stations, seed " << config.seed << ")\n";
    const aeromap::SyntheticScene scene =
        aeromap::generate_synthetic_scene(config.scene, config.seed);
    aeromap::write_scene(scene, out_dir);
  }
  manifest.add_output(out_dir);
  manifest.write(out_dir);
  std::cerr << "scene written to " << out_dir << "\n";
  return 0;
}

int run_preprocess_cmd(const CommonOptions& opts, const std::string& data_dir,
                       const std::string& out_dir) {
  const PipelineConfig config = resolve_config(opts);
  RunManifest manifest("preprocess", config);
  manifest.add_inputs_dir(data_dir);
  fs::create_directories(out_dir);

  aeromap::PreprocessOutput output;
  {
    StageTimer timer(manifest, "preprocess");
    std::cerr << "preprocessing " << data_dir << "\n";
    output = aeromap::run_preprocess(data_dir, config);
  }
  const fs::path samples_path = fs::path(out_dir) / "samples.csv";
  const fs::path report_path = fs::path(out_dir) / "preprocess_report.json";
  aeromap::write_samples(output.samples, samples_path);
  write_text(report_path, aeromap::to_json_string(output.report));
  manifest.add_output(samples_path);
  manifest.add_output(report_path);
  manifest.write(out_dir);
  std::cerr << "built " << output.samples.size() << " samples ("
            << output.report.dropped_outliers << " outliers dropped, "
            << output.report.invalid_windows << " invalid windows)\n";
  return 0;
}

int run_train_cmd(const CommonOptions& opts, const std::string& samples_path,
                  const std::string& out_dir) {
  const PipelineConfig config = resolve_config(opts);
  RunManifest manifest("train", config);
  manifest.add_input(samples_path);
  fs::create_directories(out_dir);

  const std::vector<aeromap::Sample> samples = aeromap::read_samples(samples_path);
  aeromap::TrainOutput output;
  {
    StageTimer timer(manifest, "train");
    std::cerr << "training " << aeromap::to_string(config.model.choice) << " on "
              << samples.size() << " samples\n";
    output = aeromap::run_train(samples, config);
  }
  const fs::path model_path = fs::path(out_dir) / "model.json";
  const fs::path report_path = fs::path(out_dir) / "train_report.json";
  aeromap::save_model(output.model, model_path);
  write_text(report_path, aeromap::to_json_string(output));
  manifest.add_output(model_path);
  manifest.add_output(report_path);
  manifest.write(out_dir);
  std::cerr << "test rmse " << output.test.rmse << ", r2 " << output.test.r2 << "\n";
  return 0;
}

int run_ablate_cmd(const CommonOptions& opts, const std::string& samples_path,
                   const std::string& out_dir) {
  const PipelineConfig config = resolve_config(opts);
  RunManifest manifest("ablate", config);
  manifest.add_input(samples_path);
  fs::create_directories(out_dir);

  const std::vector<aeromap::Sample> samples = aeromap::read_samples(samples_path);
  aeromap::AblationResult result;
  {
    StageTimer timer(manifest, "ablate");
    auto [train, test] =
        config.temporal_split
            ? aeromap::split_train_test_temporal(samples, config.split_fraction)
            : aeromap::split_train_test(samples, config.split_fraction, config.seed);
    std::cerr << "ablation over " << config.ablation.size() << " settings\n";
    result = aeromap::run_ablation(train, test, config.model, config.ablation, config.seed,
                                   config.threads);
  }
  const fs::path path = fs::path(out_dir) / "ablation.json";
  write_text(path, aeromap::to_json_string(result));
  manifest.add_output(path);
  manifest.write(out_dir);
  return 0;
}

int run_map_cmd(const CommonOptions& opts, const std::string& model_path,
                const std::string& data_dir, const std::string& from,
                const std::string& to, const std::string& out_dir, bool aqi) {
  const PipelineConfig config = resolve_config(opts);
  RunManifest manifest("map", config);
  manifest.add_input(model_path);
  manifest.add_inputs_dir(data_dir);
  fs::create_directories(out_dir);

  const aeromap::Model model = aeromap::load_model(model_path);
  const aeromap::Date first = aeromap::Date::parse(from);
  const aeromap::Date last = aeromap::Date::parse(to);
  aeromap::MapRunReport report;
  {
    StageTimer timer(manifest, "map");
    std::cerr << "mapping " << from << " .. " << to << "\n";
    report = aeromap::run_map(data_dir, model, config, first, last, out_dir);
  }
  if (aqi) {
    StageTimer timer(manifest, "aqi");
    for (const std::string& name : std::vector<std::string>(report.outputs)) {
      if (name.rfind("pm25_", 0) != 0 || name.rfind("pm25_monthly", 0) == 0 ||
          name.rfind("pm25_yearly", 0) == 0) {
        continue;
      }
      const fs::path pm_path = fs::path(out_dir) / name;
      const aeromap::Raster pm = aeromap::read_raster(pm_path);
      aeromap::Raster bands = aeromap::classify_aqi_band(pm, config.aqi_thresholds);
      const std::string aqi_name = "aqi_" + name.substr(5);
      aeromap::write_raster(bands, fs::path(out_dir) / aqi_name);
      report.outputs.push_back(aqi_name);
    }
  }
  const fs::path report_path = fs::path(out_dir) / "map_report.json";
  write_text(report_path, aeromap::to_json_string(report));
  for (const std::string& name : report.outputs) {
    manifest.add_output(fs::path(out_dir) / name);
  }
  manifest.add_output(report_path);
  manifest.write(out_dir);
  std::cerr << "mapped " << report.days_mapped << " days (" << report.days_skipped
            << " skipped)\n";
  return 0;
}

int run_eval_cmd(const CommonOptions& opts, const std::string& model_path,
                 const std::string& samples_path, const std::string& out_dir) {
  const PipelineConfig config = resolve_config(opts);
  RunManifest manifest("eval", config);
  manifest.add_input(model_path);
  manifest.add_input(samples_path);
  fs::create_directories(out_dir);

  const aeromap::Model model = aeromap::load_model(model_path);
  const std::vector<aeromap::Sample> samples = aeromap::read_samples(samples_path);
  aeromap::EvalReport report;
  {
    StageTimer timer(manifest, "eval");
    report =
        aeromap::evaluate(aeromap::predict(model, aeromap::FeatureTable::from_samples(samples),
                                           config.threads),
                          aeromap::targets_of(samples), "eval");
  }
  const fs::path path = fs::path(out_dir) / "eval_report.json";
  write_text(path, aeromap::to_json_string(std::vector<aeromap::EvalReport>{report}));
  manifest.add_output(path);
  manifest.write(out_dir);
  std::cerr << "rmse " << report.rmse << ", mae " << report.mae << ", r2 " << report.r2
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High resolution PM2.5 estimation from 1 km AOD rasters"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string out_dir, data_dir, samples_path, model_path, from, to;
  bool aqi = false;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  add_common(synth, opts);
  synth->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* preprocess =
      app.add_subcommand("preprocess", "Build the model-ready sample table");
  add_common(preprocess, opts);
  preprocess->add_option("--data", data_dir, "Input data directory")->required();
  preprocess->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Fit and evaluate a model");
  add_common(train, opts);
  train->add_option("--samples", samples_path, "samples.csv from preprocess")->required();
  train->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Feature-removal ablation curve");
  add_common(ablate, opts);
  ablate->add_option("--samples", samples_path, "samples.csv from preprocess")->required();
  ablate->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* map_cmd = app.add_subcommand("map", "Produce daily/aggregate PM2.5 grids");
  add_common(map_cmd, opts, /*model_override=*/false);
  map_cmd->add_option("--model", model_path, "model.json from train")->required();
  map_cmd->add_option("--data", data_dir, "Input data directory")->required();
  map_cmd->add_option("--from", from, "First date (YYYY-MM-DD)")->required();
  map_cmd->add_option("--to", to, "Last date (YYYY-MM-DD)")->required();
  map_cmd->add_option("--out", out_dir, "Output directory")->required();
  map_cmd->add_flag("--aqi", aqi, "Also write banded AQI category grids");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a sample table");
  add_common(eval_cmd, opts, /*model_override=*/false);
  eval_cmd->add_option("--model", model_path, "model.json")->required();
  eval_cmd->add_option("--samples", samples_path, "samples.csv")->required();
  eval_cmd->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(opts, out_dir);
    if (preprocess->parsed()) return run_preprocess_cmd(opts, data_dir, out_dir);
    if (train->parsed()) return run_train_cmd(opts, samples_path, out_dir);
    if (ablate->parsed()) return run_ablate_cmd(opts, samples_path, out_dir);
    if (map_cmd->parsed()) return run_map_cmd(opts, model_path, data_dir, from, to, out_dir, aqi);
    if (eval_cmd->parsed()) return run_eval_cmd(opts, model_path, samples_path, out_dir);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    err["command"] = argv[1] ? argv[1] : "";
    std::cout << err.dump() << std::endl;
    return 1;
  }
  return 1;
}
