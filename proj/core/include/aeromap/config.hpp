#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aeromap/kriging.hpp"
#include "aeromap/model.hpp"
#include "aeromap/preprocess.hpp"
#include "aeromap/synth.hpp"
#include "aeromap/variogram.hpp"

namespace aeromap {

struct KrigingChoice {
  KrigingKind kind = KrigingKind::Ordinary;
  VariogramFamily family = VariogramFamily::Spherical;
};

/// All experiment knobs in one flat JSON document (`config.json`). Every
/// field has a default equal to the reference settings; a config file only
/// needs the keys it overrides.
struct PipelineConfig {
  std::uint64_t seed = 42;
  int threads = 1;

  // AOD window extraction
  int window_size = 3;          // odd
  double std_threshold = 0.5;   // physical AOD units
  int min_valid_pixels = 3;     // validity requires strictly more than this

  // Station series cleaning
  OutlierMethod outlier_method = OutlierMethod::IQR;

  // Aqua/Terra gap filling
  bool merge_seasonal = true;   // false = pooled coefficients

  // Evaluation protocol
  double split_fraction = 0.7;
  bool temporal_split = false;
  int cv_folds = 5;

  // Model choice + hyperparameters
  ModelSpec model;

  // Kriging choice per interpolated variable (meteorology and "pm25" for
  // the deployment maps); variables not listed fall back to
  // ordinary/spherical.
  std::map<std::string, KrigingChoice> kriging;
  int variogram_bins = 12;
  int max_neighbors = 0;  // 0 = all samples

  // Deployment
  std::vector<double> aqi_thresholds = {12.0, 35.5, 55.5};  // band upper cuts

  // Ablation protocol (cumulative removal lists)
  std::vector<AblationSetting> ablation = default_ablation_settings();

  // Synthetic scene
  SceneParams scene;

  KrigingChoice kriging_for(const std::string& variable) const;
};

PipelineConfig default_config();

/// Reads a config JSON; unknown keys are an error (they are almost always
/// typos), absent keys keep their defaults.
PipelineConfig load_config(const std::filesystem::path& path);

std::string to_json_string(const PipelineConfig& config);

/// Stable 64-bit FNV-1a hash of the canonical JSON rendering; recorded in
/// run manifests.
std::string config_hash(const PipelineConfig& config);

}  // namespace aeromap
