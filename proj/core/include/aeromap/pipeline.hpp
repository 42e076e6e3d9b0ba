#pragma once

#include <filesystem>
#include <vector>

#include "aeromap/config.hpp"
#include "aeromap/dataset.hpp"
#include "aeromap/deploy.hpp"
#include "aeromap/metrics.hpp"
#include "aeromap/model.hpp"
#include "aeromap/preprocess.hpp"

namespace aeromap {

/// Interpolates one variable's scattered points to targets: variogram
/// fitted from the points with the configured family, kriged with the
/// configured kind. Degenerate inputs (constant field, failed fit, singular
/// system) fall back to a pure-nugget model, i.e. the global mean.
std::vector<double> krige_variable(const std::vector<SpatialSample>& points,
                                   const KrigingChoice& choice,
                                   const std::vector<Target>& targets, int variogram_bins,
                                   int max_neighbors, int threads);

/// The 11 interpolated meteorology variables (ws10/wd10/RH derived on the
/// coarse grid first) at arbitrary targets, one variogram fit + one system
/// factorization per variable.
std::map<std::string, std::vector<double>> krige_meteo(const DayInputs& day,
                                                       const PipelineConfig& config,
                                                       const std::vector<Target>& targets);

/// Seasonal (or pooled) Aqua/Terra regression from all coincident pixels of
/// the given days.
MergeCoefficients fit_scene_merge_coefficients(const std::vector<DayInputs>& days,
                                               bool seasonal);

struct PreprocessOutput {
  std::vector<Sample> samples;  // sorted by (date, station_id)
  PreprocessReport report;
  MergeCoefficients coefficients;
};

/// Stage 1: station series cleaning, AOD merge + window extraction, and
/// meteorology kriged to stations; one Sample per usable station-day.
PreprocessOutput build_samples(const std::vector<StationRecord>& stations,
                               const std::vector<DayInputs>& days,
                               const PipelineConfig& config);

/// build_samples over a data directory (all dates found on disk).
PreprocessOutput run_preprocess(const std::filesystem::path& data_dir,
                                const PipelineConfig& config);

struct TrainOutput {
  Model model;
  EvalReport train;
  EvalReport test;
  std::vector<EvalReport> cv_folds;
  ImportanceReport importance;        // tree ensembles only
  bool has_importance = false;
  CorrelationMatrix correlation;
};

/// Stage 2: seeded train/test split, k-fold CV, fit on the training split,
/// metrics on both splits.
TrainOutput run_train(const std::vector<Sample>& samples, const PipelineConfig& config);

std::string to_json_string(const TrainOutput& output);

/// Stage 3: daily maps (pm25_ / provenance_ grids) for every requested date
/// present in the data directory, plus monthly/yearly median aggregates.
MapRunReport run_map(const std::filesystem::path& data_dir, const Model& model,
                     const PipelineConfig& config, const Date& first, const Date& last,
                     const std::filesystem::path& out_dir);

}  // namespace aeromap
