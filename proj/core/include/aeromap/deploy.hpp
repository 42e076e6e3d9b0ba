#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeromap/config.hpp"
#include "aeromap/dataset.hpp"
#include "aeromap/model.hpp"

namespace aeromap {

/// A PM2.5 value at a grid cell, either modeled from a valid AOD window
/// (quasi-station) or a humidity-corrected ground measurement.
struct QuasiStation {
  double lat = 0.0;
  double lon = 0.0;
  Date date;
  double pm25_est = 0.0;  // >= 0, negative model outputs are clamped
  enum class Source { Model, Ground } source = Source::Model;
};

enum class Provenance { ModelDirect = 0, Interpolated = 1 };

/// Gap-free daily PM2.5 map plus per-cell provenance.
struct DailyMap {
  Raster pm25;
  Raster provenance;  // numeric codes per Provenance
  std::size_t n_quasi = 0;
  std::size_t n_ground = 0;
};

/// Applies the fitted model at every cell with a valid AOD window,
/// assembling the full predictor vector (meteorology kriged to cells once
/// per variable per day, calendar and position from the grid). Negative
/// predictions are clamped to zero and counted.
std::vector<QuasiStation> predict_grid(const Model& model, const DayInputs& day,
                                       const MergeCoefficients& coeffs,
                                       const PipelineConfig& config,
                                       std::size_t* clamped_count = nullptr);

/// Kriges the quasi/ground union onto every grid cell. Ground stations win
/// over co-located quasi-stations; cells hosting a (surviving)
/// quasi-station keep the model estimate and are marked ModelDirect.
/// Requires >= 2 distinct locations.
DailyMap fuse_and_interpolate(const std::vector<QuasiStation>& quasi,
                              const std::vector<QuasiStation>& ground,
                              const GridSpec& grid, const PipelineConfig& config);

enum class Period { Month, Year };

/// Per-cell median of the daily maps that fall in each month/year present.
/// Returned labels are "YYYY-MM" or "YYYY".
std::vector<std::pair<std::string, Raster>> aggregate_maps(const std::vector<Raster>& daily,
                                                           Period period);

/// Banded category raster (codes 0..n) from configured PM2.5 breakpoints.
Raster classify_aqi_band(const Raster& pm25, const std::vector<double>& thresholds);

struct MapRunReport {
  std::size_t days_mapped = 0;
  std::size_t days_skipped = 0;  // missing inputs
  std::size_t total_quasi = 0;
  std::size_t total_ground = 0;
  std::size_t clamped_negative = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
};

std::string to_json_string(const MapRunReport& report);

}  // namespace aeromap
