#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aeromap/date.hpp"
#include "aeromap/grid.hpp"
#include "aeromap/sample.hpp"

namespace aeromap {

/// Humidity correction of a dry-instrument PM reading:
/// PM_c = pm / (1 - rh/100). Monotone increasing in rh, identity at rh = 0.
/// rh >= 100 (the singularity) and rh < 0 are domain errors, as is pm < 0.
double correct_pm(double pm, double rh);

enum class OutlierMethod { IQR, ThreeSigma };

const char* to_string(OutlierMethod m);
OutlierMethod outlier_method_from_string(const std::string& s);

/// Returns indices of values kept by one filtering pass; bounds come from
/// the original input (single-pass semantics). IQR keeps values strictly
/// inside (Q1 - IQR, Q3 + IQR) with type-7 quantiles; ThreeSigma keeps
/// values strictly inside mu +- 3 sigma (sample standard deviation).
/// When every value is identical the whole set is kept: zero spread is no
/// evidence of outliers and the strict inequalities would discard all of it.
std::vector<std::size_t> filter_outliers(const std::vector<double>& values,
                                         OutlierMethod method);

/// AOD extracted over a window centered at a station cell, plus the
/// QA-derived probability features.
struct WindowExtract {
  bool valid = false;
  double aod_mean = kMissing;
  double aod_std = 0.0;   // sample standard deviation of the valid pixels
  int n_valid = 0;        // pixels with non-missing AOD in the window
  double prob_med = 0.0;  // share of window pixels passing Condition 1
  double prob_best = 0.0; // share of window pixels passing Condition 2
};

/// Condition 1: adjacency NormalClear and cloud Clear-or-PossiblyCloudy.
/// Condition 2: adjacency NormalClear, cloud Clear, AOD quality Best.
/// The probability denominator is the full window area; out-of-grid cells
/// count as missing. The extract is invalid (not an error) when
/// n_valid <= min_valid_pixels or the sample std exceeds std_threshold.
WindowExtract extract_aod_window(const Raster& aod, const QaRaster& qa, CellIndex center,
                                 int window_size, int min_valid_pixels = 3,
                                 double std_threshold = 0.5);

/// nAOD = AOD / PBLH (per meter). pblh <= 0 is a domain error.
double normalize_aod(double aod, double pblh_m);

struct AffineMap {
  double slope = 1.0;
  double intercept = 0.0;
  double apply(double x) const { return slope * x + intercept; }
};

/// Season-stratified OLS fits between coincident Aqua and Terra AODs, both
/// directions, plus the pooled fit. r2 is the squared Pearson correlation.
struct SeasonalFit {
  AffineMap terra_to_aqua;
  AffineMap aqua_to_terra;
  double r2 = 0.0;
  std::size_t n_pairs = 0;
};

struct MergeCoefficients {
  SeasonalFit warm;
  SeasonalFit cold;
  SeasonalFit pooled;

  const SeasonalFit& for_season(Season s) const {
    return s == Season::Warm ? warm : cold;
  }
};

struct AodPair {
  double aqua = 0.0;
  double terra = 0.0;
  Date date;
};

/// Needs >= 2 pairs with distinct regressor values per season.
MergeCoefficients fit_merge_coefficients(const std::vector<AodPair>& pairs);

/// One unstratified both-directions fit (used for the pooled row and as the
/// single-season fallback).
SeasonalFit fit_aod_pairs(const std::vector<double>& aqua, const std::vector<double>& terra);

/// Daily AOD from the two overpasses: mean when both are present, seasonal
/// affine imputation of the absent sensor when one is present, missing when
/// neither is.
double merge_aqua_terra(double aqua, double terra, Season season,
                        const MergeCoefficients& coeffs);

struct MergeCounts {
  std::size_t imputed_aqua_warm = 0;
  std::size_t imputed_aqua_cold = 0;
  std::size_t imputed_terra_warm = 0;
  std::size_t imputed_terra_cold = 0;
};

/// Cell-wise merge of two join-compatible AOD rasters.
Raster merge_aod_rasters(const Raster& aqua, const Raster& terra,
                         const MergeCoefficients& coeffs, MergeCounts* counts = nullptr);

/// ws10/wd10 from wind components (meteorological from-direction, degrees
/// [0,360)), RH from dewpoint and temperature (Kelvin in, percent out,
/// Magnus formula, clamped to [0, 99.9]).
struct DerivedMeteo {
  double ws10 = 0.0;
  double wd10 = 0.0;
  double rh = 0.0;
};

DerivedMeteo derive_meteo_features(double u10, double v10, double d2m_k, double t2m_k);

double wind_speed(double u10, double v10);
double wind_direction_deg(double u10, double v10);
double relative_humidity(double d2m_k, double t2m_k);

/// Counters surfaced by the preprocessing stage.
struct PreprocessReport {
  std::size_t n_stations = 0;
  std::size_t n_dates = 0;
  std::size_t station_days_with_pm = 0;
  std::size_t dropped_outliers = 0;
  std::size_t invalid_windows = 0;
  std::size_t dropped_missing_features = 0;
  std::size_t dates_skipped = 0;
  std::size_t samples_built = 0;
  MergeCounts merge;
  MergeCoefficients merge_coefficients;
};

std::string to_json_string(const PreprocessReport& report);

}  // namespace aeromap
