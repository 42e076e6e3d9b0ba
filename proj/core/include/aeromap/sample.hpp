#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeromap/date.hpp"

namespace aeromap {

/// The 19 predictors, in canonical column order.
inline constexpr std::size_t kNumFeatures = 19;

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "AODm",   "nAODm", "Prob_bestm", "Prob_medm", "lat",  "long", "d2m",
    "t2m",    "blh",   "sp",         "lai_hv",    "lai_lv", "ws10", "wd10",
    "cdir",   "uvb",   "RH",         "month",     "DOY"};

/// Index of a canonical feature name, nullopt for unknown names.
std::optional<std::size_t> feature_index(std::string_view name);

/// One model-ready row: the Table-style predictor vector joined to the
/// humidity-corrected PM2.5 target.
struct Sample {
  std::string station_id;
  Date date;
  std::array<double, kNumFeatures> features{};
  double target = 0.0;  // PM_c, ug/m3

  double feature(std::size_t i) const { return features[i]; }
};

/// Column-named feature matrix used by model prediction. Rows are
/// observations; column order is whatever the producer chose, lookup is by
/// name. Extra columns are allowed and ignored by models.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // columns[c][r]

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t n_cols() const { return names.size(); }

  std::optional<std::size_t> column_index(std::string_view name) const;

  static FeatureTable from_samples(const std::vector<Sample>& samples);
};

/// Targets of a sample list, in order.
std::vector<double> targets_of(const std::vector<Sample>& samples);

}  // namespace aeromap
