#include "aeromap/grid.hpp"

#include <cmath>

#include "aeromap/sample.hpp"

namespace aeromap {

std::pair<double, double> center_of(const GridSpec& spec, int row, int col) {
  return {lat_of_row(spec, row), lon_of_col(spec, col)};
}

std::optional<CellIndex> cell_of(const GridSpec& spec, double lat, double lon) {
  // lround ties away from zero, so a point exactly half a cell outside the
  // first/last center lands outside the index range rather than clamping.
  long row = std::lround((spec.origin_lat - lat) / spec.cell_size);
  long col = std::lround((lon - spec.origin_lon) / spec.cell_size);
  if (row < 0 || row >= spec.n_rows || col < 0 || col >= spec.n_cols) return std::nullopt;
  return CellIndex{static_cast<int>(row), static_cast<int>(col)};
}

std::size_t Raster::missing_count() const {
  std::size_t n = 0;
  for (double v : values) n += is_missing(v);
  return n;
}

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> FeatureTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

FeatureTable FeatureTable::from_samples(const std::vector<Sample>& samples) {
  FeatureTable table;
  table.names.assign(kFeatureNames.begin(), kFeatureNames.end());
  table.columns.assign(kNumFeatures, std::vector<double>(samples.size()));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (std::size_t c = 0; c < kNumFeatures; ++c) {
      table.columns[c][r] = samples[r].features[c];
    }
  }
  return table;
}

std::vector<double> targets_of(const std::vector<Sample>& samples) {
  std::vector<double> y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) y[i] = samples[i].target;
  return y;
}

}  // namespace aeromap
