#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aeromap/date.hpp"

namespace aeromap {

/// Sentinel for missing raster values. Stored as quiet NaN in memory and as
/// the literal token `NA` on disk.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Georeferenced regular grid. origin_lat/origin_lon are the *cell center*
/// of (row 0, col 0); latitude decreases with row index (north-up raster).
struct GridSpec {
  int n_rows = 0;
  int n_cols = 0;
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  double cell_size = 0.0;  // degrees, uniform in both axes
  Date timestamp;

  bool is_valid() const {
    return n_rows >= 1 && n_cols >= 1 && cell_size > 0.0;
  }

  std::size_t n_cells() const {
    return static_cast<std::size_t>(n_rows) * static_cast<std::size_t>(n_cols);
  }

  /// Two grids can be joined cell-by-cell iff all spatial fields agree;
  /// the timestamp is deliberately excluded.
  bool join_compatible(const GridSpec& other) const {
    return n_rows == other.n_rows && n_cols == other.n_cols &&
           origin_lat == other.origin_lat && origin_lon == other.origin_lon &&
           cell_size == other.cell_size;
  }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < n_rows && col >= 0 && col < n_cols;
  }
};

/// Latitude/longitude of a cell center.
inline double lat_of_row(const GridSpec& spec, int row) {
  return spec.origin_lat - row * spec.cell_size;
}
inline double lon_of_col(const GridSpec& spec, int col) {
  return spec.origin_lon + col * spec.cell_size;
}
std::pair<double, double> center_of(const GridSpec& spec, int row, int col);

/// Nearest-cell-center mapping. Points that round outside the grid return
/// nullopt; they are never clamped onto the edge.
std::optional<CellIndex> cell_of(const GridSpec& spec, double lat, double lon);

/// One gridded variable at one timestamp, row-major, NaN = missing.
struct Raster {
  GridSpec spec;
  std::string variable;  // e.g. "aod_aqua", "blh"
  std::vector<double> values;

  Raster() = default;
  Raster(GridSpec s, std::string var, double fill = kMissing)
      : spec(s), variable(std::move(var)), values(s.n_cells(), fill) {}

  double& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * spec.n_cols + col];
  }
  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * spec.n_cols + col];
  }

  std::size_t missing_count() const;
};

enum class CloudMask : std::uint8_t { Clear = 0, PossiblyCloudy = 1, Cloudy = 2, Missing = 3 };
enum class AdjacencyMask : std::uint8_t { NormalClear = 0, Adjacent = 1, Missing = 2 };
enum class AodQuality : std::uint8_t { Best = 0, Medium = 1, Low = 2, Missing = 3 };

/// Per-pixel quality planes accompanying a daily AOD raster.
struct QaRaster {
  GridSpec spec;
  std::vector<CloudMask> cloud;
  std::vector<AdjacencyMask> adjacency;
  std::vector<AodQuality> aod_quality;

  QaRaster() = default;
  explicit QaRaster(GridSpec s)
      : spec(s),
        cloud(s.n_cells(), CloudMask::Missing),
        adjacency(s.n_cells(), AdjacencyMask::Missing),
        aod_quality(s.n_cells(), AodQuality::Missing) {}

  std::size_t idx(int row, int col) const {
    return static_cast<std::size_t>(row) * spec.n_cols + col;
  }
};

/// One ground station's daily mean PM2.5. pm25 is missing (NaN) when fewer
/// than 80% of the hourly readings were valid; that screening happens at the
/// data source, the reader only honors the empty field.
struct StationRecord {
  std::string station_id;
  double lat = 0.0;
  double lon = 0.0;
  Date date;
  double pm25 = kMissing;  // ug/m3, >= 0 when present

  bool has_pm25() const { return !is_missing(pm25); }
};

}  // namespace aeromap
