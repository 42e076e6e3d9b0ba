#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aeromap/grid.hpp"
#include "aeromap/sample.hpp"

namespace aeromap {

// `.grid` format: seven header lines (`nrows`, `ncols`, `origin_lat`,
// `origin_lon`, `cell_size`, `date`, `variable`), then n_rows lines of
// whitespace-separated row-major values with `NA` for missing. Values are
// written with 6 significant digits; write(read(f)) == f for files this
// library wrote.

Raster read_raster(const std::filesystem::path& path);
void write_raster(const Raster& raster, const std::filesystem::path& path);

/// QA planes travel as three integer-coded `.grid` files
/// (qa_cloud / qa_adjacency / qa_quality); codes match the enum values.
QaRaster read_qa(const std::filesystem::path& cloud_path,
                 const std::filesystem::path& adjacency_path,
                 const std::filesystem::path& quality_path);
void write_qa(const QaRaster& qa, const std::filesystem::path& cloud_path,
              const std::filesystem::path& adjacency_path,
              const std::filesystem::path& quality_path);

// `stations.csv`: header `station_id,lat,lon,date,pm25`; one row per
// station-day; empty pm25 field = missing. Duplicate (station_id, date)
// pairs and negative pm25 are rejected.

std::vector<StationRecord> read_stations(const std::filesystem::path& path);
void write_stations(const std::vector<StationRecord>& records,
                    const std::filesystem::path& path);

// `samples.csv`: header `station_id,date,<19 feature names>,PM_c`; written
// with 12 significant digits (the preprocess -> train handoff keeps more
// precision than display formats need).

std::vector<Sample> read_samples(const std::filesystem::path& path);
void write_samples(const std::vector<Sample>& samples, const std::filesystem::path& path);

}  // namespace aeromap
