#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aeromap/date.hpp"
#include "aeromap/grid.hpp"

namespace aeromap {

/// Raw coarse-grid meteorology variables expected per day on disk.
extern const std::vector<std::string> kRawMeteoVariables;

/// Variables interpolated to points after ws10/wd10/RH derivation.
extern const std::vector<std::string> kKrigedMeteoVariables;

/// Everything loadable for one date from a data directory.
struct DayInputs {
  Date date;
  Raster aod_aqua;
  Raster aod_terra;
  QaRaster qa;
  std::map<std::string, Raster> meteo;  // coarse grid, raw variables
};

/// Dates for which `aod_aqua_<date>.grid` exists, sorted ascending.
std::vector<Date> scan_dates(const std::filesystem::path& dir);

DayInputs load_day(const std::filesystem::path& dir, const Date& date);

std::filesystem::path grid_path(const std::filesystem::path& dir, const std::string& variable,
                                const Date& date);

}  // namespace aeromap
