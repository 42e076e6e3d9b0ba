#include "aeromap/dataset.hpp"

#include <algorithm>

#include "aeromap/errors.hpp"
#include "aeromap/raster_io.hpp"

namespace aeromap {

const std::vector<std::string> kRawMeteoVariables = {
    "d2m", "t2m", "blh", "sp", "lai_hv", "lai_lv", "u10", "v10", "cdir", "uvb"};

const std::vector<std::string> kKrigedMeteoVariables = {
    "d2m", "t2m", "blh", "sp", "lai_hv", "lai_lv", "ws10", "wd10", "cdir", "uvb", "RH"};

std::filesystem::path grid_path(const std::filesystem::path& dir, const std::string& variable,
                                const Date& date) {
  return dir / (variable + "_" + date.to_string() + ".grid");
}

std::vector<Date> scan_dates(const std::filesystem::path& dir) {
  std::vector<Date> dates;
  if (!std::filesystem::is_directory(dir)) {
    throw Error("data directory '" + dir.string() + "' does not exist");
  }
  const std::string prefix = "aod_aqua_";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() != prefix.size() + 15 || name.rfind(prefix, 0) != 0 ||
        name.substr(name.size() - 5) != ".grid") {
      continue;
    }
    dates.push_back(Date::parse(name.substr(prefix.size(), 10)));
  }
  std::sort(dates.begin(), dates.end());
  return dates;
}

DayInputs load_day(const std::filesystem::path& dir, const Date& date) {
  DayInputs day;
  day.date = date;
  day.aod_aqua = read_raster(grid_path(dir, "aod_aqua", date));
  day.aod_terra = read_raster(grid_path(dir, "aod_terra", date));
  day.qa = read_qa(grid_path(dir, "qa_cloud", date), grid_path(dir, "qa_adjacency", date),
                   grid_path(dir, "qa_quality", date));
  if (!day.aod_aqua.spec.join_compatible(day.aod_terra.spec) ||
      !day.aod_aqua.spec.join_compatible(day.qa.spec)) {
    throw Error("AOD/QA grids for " + date.to_string() + " are not join-compatible");
  }
  for (const std::string& var : kRawMeteoVariables) {
    day.meteo.emplace(var, read_raster(grid_path(dir, var, date)));
  }
  const GridSpec& coarse = day.meteo.begin()->second.spec;
  for (const auto& [var, raster] : day.meteo) {
    if (!raster.spec.join_compatible(coarse)) {
      throw Error("meteorology grid '" + var + "' for " + date.to_string() +
                  " is not join-compatible with the others");
    }
  }
  return day;
}

}  // namespace aeromap
