#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aeromap/date.hpp"
#include "aeromap/grid.hpp"
#include "aeromap/preprocess.hpp"

namespace aeromap {

/// Knobs of the synthetic-scene generator. Defaults produce the scene used
/// by the verification suite: a city-scale 1 km grid, coarse (~8 km)
/// meteorology, two correlated AOD sensors with blobby cloud gaps, and a
/// positive latent PM2.5 field driven by normalized AOD, boundary-layer
/// height, humidity and temperature plus a low-blh/high-AOD interaction.
struct SceneParams {
  int n_rows = 36;
  int n_cols = 48;
  double origin_lat = 35.95;
  double origin_lon = 51.10;
  double cell_size = 0.01;
  int coarse_factor = 8;  // meteorology grid is this many fine cells per cell

  int n_stations = 40;
  int n_days = 400;
  Date start_date{2018, 1, 1};

  // Station readings: latent PM_c attenuated by (1 - RH/100), plus noise.
  double obs_noise = 2.0;              // ug/m3, on the attenuated reading
  double station_missing_fraction = 0.08;
  double outlier_fraction = 0.005;     // readings multiplied by outlier_scale
  double outlier_scale = 3.5;

  // AOD sensors. Terra observes the daily latent AOD directly; Aqua is an
  // affine transform of it (per season) plus a smooth structural deviation.
  double aqua_missing_fraction = 0.30;
  double terra_missing_fraction = 0.10;
  double aqua_structural_noise = 0.12;  // std of the Aqua deviation field
  double retrieval_noise = 0.01;        // iid per-pixel sensor noise
  AffineMap terra_to_aqua_cold{0.83, 0.021};
  AffineMap terra_to_aqua_warm{0.81, 0.016};

  // Latent PM_c composition (ug/m3-scale knobs).
  double pm_base = 38.0;
  double pm_naod_gain = 26.0;       // linear response to normalized AOD
  double pm_interaction_gain = 30.0;  // low-blh/high-AOD threshold term
  double pm_rh_gain = 7.0;
  double pm_t2m_gain = -4.0;
  double pm_spatial_gain = 4.0;     // fixed urban pattern
  double pm_residual_noise = 2.0;   // spatially correlated residual std
};

/// One day of generated rasters. Meteorology lives on the coarse grid;
/// everything else on the fine grid. truth_pmc is the latent PM_c field the
/// verification suite compares maps against; truth_aod is the latent daily
/// AOD driving it.
struct SceneDay {
  Date date;
  Raster aod_aqua;
  Raster aod_terra;
  QaRaster qa;
  std::map<std::string, Raster> meteo;  // d2m t2m blh sp lai_hv lai_lv u10 v10 cdir uvb
  Raster truth_pmc;
  Raster truth_aod;
};

struct SyntheticScene {
  SceneParams params;
  std::uint64_t seed = 0;
  GridSpec fine_proto;    // timestamp = start date
  GridSpec coarse_proto;
  std::vector<SceneDay> days;
  std::vector<StationRecord> readings;  // one per station-day, missing allowed
};

/// Pure function of its arguments: the same (params, seed) yields a
/// byte-identical scene.
SyntheticScene generate_synthetic_scene(const SceneParams& params, std::uint64_t seed);

/// Spec'd convenience overload: default params with grid/station/day counts
/// overridden.
SyntheticScene generate_synthetic_scene(const GridSpec& spec, int n_stations, int n_days,
                                        std::uint64_t seed);

/// Writes `<variable>_<date>.grid` rasters (including truth_pmc/truth_aod),
/// `stations.csv`, and `scene_truth.json` (generator affine maps and knobs).
void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace aeromap
