#include "aeromap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "aeromap/dataset.hpp"
#include "aeromap/errors.hpp"
#include "aeromap/raster_io.hpp"
#include "aeromap/rng.hpp"

namespace aeromap {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Smooth random field as a sum of cosine modes over normalized scene
/// coordinates; approximately zero mean, unit variance.
class CosField {
 public:
  CosField() = default;
  CosField(Rng& rng, int n_modes, double min_freq, double max_freq) {
    modes_.reserve(static_cast<std::size_t>(n_modes));
    const double amp = std::sqrt(2.0 / n_modes);
    for (int k = 0; k < n_modes; ++k) {
      const double freq = rng.uniform(min_freq, max_freq);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      modes_.push_back({freq * std::cos(angle), freq * std::sin(angle),
                        rng.uniform(0.0, 2.0 * std::numbers::pi), amp * rng.normal()});
    }
  }

  double at(double xn, double yn) const {
    double v = 0.0;
    for (const Mode& m : modes_) {
      v += m.amp * std::cos(2.0 * std::numbers::pi * (m.fx * xn + m.fy * yn) + m.phase);
    }
    return v;
  }

 private:
  struct Mode {
    double fx, fy, phase, amp;
  };
  std::vector<Mode> modes_;
};

CosField make_field(std::uint64_t seed, std::string_view tag, std::uint64_t index,
                    int n_modes, double min_freq, double max_freq) {
  Rng rng(derive_seed(seed, tag, index));
  return CosField(rng, n_modes, min_freq, max_freq);
}

struct DayScalars {
  double z_aod, z_blh, z_t, z_dep, z_sp, z_u, z_v, z_cloud, z_lai, z_cdir;
};

DayScalars day_scalars(std::uint64_t seed, std::uint64_t day) {
  Rng rng(derive_seed(seed, "day-scalars", day));
  DayScalars z;
  z.z_aod = rng.normal();
  z.z_blh = rng.normal();
  z.z_t = rng.normal();
  z.z_dep = rng.normal();
  z.z_sp = rng.normal();
  z.z_u = rng.normal();
  z.z_v = rng.normal();
  z.z_cloud = rng.normal();
  z.z_lai = rng.normal();
  z.z_cdir = rng.normal();
  return z;
}

double gaussian_tail_threshold(double fraction) {
  // Inverse normal CDF (Acklam's rational approximation); plenty accurate
  // for turning a missing fraction into a field threshold.
  const double p = std::clamp(1.0 - fraction, 1e-6, 1.0 - 1e-6);
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

struct SceneStatics {
  CosField urban, alt, veg, veg2;
};

/// Analytic weather/aerosol state, evaluable at any scene coordinate so the
/// coarse rasters and the fine-grid truth come from the same functions.
struct DayState {
  const SceneParams& p;
  const SceneStatics& s;
  DayScalars z;
  int doy;
  Season season;
  CosField blob_aod, eta, cloud_common, cloud_aqua, cloud_terra;
  CosField spat_blh, spat_t, spat_dep, spat_sp, spat_u, spat_v, resid_pm;

  double season_phase(double peak_doy) const {
    return std::sin(2.0 * std::numbers::pi * (doy - peak_doy + 91.25) / 365.25);
  }

  double aod_truth(double xn, double yn) const {
    // Higher base level in the cold season (trapped pollution).
    const double mu = season_phase(196) * -0.18 + std::log(0.32);
    const double base = std::exp(mu + 0.30 * z.z_aod);
    const double v = base * (1.0 + 0.40 * s.urban.at(xn, yn) + 0.50 * blob_aod.at(xn, yn));
    return std::clamp(v, 0.02, 3.0);
  }

  double aqua_truth(double xn, double yn) const {
    const AffineMap& map =
        season == Season::Cold ? p.terra_to_aqua_cold : p.terra_to_aqua_warm;
    return std::max(0.001, map.apply(aod_truth(xn, yn)) +
                               p.aqua_structural_noise * eta.at(xn, yn));
  }

  double blh(double xn, double yn) const {
    const double raw = -0.25 + 0.95 * season_phase(196) + 0.55 * z.z_blh +
                       0.75 * spat_blh.at(xn, yn);
    return 250.0 + 1750.0 * sigmoid(raw);
  }

  double t2m(double xn, double yn) const {
    return 288.15 + 11.0 * season_phase(196) + 2.2 * z.z_t + 1.4 * spat_t.at(xn, yn) -
           2.0 * s.alt.at(xn, yn);
  }

  double dew_depression(double xn, double yn) const {
    const double raw = 9.0 + 3.0 * season_phase(196) + 2.8 * z.z_dep +
                       1.8 * spat_dep.at(xn, yn);
    return std::max(1.5, raw);
  }

  double d2m(double xn, double yn) const { return t2m(xn, yn) - dew_depression(xn, yn); }

  double rh(double xn, double yn) const {
    return relative_humidity(d2m(xn, yn), t2m(xn, yn));
  }

  double sp(double xn, double yn) const {
    return 86000.0 - 4000.0 * s.alt.at(xn, yn) + 320.0 * z.z_sp +
           140.0 * spat_sp.at(xn, yn);
  }

  double lai_hv(double xn, double yn) const {
    return std::max(0.05, 1.20 + 0.90 * season_phase(196) + 0.35 * s.veg.at(xn, yn) +
                              0.08 * z.z_lai);
  }

  double lai_lv(double xn, double yn) const {
    return std::max(0.02, 0.25 + 0.60 * lai_hv(xn, yn) + 0.12 * s.veg2.at(xn, yn));
  }

  double u10(double xn, double yn) const {
    return 2.0 + 2.1 * z.z_u + 1.1 * spat_u.at(xn, yn);
  }

  double v10(double xn, double yn) const {
    return 0.8 + 1.9 * z.z_v + 1.1 * spat_v.at(xn, yn);
  }

  double cdir(double xn, double yn) const {
    return std::max(0.5e6, 1.45e7 + 0.95e7 * season_phase(172) + 0.5e6 * z.z_cdir +
                               0.3e6 * spat_sp.at(yn, xn));
  }

  double uvb(double xn, double yn) const { return 0.042 * cdir(xn, yn) + 2.0e4; }

  double pm_c(double xn, double yn) const {
    const double naod_km = 1000.0 * aod_truth(xn, yn) / blh(xn, yn);
    const double interaction = std::max(0.0, naod_km - 0.45) *
                               sigmoid((650.0 - blh(xn, yn)) / 120.0);
    double pm = p.pm_base;
    pm += p.pm_naod_gain * (naod_km - 0.35);
    pm += p.pm_interaction_gain * interaction;
    pm += p.pm_rh_gain * (rh(xn, yn) - 40.0) / 25.0;
    pm += p.pm_t2m_gain * (t2m(xn, yn) - 288.0) / 10.0;
    pm += p.pm_spatial_gain * s.urban.at(xn, yn);
    pm += p.pm_residual_noise * resid_pm.at(xn, yn);
    return std::max(2.0, pm);
  }
};

DayState make_day_state(const SceneParams& p, const SceneStatics& s, std::uint64_t seed,
                        std::uint64_t day, const Date& date) {
  DayState st{p,
              s,
              day_scalars(seed, day),
              date.day_of_year(),
              season_of(date),
              make_field(seed, "blob-aod", day, 14, 0.6, 2.8),
              make_field(seed, "aqua-eta", day, 12, 0.5, 2.2),
              make_field(seed, "cloud-common", day, 14, 0.5, 2.5),
              make_field(seed, "cloud-aqua", day, 12, 0.8, 3.0),
              make_field(seed, "cloud-terra", day, 12, 0.8, 3.0),
              make_field(seed, "spat-blh", day, 12, 0.4, 1.6),
              make_field(seed, "spat-t", day, 10, 0.4, 1.5),
              make_field(seed, "spat-dep", day, 10, 0.4, 1.6),
              make_field(seed, "spat-sp", day, 8, 0.3, 1.2),
              make_field(seed, "spat-u", day, 8, 0.4, 1.5),
              make_field(seed, "spat-v", day, 8, 0.4, 1.5),
              make_field(seed, "resid-pm", day, 14, 0.8, 3.0)};
  return st;
}

}  // namespace

SyntheticScene generate_synthetic_scene(const SceneParams& params, std::uint64_t seed) {
  if (params.n_stations < 2) throw Error("generate_synthetic_scene: need >= 2 stations");
  if (params.n_days < 1) throw Error("generate_synthetic_scene: need >= 1 day");
  if (params.n_rows < 4 || params.n_cols < 4) {
    throw Error("generate_synthetic_scene: grid too small");
  }

  SyntheticScene scene;
  scene.params = params;
  scene.seed = seed;

  scene.fine_proto = GridSpec{params.n_rows, params.n_cols, params.origin_lat,
                              params.origin_lon, params.cell_size, params.start_date};
  const int factor = std::max(1, params.coarse_factor);
  const int coarse_rows = (params.n_rows + factor - 1) / factor;
  const int coarse_cols = (params.n_cols + factor - 1) / factor;
  scene.coarse_proto =
      GridSpec{coarse_rows, coarse_cols,
               params.origin_lat - 0.5 * (factor - 1) * params.cell_size,
               params.origin_lon + 0.5 * (factor - 1) * params.cell_size,
               params.cell_size * factor, params.start_date};

  SceneStatics statics{
      [&] {
        Rng rng(derive_seed(seed, "urban"));
        return CosField(rng, 10, 0.6, 2.2);
      }(),
      [&] {
        Rng rng(derive_seed(seed, "altitude"));
        return CosField(rng, 8, 0.4, 1.4);
      }(),
      [&] {
        Rng rng(derive_seed(seed, "vegetation"));
        return CosField(rng, 8, 0.5, 1.8);
      }(),
      [&] {
        Rng rng(derive_seed(seed, "vegetation-2"));
        return CosField(rng, 8, 0.5, 1.8);
      }()};

  const double extent_lat = (params.n_rows - 1) * params.cell_size;
  const double extent_lon = (params.n_cols - 1) * params.cell_size;
  auto norm_x = [&](double lat) {
    return extent_lat == 0.0 ? 0.0 : (params.origin_lat - lat) / extent_lat;
  };
  auto norm_y = [&](double lon) {
    return extent_lon == 0.0 ? 0.0 : (lon - params.origin_lon) / extent_lon;
  };

  // Station placement: distinct cells, kept a couple of cells apart.
  std::vector<CellIndex> station_cells;
  {
    Rng rng(derive_seed(seed, "stations"));
    std::set<std::pair<int, int>> used;
    int attempts = 0;
    while (static_cast<int>(station_cells.size()) < params.n_stations) {
      if (++attempts > 100000) {
        throw Error("generate_synthetic_scene: could not place stations");
      }
      const int r = 1 + static_cast<int>(rng.below(params.n_rows - 2));
      const int c = 1 + static_cast<int>(rng.below(params.n_cols - 2));
      bool ok = true;
      for (const auto& [ur, uc] : used) {
        if (std::abs(ur - r) <= 1 && std::abs(uc - c) <= 1) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      used.emplace(r, c);
      station_cells.push_back({r, c});
    }
  }

  const double aqua_thr = gaussian_tail_threshold(params.aqua_missing_fraction);
  const double terra_thr = gaussian_tail_threshold(params.terra_missing_fraction);

  std::vector<std::vector<double>> rh_at_station(
      static_cast<std::size_t>(params.n_days),
      std::vector<double>(static_cast<std::size_t>(params.n_stations)));

  scene.days.reserve(static_cast<std::size_t>(params.n_days));
  for (int day = 0; day < params.n_days; ++day) {
    const Date date = params.start_date.plus_days(day);
    const DayState st =
        make_day_state(params, statics, seed, static_cast<std::uint64_t>(day), date);

    SceneDay out;
    out.date = date;
    GridSpec fine = scene.fine_proto;
    fine.timestamp = date;
    GridSpec coarse = scene.coarse_proto;
    coarse.timestamp = date;

    out.aod_aqua = Raster(fine, "aod_aqua");
    out.aod_terra = Raster(fine, "aod_terra");
    out.qa = QaRaster(fine);
    out.truth_pmc = Raster(fine, "truth_pmc");
    out.truth_aod = Raster(fine, "truth_aod");

    Rng retrieval(derive_seed(seed, "retrieval-noise", static_cast<std::uint64_t>(day)));
    Rng qa_rng(derive_seed(seed, "qa-draw", static_cast<std::uint64_t>(day)));

    std::vector<char> miss_a(fine.n_cells()), miss_t(fine.n_cells());
    for (int r = 0; r < fine.n_rows; ++r) {
      for (int c = 0; c < fine.n_cols; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * fine.n_cols + c;
        const auto [lat, lon] = center_of(fine, r, c);
        const double xn = norm_x(lat), yn = norm_y(lon);

        const double common = st.cloud_common.at(xn, yn) + 0.45 * st.z.z_cloud;
        const double cloud_a = 0.76 * common + 0.65 * st.cloud_aqua.at(xn, yn);
        const double cloud_t = 0.76 * common + 0.65 * st.cloud_terra.at(xn, yn);
        miss_a[i] = cloud_a > aqua_thr;
        miss_t[i] = cloud_t > terra_thr;

        const double truth_t = st.aod_truth(xn, yn);
        const double truth_a = st.aqua_truth(xn, yn);
        out.truth_aod.values[i] = truth_t;  // latent daily AOD (Terra-calibrated)
        out.truth_pmc.values[i] = st.pm_c(xn, yn);

        // Retrieval noise is drawn unconditionally to keep the stream
        // aligned regardless of the masks.
        const double noise_a = retrieval.normal(0.0, params.retrieval_noise);
        const double noise_t = retrieval.normal(0.0, params.retrieval_noise);
        if (!miss_a[i]) out.aod_aqua.values[i] = std::max(0.001, truth_a + noise_a);
        if (!miss_t[i]) out.aod_terra.values[i] = std::max(0.001, truth_t + noise_t);
      }
    }

    // QA planes from the miss masks.
    for (int r = 0; r < fine.n_rows; ++r) {
      for (int c = 0; c < fine.n_cols; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * fine.n_cols + c;
        const double u = qa_rng.uniform();  // one draw per pixel, fixed order
        const bool both_missing = miss_a[i] && miss_t[i];
        const bool one_missing = miss_a[i] != miss_t[i];
        if (both_missing) {
          out.qa.cloud[i] = CloudMask::Cloudy;
          out.qa.adjacency[i] = AdjacencyMask::Missing;
          out.qa.aod_quality[i] = AodQuality::Missing;
          continue;
        }
        out.qa.cloud[i] = one_missing ? CloudMask::PossiblyCloudy
                          : (u < 0.92 ? CloudMask::Clear : CloudMask::PossiblyCloudy);
        bool adjacent = false;
        for (int dr = -2; dr <= 2 && !adjacent; ++dr) {
          for (int dc = -2; dc <= 2 && !adjacent; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (!fine.in_bounds(rr, cc)) continue;
            const std::size_t k = static_cast<std::size_t>(rr) * fine.n_cols + cc;
            adjacent = miss_a[k] && miss_t[k];
          }
        }
        out.qa.adjacency[i] = adjacent ? AdjacencyMask::Adjacent : AdjacencyMask::NormalClear;
        if (out.qa.cloud[i] == CloudMask::Clear) {
          out.qa.aod_quality[i] =
              u < 0.75 ? AodQuality::Best : (u < 0.92 ? AodQuality::Medium : AodQuality::Low);
        } else {
          out.qa.aod_quality[i] = u < 0.5 ? AodQuality::Medium : AodQuality::Low;
        }
      }
    }

    // Coarse meteorology sampled from the same analytic state.
    for (const std::string& var : kRawMeteoVariables) {
      Raster raster(coarse, var);
      for (int r = 0; r < coarse.n_rows; ++r) {
        for (int c = 0; c < coarse.n_cols; ++c) {
          const auto [lat, lon] = center_of(coarse, r, c);
          const double xn = norm_x(lat), yn = norm_y(lon);
          double v = 0.0;
          if (var == "d2m") v = st.d2m(xn, yn);
          else if (var == "t2m") v = st.t2m(xn, yn);
          else if (var == "blh") v = st.blh(xn, yn);
          else if (var == "sp") v = st.sp(xn, yn);
          else if (var == "lai_hv") v = st.lai_hv(xn, yn);
          else if (var == "lai_lv") v = st.lai_lv(xn, yn);
          else if (var == "u10") v = st.u10(xn, yn);
          else if (var == "v10") v = st.v10(xn, yn);
          else if (var == "cdir") v = st.cdir(xn, yn);
          else if (var == "uvb") v = st.uvb(xn, yn);
          raster.at(r, c) = v;
        }
      }
      out.meteo.emplace(var, std::move(raster));
    }

    for (int s_idx = 0; s_idx < params.n_stations; ++s_idx) {
      const auto [lat, lon] = center_of(fine, station_cells[s_idx].row,
                                        station_cells[s_idx].col);
      rh_at_station[day][s_idx] = st.rh(norm_x(lat), norm_y(lon));
    }

    scene.days.push_back(std::move(out));
  }

  // Station readings: latent PM_c attenuated back to instrument units plus
  // noise, occasional outages and spikes.
  for (int s_idx = 0; s_idx < params.n_stations; ++s_idx) {
    Rng rng(derive_seed(seed, "station", static_cast<std::uint64_t>(s_idx)));
    const CellIndex cell = station_cells[static_cast<std::size_t>(s_idx)];
    const auto [lat, lon] = center_of(scene.fine_proto, cell.row, cell.col);
    char id[16];
    std::snprintf(id, sizeof(id), "S%03d", s_idx + 1);

    for (int day = 0; day < params.n_days; ++day) {
      const SceneDay& sd = scene.days[static_cast<std::size_t>(day)];
      StationRecord rec;
      rec.station_id = id;
      rec.lat = lat;
      rec.lon = lon;
      rec.date = sd.date;

      // Fixed three draws per station-day keeps the stream aligned.
      const double u_missing = rng.uniform();
      const double noise = rng.normal(0.0, params.obs_noise);
      const double u_outlier = rng.uniform();

      if (u_missing >= params.station_missing_fraction) {
        const std::size_t i = static_cast<std::size_t>(cell.row) *
                                  scene.fine_proto.n_cols + cell.col;
        const double pmc = sd.truth_pmc.values[i];
        const double rh = rh_at_station[day][s_idx];
        double reading = pmc * (1.0 - rh / 100.0) + noise;
        if (u_outlier < params.outlier_fraction) reading *= params.outlier_scale;
        rec.pm25 = std::max(0.0, reading);
      }
      scene.readings.push_back(std::move(rec));
    }
  }

  return scene;
}

SyntheticScene generate_synthetic_scene(const GridSpec& spec, int n_stations, int n_days,
                                        std::uint64_t seed) {
  SceneParams params;
  params.n_rows = spec.n_rows;
  params.n_cols = spec.n_cols;
  params.origin_lat = spec.origin_lat;
  params.origin_lon = spec.origin_lon;
  params.cell_size = spec.cell_size;
  params.start_date = spec.timestamp;
  params.n_stations = n_stations;
  params.n_days = n_days;
  return generate_synthetic_scene(params, seed);
}

void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const SceneDay& day : scene.days) {
    write_raster(day.aod_aqua, grid_path(dir, "aod_aqua", day.date));
    write_raster(day.aod_terra, grid_path(dir, "aod_terra", day.date));
    write_qa(day.qa, grid_path(dir, "qa_cloud", day.date),
             grid_path(dir, "qa_adjacency", day.date),
             grid_path(dir, "qa_quality", day.date));
    for (const auto& [var, raster] : day.meteo) {
      write_raster(raster, grid_path(dir, var, day.date));
    }
    write_raster(day.truth_pmc, grid_path(dir, "truth_pmc", day.date));
    write_raster(day.truth_aod, grid_path(dir, "truth_aod", day.date));
  }
  write_stations(scene.readings, dir / "stations.csv");

  nlohmann::ordered_json truth;
  truth["seed"] = scene.seed;
  truth["terra_to_aqua"] = {
      {"cold", {{"slope", scene.params.terra_to_aqua_cold.slope},
                {"intercept", scene.params.terra_to_aqua_cold.intercept}}},
      {"warm", {{"slope", scene.params.terra_to_aqua_warm.slope},
                {"intercept", scene.params.terra_to_aqua_warm.intercept}}}};
  truth["aqua_missing_fraction"] = scene.params.aqua_missing_fraction;
  truth["terra_missing_fraction"] = scene.params.terra_missing_fraction;
  truth["obs_noise"] = scene.params.obs_noise;
  truth["n_stations"] = scene.params.n_stations;
  truth["n_days"] = scene.params.n_days;
  std::ofstream out(dir / "scene_truth.json");
  if (!out) throw Error("cannot write scene_truth.json");
  out << truth.dump(1) << '\n';
}

}  // namespace aeromap
