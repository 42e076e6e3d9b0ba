#include "aeromap/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aeromap/errors.hpp"

namespace aeromap {

double correct_pm(double pm, double rh) {
  if (pm < 0.0) throw DomainError("correct_pm: pm must be >= 0, got " + std::to_string(pm));
  if (rh < 0.0) throw DomainError("correct_pm: rh must be >= 0, got " + std::to_string(rh));
  if (rh >= 100.0) {
    throw DomainError("correct_pm: rh >= 100 is outside the correction domain");
  }
  return pm / (1.0 - rh / 100.0);
}

const char* to_string(OutlierMethod m) {
  return m == OutlierMethod::IQR ? "iqr" : "three_sigma";
}

OutlierMethod outlier_method_from_string(const std::string& s) {
  if (s == "iqr") return OutlierMethod::IQR;
  if (s == "three_sigma") return OutlierMethod::ThreeSigma;
  throw Error("unknown outlier method '" + s + "' (expected iqr or three_sigma)");
}

namespace {

// Type-7 quantile: linear interpolation between order statistics.
double quantile_type7(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<std::size_t> filter_outliers(const std::vector<double>& values,
                                         OutlierMethod method) {
  const std::size_t min_n = method == OutlierMethod::IQR ? 4 : 2;
  if (values.size() < min_n) {
    throw Error("filter_outliers: need at least " + std::to_string(min_n) + " values, got " +
                std::to_string(values.size()));
  }

  double lo = 0.0, hi = 0.0;
  if (method == OutlierMethod::IQR) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
      // Zero spread carries no evidence of outliers; the strict bounds would
      // otherwise discard every value.
      std::vector<std::size_t> all(values.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }
    const double q1 = quantile_type7(sorted, 0.25);
    const double q3 = quantile_type7(sorted, 0.75);
    const double iqr = q3 - q1;
    lo = q1 - iqr;
    hi = q3 + iqr;
  } else {
    const double mu = mean_of(values);
    const double sigma = sample_std(values, mu);
    if (sigma == 0.0) {
      std::vector<std::size_t> all(values.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }
    lo = mu - 3.0 * sigma;
    hi = mu + 3.0 * sigma;
  }

  std::vector<std::size_t> kept;
  kept.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > lo && values[i] < hi) kept.push_back(i);
  }
  return kept;
}

WindowExtract extract_aod_window(const Raster& aod, const QaRaster& qa, CellIndex center,
                                 int window_size, int min_valid_pixels,
                                 double std_threshold) {
  WindowExtract w;
  const int half = window_size / 2;
  const GridSpec& spec = aod.spec;

  double sum = 0.0, sum_sq = 0.0;
  int n_med = 0, n_best = 0;
  for (int dr = -half; dr <= half; ++dr) {
    for (int dc = -half; dc <= half; ++dc) {
      const int r = center.row + dr;
      const int c = center.col + dc;
      if (!spec.in_bounds(r, c)) continue;  // out-of-grid counts as missing
      const double v = aod.at(r, c);
      if (!is_missing(v)) {
        ++w.n_valid;
        sum += v;
        sum_sq += v * v;
      }
      const std::size_t i = qa.idx(r, c);
      const bool adj_clear = qa.adjacency[i] == AdjacencyMask::NormalClear;
      const bool cond1 = adj_clear && (qa.cloud[i] == CloudMask::Clear ||
                                       qa.cloud[i] == CloudMask::PossiblyCloudy);
      const bool cond2 = adj_clear && qa.cloud[i] == CloudMask::Clear &&
                         qa.aod_quality[i] == AodQuality::Best;
      n_med += cond1;
      n_best += cond2;
    }
  }

  const double area = static_cast<double>(window_size) * window_size;
  w.prob_med = n_med / area;
  w.prob_best = n_best / area;

  if (w.n_valid > 0) {
    w.aod_mean = sum / w.n_valid;
    if (w.n_valid > 1) {
      // Sample (n-1) standard deviation, guarded against cancellation.
      double ss = std::max(0.0, sum_sq - sum * sum / w.n_valid);
      w.aod_std = std::sqrt(ss / (w.n_valid - 1));
    }
  }

  w.valid = w.n_valid > min_valid_pixels && w.aod_std <= std_threshold;
  return w;
}

double normalize_aod(double aod, double pblh_m) {
  if (pblh_m <= 0.0) {
    throw DomainError("normalize_aod: PBLH must be > 0, got " + std::to_string(pblh_m));
  }
  return aod / pblh_m;
}

namespace {

struct OlsFit {
  AffineMap map;
  double r2 = 0.0;
};

OlsFit ols_1d(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw Error("fit_merge_coefficients: regressor values are all identical");
  }
  OlsFit fit;
  fit.map.slope = sxy / sxx;
  fit.map.intercept = my - fit.map.slope * mx;
  fit.r2 = syy == 0.0 ? 0.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

SeasonalFit fit_pairs(const std::vector<const AodPair*>& pairs) {
  if (pairs.size() < 2) {
    throw Error("fit_merge_coefficients: need >= 2 pairs, got " +
                std::to_string(pairs.size()));
  }
  std::vector<double> aqua(pairs.size()), terra(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    aqua[i] = pairs[i]->aqua;
    terra[i] = pairs[i]->terra;
  }
  return fit_aod_pairs(aqua, terra);
}

}  // namespace

SeasonalFit fit_aod_pairs(const std::vector<double>& aqua, const std::vector<double>& terra) {
  if (aqua.size() != terra.size() || aqua.size() < 2) {
    throw Error("fit_aod_pairs: need >= 2 aligned pairs");
  }
  OlsFit t2a = ols_1d(terra, aqua);
  OlsFit a2t = ols_1d(aqua, terra);
  SeasonalFit fit;
  fit.terra_to_aqua = t2a.map;
  fit.aqua_to_terra = a2t.map;
  fit.r2 = t2a.r2;  // symmetric: squared Pearson correlation
  fit.n_pairs = aqua.size();
  return fit;
}

MergeCoefficients fit_merge_coefficients(const std::vector<AodPair>& pairs) {
  std::vector<const AodPair*> warm, cold, all;
  all.reserve(pairs.size());
  for (const auto& p : pairs) {
    all.push_back(&p);
    (season_of(p.date) == Season::Warm ? warm : cold).push_back(&p);
  }
  MergeCoefficients coeffs;
  coeffs.warm = fit_pairs(warm);
  coeffs.cold = fit_pairs(cold);
  coeffs.pooled = fit_pairs(all);
  return coeffs;
}

double merge_aqua_terra(double aqua, double terra, Season season,
                        const MergeCoefficients& coeffs) {
  const bool has_aqua = !is_missing(aqua);
  const bool has_terra = !is_missing(terra);
  if (has_aqua && has_terra) return 0.5 * (aqua + terra);
  if (!has_aqua && !has_terra) return kMissing;
  const SeasonalFit& fit = coeffs.for_season(season);
  if (has_terra) {
    return 0.5 * (fit.terra_to_aqua.apply(terra) + terra);
  }
  return 0.5 * (aqua + fit.aqua_to_terra.apply(aqua));
}

Raster merge_aod_rasters(const Raster& aqua, const Raster& terra,
                         const MergeCoefficients& coeffs, MergeCounts* counts) {
  if (!aqua.spec.join_compatible(terra.spec)) {
    throw Error("merge_aod_rasters: Aqua and Terra grids are not join-compatible");
  }
  const Season season = season_of(aqua.spec.timestamp);
  Raster merged(aqua.spec, "aod");
  for (std::size_t i = 0; i < merged.values.size(); ++i) {
    merged.values[i] = merge_aqua_terra(aqua.values[i], terra.values[i], season, coeffs);
    if (counts != nullptr) {
      const bool has_a = !is_missing(aqua.values[i]);
      const bool has_t = !is_missing(terra.values[i]);
      if (has_t && !has_a) {
        (season == Season::Warm ? counts->imputed_aqua_warm : counts->imputed_aqua_cold)++;
      } else if (has_a && !has_t) {
        (season == Season::Warm ? counts->imputed_terra_warm : counts->imputed_terra_cold)++;
      }
    }
  }
  return merged;
}

double wind_speed(double u10, double v10) { return std::hypot(u10, v10); }

double wind_direction_deg(double u10, double v10) {
  if (u10 == 0.0 && v10 == 0.0) return 0.0;  // calm: direction undefined, report north
  constexpr double rad2deg = 180.0 / std::numbers::pi;
  double deg = std::atan2(u10, v10) * rad2deg + 180.0;  // from-direction, clockwise from N
  if (deg >= 360.0) deg -= 360.0;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

double relative_humidity(double d2m_k, double t2m_k) {
  // Magnus over water, temperatures in Celsius.
  constexpr double a = 17.625;
  constexpr double b = 243.04;
  const double td = d2m_k - 273.15;
  const double t = t2m_k - 273.15;
  const double rh = 100.0 * std::exp(a * td / (b + td) - a * t / (b + t));
  return std::clamp(rh, 0.0, 99.9);
}

DerivedMeteo derive_meteo_features(double u10, double v10, double d2m_k, double t2m_k) {
  return DerivedMeteo{wind_speed(u10, v10), wind_direction_deg(u10, v10),
                      relative_humidity(d2m_k, t2m_k)};
}

}  // namespace aeromap
