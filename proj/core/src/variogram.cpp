#include "aeromap/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aeromap/errors.hpp"

namespace aeromap {

double ground_distance_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double deg2rad = std::numbers::pi / 180.0;
  constexpr double earth_radius_m = 6371000.0;
  const double dphi = (lat2 - lat1) * deg2rad;
  const double mid = 0.5 * (lat1 + lat2) * deg2rad;
  const double dlmb = (lon2 - lon1) * deg2rad * std::cos(mid);
  return earth_radius_m * std::sqrt(dphi * dphi + dlmb * dlmb);
}

const char* to_string(VariogramFamily f) {
  switch (f) {
    case VariogramFamily::Linear: return "linear";
    case VariogramFamily::Spherical: return "spherical";
    case VariogramFamily::Gaussian: return "gaussian";
    case VariogramFamily::Power: return "power";
  }
  return "?";
}

VariogramFamily variogram_family_from_string(const std::string& s) {
  if (s == "linear") return VariogramFamily::Linear;
  if (s == "spherical") return VariogramFamily::Spherical;
  if (s == "gaussian") return VariogramFamily::Gaussian;
  if (s == "power") return VariogramFamily::Power;
  throw Error("unknown variogram family '" + s + "'");
}

double VariogramModel::operator()(double h) const {
  if (h <= 0.0) return 0.0;  // exact interpolation at zero separation
  switch (family) {
    case VariogramFamily::Linear:
      return nugget + scale * h;
    case VariogramFamily::Spherical: {
      if (h >= range) return sill;
      const double t = h / range;
      return nugget + (sill - nugget) * (1.5 * t - 0.5 * t * t * t);
    }
    case VariogramFamily::Gaussian: {
      const double t = h / range;
      return nugget + (sill - nugget) * (1.0 - std::exp(-t * t));
    }
    case VariogramFamily::Power:
      return nugget + scale * std::pow(h, exponent);
  }
  return 0.0;
}

std::vector<VariogramBin> empirical_variogram(const std::vector<SpatialSample>& points,
                                              int n_bins, double max_dist) {
  if (points.size() < 2) throw Error("empirical_variogram: need >= 2 points");
  if (n_bins < 1) throw Error("empirical_variogram: n_bins must be >= 1");

  const std::size_t n = points.size();
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  double d_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = ground_distance_m(points[i].lat, points[i].lon, points[j].lat, points[j].lon);
      dists.push_back(d);
      d_max = std::max(d_max, d);
    }
  }
  if (d_max == 0.0) throw Error("empirical_variogram: all points coincident");
  if (max_dist <= 0.0) max_dist = 0.5 * d_max;

  struct Acc {
    double sum_sv = 0.0;
    double sum_d = 0.0;
    std::size_t count = 0;
  };
  std::vector<Acc> bins(static_cast<std::size_t>(n_bins));
  const double width = max_dist / n_bins;

  std::size_t pair = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++pair) {
      const double d = dists[pair];
      if (d <= 0.0 || d > max_dist) continue;
      auto b = std::min<std::size_t>(static_cast<std::size_t>(d / width),
                                     static_cast<std::size_t>(n_bins) - 1);
      const double diff = points[i].value - points[j].value;
      bins[b].sum_sv += 0.5 * diff * diff;
      bins[b].sum_d += d;
      bins[b].count += 1;
    }
  }

  std::vector<VariogramBin> out;
  for (const Acc& b : bins) {
    if (b.count == 0) continue;
    out.push_back({b.sum_d / b.count, b.sum_sv / b.count, b.count});
  }
  return out;
}

namespace {

// gamma(h) = intercept_part + slope_part * basis(h); weighted least squares
// in the two linear parameters with nonnegativity clamps.
struct LinearPart {
  double intercept = 0.0;  // nugget
  double slope = 0.0;      // partial sill or scale
  double wsse = 0.0;
};

LinearPart solve_linear_part(const std::vector<VariogramBin>& bins,
                             const std::vector<double>& basis) {
  double sw = 0.0, swb = 0.0, swbb = 0.0, swg = 0.0, swbg = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double w = static_cast<double>(bins[i].pair_count);
    const double b = basis[i];
    const double g = bins[i].semivariance;
    sw += w;
    swb += w * b;
    swbb += w * b * b;
    swg += w * g;
    swbg += w * b * g;
  }
  LinearPart out;
  const double det = sw * swbb - swb * swb;
  if (std::abs(det) > 1e-300) {
    out.intercept = (swg * swbb - swb * swbg) / det;
    out.slope = (sw * swbg - swb * swg) / det;
  } else {
    out.intercept = 0.0;
    out.slope = swbb > 0.0 ? swbg / swbb : 0.0;
  }
  if (out.intercept < 0.0) {
    out.intercept = 0.0;
    out.slope = swbb > 0.0 ? std::max(0.0, swbg / swbb) : 0.0;
  }
  if (out.slope < 0.0) {
    out.slope = 0.0;
    out.intercept = sw > 0.0 ? std::max(0.0, swg / sw) : 0.0;
  }
  out.wsse = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double r = bins[i].semivariance - (out.intercept + out.slope * basis[i]);
    out.wsse += static_cast<double>(bins[i].pair_count) * r * r;
  }
  return out;
}

double spherical_basis(double h, double range) {
  if (h >= range) return 1.0;
  const double t = h / range;
  return 1.5 * t - 0.5 * t * t * t;
}

double gaussian_basis(double h, double range) {
  const double t = h / range;
  return 1.0 - std::exp(-t * t);
}

// WSSE at the given profile parameter (range or exponent).
template <class BasisFn>
LinearPart profile_objective(const std::vector<VariogramBin>& bins, BasisFn&& basis_fn) {
  std::vector<double> basis(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) basis[i] = basis_fn(bins[i].lag);
  return solve_linear_part(bins, basis);
}

template <class Objective>
double golden_minimize(Objective&& f, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

VariogramFit fit_variogram(const std::vector<VariogramBin>& empirical,
                           VariogramFamily family) {
  if (empirical.size() < 3) {
    throw Error("fit_variogram: need >= 3 non-empty bins, got " +
                std::to_string(empirical.size()));
  }

  VariogramFit fit;
  fit.model.family = family;

  const double h_min = empirical.front().lag;
  const double h_max = empirical.back().lag;

  if (family == VariogramFamily::Linear) {
    LinearPart p = profile_objective(empirical, [](double h) { return h; });
    fit.model.nugget = p.intercept;
    fit.model.scale = p.slope;
    fit.model.sill = fit.model.nugget + fit.model.scale * h_max;
    fit.model.range = h_max;
    fit.residual_norm = std::sqrt(p.wsse);
    return fit;
  }

  if (family == VariogramFamily::Power) {
    auto objective = [&](double e) {
      return profile_objective(empirical, [&](double h) { return std::pow(h, e); }).wsse;
    };
    // Coarse scan, then golden refinement around the best cell.
    const double e_lo = 0.05, e_hi = 1.95;
    double best_e = e_lo, best_f = std::numeric_limits<double>::infinity();
    constexpr int kGrid = 64;
    for (int i = 0; i <= kGrid; ++i) {
      const double e = e_lo + (e_hi - e_lo) * i / kGrid;
      const double f = objective(e);
      if (f < best_f) {
        best_f = f;
        best_e = e;
      }
    }
    const double step = (e_hi - e_lo) / kGrid;
    best_e = golden_minimize(objective, std::max(e_lo, best_e - step),
                             std::min(e_hi, best_e + step));
    LinearPart p =
        profile_objective(empirical, [&](double h) { return std::pow(h, best_e); });
    fit.model.nugget = p.intercept;
    fit.model.scale = p.slope;
    fit.model.exponent = best_e;
    fit.model.sill = fit.model.nugget + fit.model.scale * std::pow(h_max, best_e);
    fit.model.range = h_max;
    fit.residual_norm = std::sqrt(p.wsse);
    return fit;
  }

  const bool spherical = family == VariogramFamily::Spherical;
  auto basis = [&](double h, double range) {
    return spherical ? spherical_basis(h, range) : gaussian_basis(h, range);
  };
  auto objective = [&](double log_range) {
    const double range = std::exp(log_range);
    return profile_objective(empirical, [&](double h) { return basis(h, range); }).wsse;
  };

  const double lr_lo = std::log(std::max(h_min * 0.25, 1e-6));
  const double lr_hi = std::log(h_max * 4.0);
  double best_lr = lr_lo, best_f = std::numeric_limits<double>::infinity();
  constexpr int kGrid = 64;
  for (int i = 0; i <= kGrid; ++i) {
    const double lr = lr_lo + (lr_hi - lr_lo) * i / kGrid;
    const double f = objective(lr);
    if (f < best_f) {
      best_f = f;
      best_lr = lr;
    }
  }
  const double step = (lr_hi - lr_lo) / kGrid;
  best_lr = golden_minimize(objective, best_lr - step, best_lr + step);
  const double best_range = std::exp(best_lr);

  LinearPart p = profile_objective(empirical, [&](double h) { return basis(h, best_range); });
  fit.model.nugget = p.intercept;
  fit.model.sill = p.intercept + p.slope;
  fit.model.range = best_range;
  fit.residual_norm = std::sqrt(p.wsse);

  if (!std::isfinite(fit.residual_norm) || !std::isfinite(best_range)) {
    throw Error("fit_variogram: optimizer failed (non-finite objective)");
  }
  return fit;
}

}  // namespace aeromap
