#include "aeromap/kriging.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "aeromap/errors.hpp"
#include "aeromap/parallel.hpp"
#include "aeromap/rng.hpp"

namespace aeromap {

const char* to_string(KrigingKind k) {
  return k == KrigingKind::Ordinary ? "ordinary" : "universal";
}

KrigingKind kriging_kind_from_string(const std::string& s) {
  if (s == "ordinary") return KrigingKind::Ordinary;
  if (s == "universal") return KrigingKind::Universal;
  throw Error("unknown kriging kind '" + s + "'");
}

namespace {

std::vector<SpatialSample> average_duplicates(const std::vector<SpatialSample>& samples) {
  std::map<std::pair<double, double>, std::pair<double, std::size_t>> grouped;
  std::vector<std::pair<double, double>> order;
  for (const auto& s : samples) {
    auto key = std::make_pair(s.lat, s.lon);
    auto [it, inserted] = grouped.try_emplace(key, std::make_pair(0.0, std::size_t{0}));
    if (inserted) order.push_back(key);
    it->second.first += s.value;
    it->second.second += 1;
  }
  std::vector<SpatialSample> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& [sum, count] = grouped.at(key);
    out.push_back({key.first, key.second, sum / static_cast<double>(count)});
  }
  return out;
}

struct KrigingSystem {
  std::vector<SpatialSample> samples;  // deduplicated
  int n_drift = 1;                     // 1 (ordinary) or 3 (universal)
  double lat0 = 0.0, lon0 = 0.0;       // drift centering
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  int n() const { return static_cast<int>(samples.size()); }
  int dim() const { return n() + n_drift; }
};

KrigingSystem factor_system(const KrigingConfig& config,
                            const std::vector<SpatialSample>& raw_samples) {
  KrigingSystem sys;
  sys.samples = average_duplicates(raw_samples);
  const int n = sys.n();
  if (n < 2) {
    throw Error("krige: need >= 2 distinct sample locations, got " + std::to_string(n));
  }
  sys.n_drift = config.kind == KrigingKind::Universal ? 3 : 1;

  // Center the drift coordinates; the spanned space is unchanged and the
  // system is far better conditioned at city-scale extents.
  if (config.kind == KrigingKind::Universal) {
    for (const auto& s : sys.samples) {
      sys.lat0 += s.lat;
      sys.lon0 += s.lon;
    }
    sys.lat0 /= n;
    sys.lon0 /= n;
  }

  const int dim = sys.dim();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double g = config.variogram(ground_distance_m(
          sys.samples[i].lat, sys.samples[i].lon, sys.samples[j].lat, sys.samples[j].lon));
      a(i, j) = g;
      a(j, i) = g;
    }
  }
  for (int i = 0; i < n; ++i) {
    a(i, n) = 1.0;
    a(n, i) = 1.0;
    if (sys.n_drift == 3) {
      a(i, n + 1) = sys.samples[i].lat - sys.lat0;
      a(n + 1, i) = a(i, n + 1);
      a(i, n + 2) = sys.samples[i].lon - sys.lon0;
      a(n + 2, i) = a(i, n + 2);
    }
  }

  sys.lu.compute(a);
  const Eigen::VectorXd diag = sys.lu.matrixLU().diagonal().cwiseAbs();
  const double dmax = diag.maxCoeff();
  if (dmax <= 0.0 || diag.minCoeff() < 1e-12 * dmax) {
    throw SingularSystemError(
        "kriging system is singular: degenerate geometry "
        "(coincident or collinear points, or an all-zero variogram)");
  }
  return sys;
}

Eigen::VectorXd target_rhs(const KrigingSystem& sys, const KrigingConfig& config,
                           const Target& t) {
  const int n = sys.n();
  Eigen::VectorXd rhs(sys.dim());
  for (int i = 0; i < n; ++i) {
    rhs(i) =
        config.variogram(ground_distance_m(sys.samples[i].lat, sys.samples[i].lon, t.lat, t.lon));
  }
  rhs(n) = 1.0;
  if (sys.n_drift == 3) {
    rhs(n + 1) = t.lat - sys.lat0;
    rhs(n + 2) = t.lon - sys.lon0;
  }
  return rhs;
}

KrigingResult solve_target(const KrigingSystem& sys, const KrigingConfig& config,
                           const Target& t, std::vector<double>* weights_out) {
  const Eigen::VectorXd rhs = target_rhs(sys, config, t);
  const Eigen::VectorXd sol = sys.lu.solve(rhs);
  const int n = sys.n();

  KrigingResult res;
  res.value = 0.0;
  for (int i = 0; i < n; ++i) res.value += sol(i) * sys.samples[i].value;
  double variance = sol.dot(rhs);
  if (variance < -1e-9) {
    throw Error("kriging variance " + std::to_string(variance) + " below tolerance");
  }
  res.variance = std::max(0.0, variance);

  if (weights_out != nullptr) {
    weights_out->assign(sol.data(), sol.data() + n);
  }
  return res;
}

std::vector<SpatialSample> nearest_neighbors(const std::vector<SpatialSample>& samples,
                                             const Target& t, int k) {
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double da = ground_distance_m(samples[a].lat, samples[a].lon, t.lat, t.lon);
    const double db = ground_distance_m(samples[b].lat, samples[b].lon, t.lat, t.lon);
    return da < db;
  });
  std::vector<SpatialSample> out;
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), samples.size());
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(samples[idx[i]]);
  return out;
}

}  // namespace

std::vector<KrigingResult> krige(const KrigingConfig& config,
                                 const std::vector<SpatialSample>& samples,
                                 const std::vector<Target>& targets, int threads) {
  std::vector<KrigingResult> results(targets.size());

  if (config.max_neighbors > 0) {
    const std::vector<SpatialSample> dedup = average_duplicates(samples);
    parallel_for(targets.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        const auto local = nearest_neighbors(dedup, targets[t], config.max_neighbors);
        KrigingSystem sys = factor_system(config, local);
        results[t] = solve_target(sys, config, targets[t], nullptr);
      }
    });
    return results;
  }

  const KrigingSystem sys = factor_system(config, samples);
  parallel_for(targets.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      results[t] = solve_target(sys, config, targets[t], nullptr);
    }
  });
  return results;
}

KrigingSolution krige_detailed(const KrigingConfig& config,
                               const std::vector<SpatialSample>& samples,
                               const std::vector<Target>& targets) {
  const KrigingSystem sys = factor_system(config, samples);
  KrigingSolution out;
  out.dedup_samples = sys.samples;
  out.results.resize(targets.size());
  out.weights.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    out.results[t] = solve_target(sys, config, targets[t], &out.weights[t]);
  }
  return out;
}

KrigingSearchResult grid_search_kriging(const std::vector<SpatialSample>& samples,
                                        const std::vector<KrigingKind>& kinds,
                                        const std::vector<VariogramFamily>& families,
                                        int folds, std::uint64_t seed, int n_bins) {
  if (kinds.empty() || families.empty()) {
    throw Error("grid_search_kriging: empty candidate set");
  }
  if (folds < 2 || static_cast<std::size_t>(folds) > samples.size()) {
    throw Error("grid_search_kriging: need 2 <= folds <= n_samples");
  }

  // Seeded fold assignment shared by all cells.
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "kriging-grid-search"));
  shuffle(order, rng);
  std::vector<int> fold_of(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }

  KrigingSearchResult result;
  double best_score = std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (KrigingKind kind : kinds) {
    for (VariogramFamily family : families) {
      KrigingCvCell cell;
      cell.kind = kind;
      cell.family = family;
      double sum_rmse = 0.0;
      bool failed = false;
      for (int fold = 0; fold < folds; ++fold) {
        std::vector<SpatialSample> train;
        std::vector<SpatialSample> validation;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          (fold_of[i] == fold ? validation : train).push_back(samples[i]);
        }
        if (validation.empty() || train.size() < 3) {
          failed = true;
          break;
        }
        double fold_rmse = std::numeric_limits<double>::infinity();
        try {
          const auto empirical = empirical_variogram(train, n_bins);
          const VariogramFit fit = fit_variogram(empirical, family);
          KrigingConfig config{kind, fit.model, 0};
          std::vector<Target> targets;
          targets.reserve(validation.size());
          for (const auto& v : validation) targets.push_back({v.lat, v.lon});
          const auto predictions = krige(config, train, targets);
          double sse = 0.0;
          for (std::size_t i = 0; i < validation.size(); ++i) {
            const double e = predictions[i].value - validation[i].value;
            sse += e * e;
          }
          fold_rmse = std::sqrt(sse / static_cast<double>(validation.size()));
        } catch (const Error&) {
          failed = true;
        }
        cell.fold_rmse.push_back(fold_rmse);
        if (failed) break;
        sum_rmse += fold_rmse;
      }
      cell.mean_rmse = failed ? std::numeric_limits<double>::infinity()
                              : sum_rmse / static_cast<double>(folds);
      if (!failed && cell.mean_rmse < best_score) {
        best_score = cell.mean_rmse;
        result.best.kind = kind;
        result.best.variogram.family = family;
        have_best = true;
      }
      result.table.push_back(std::move(cell));
    }
  }

  if (!have_best) {
    throw Error("grid_search_kriging: every candidate cell failed to solve");
  }

  // Refit the winning family on all samples.
  const auto empirical = empirical_variogram(samples, n_bins);
  result.best.variogram = fit_variogram(empirical, result.best.variogram.family).model;
  return result;
}

}  // namespace aeromap
