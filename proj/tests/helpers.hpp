#pragma once

// Shared test utilities. The numerical oracles here are deliberately
// independent of the library's solvers: plain Gauss-Jordan with full
// pivoting and a from-scratch Cholesky, no Eigen.

#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "aeromap/rng.hpp"
#include "aeromap/variogram.hpp"

namespace testutil {

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aeromap_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Dense solve by Gauss-Jordan elimination with full pivoting.
inline std::vector<double> gauss_jordan_solve(std::vector<std::vector<double>> a,
                                              std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> col_perm(n);
  for (std::size_t i = 0; i < n; ++i) col_perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t r = k; r < n; ++r) {
      for (std::size_t c = k; c < n; ++c) {
        if (std::abs(a[r][c]) > best) {
          best = std::abs(a[r][c]);
          pr = r;
          pc = c;
        }
      }
    }
    if (best == 0.0) throw std::runtime_error("gauss_jordan_solve: singular matrix");
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (std::size_t r = 0; r < n; ++r) std::swap(a[r][k], a[r][pc]);
    std::swap(col_perm[k], col_perm[pc]);

    const double pivot = a[k][k];
    for (std::size_t c = 0; c < n; ++c) a[k][c] /= pivot;
    b[k] /= pivot;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k || a[r][k] == 0.0) continue;
      const double f = a[r][k];
      for (std::size_t c = 0; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[col_perm[i]] = b[i];
  return x;
}

/// Lower-triangular Cholesky factor with a small jitter on the diagonal.
inline std::vector<std::vector<double>> cholesky(std::vector<std::vector<double>> a,
                                                 double jitter = 1e-10) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) a[i][i] += jitter;
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("cholesky: not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

/// Draw of a Gaussian random field with the given variogram at the given
/// points: covariance C(h) = sill - gamma(h), C(0) = sill.
inline std::vector<double> gaussian_field_draw(const std::vector<aeromap::SpatialSample>& points,
                                               const aeromap::VariogramModel& model,
                                               std::uint64_t seed) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> cov(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double h = aeromap::ground_distance_m(points[i].lat, points[i].lon,
                                                  points[j].lat, points[j].lon);
      cov[i][j] = model.sill - model(h);
    }
  }
  const auto l = cholesky(std::move(cov));
  aeromap::Rng rng(seed);
  std::vector<double> z(n);
  for (double& v : z) v = rng.normal();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= i; ++k) out[i] += l[i][k] * z[k];
  }
  return out;
}

/// Type-7 quantile on a copy (independent of the library implementation).
inline double quantile7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

inline bool approx_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testutil
