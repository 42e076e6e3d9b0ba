#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace aeromap {

/// Deterministic 64-bit PRNG (splitmix64). Chosen over std::mt19937_64 +
/// std::*_distribution because the distributions are implementation-defined;
/// this generator produces identical streams on every platform/compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo; bias is negligible for n << 2^64 and this
    // keeps the draw count per call fixed (important for reproducibility).
    return next_u64() % n;
  }

  /// Standard normal via Box-Muller. No spare caching so the stream
  /// consumed per call is constant.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t state_;
};

/// Mixes a master seed with a purpose tag so independent consumers
/// (per-tree RNGs, per-field RNGs, ...) get decorrelated streams that do not
/// depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  Rng mix(master ^ h);
  return mix.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  Rng mix(derive_seed(master, tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return mix.next_u64();
}

/// Deterministic Fisher-Yates shuffle of index vector [0, n).
template <class Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace aeromap
