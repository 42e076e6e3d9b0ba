#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeromap/variogram.hpp"

namespace aeromap {

enum class KrigingKind { Ordinary, Universal };

const char* to_string(KrigingKind k);
KrigingKind kriging_kind_from_string(const std::string& s);

/// Universal kriging uses a first-order drift in (lat, lon); Ordinary has no
/// drift terms. max_neighbors == 0 means use all samples for every target.
struct KrigingConfig {
  KrigingKind kind = KrigingKind::Ordinary;
  VariogramModel variogram;
  int max_neighbors = 0;
};

struct KrigingResult {
  double value = 0.0;
  double variance = 0.0;  // kriging variance, >= 0
};

struct Target {
  double lat = 0.0;
  double lon = 0.0;
};

/// Solves the ordinary (Lagrange-constrained) or universal (drift-augmented)
/// kriging system. Duplicate sample locations are averaged before solving.
/// Throws SingularSystemError on degenerate geometry.
std::vector<KrigingResult> krige(const KrigingConfig& config,
                                 const std::vector<SpatialSample>& samples,
                                 const std::vector<Target>& targets,
                                 int threads = 1);

/// As krige(), additionally returning the per-target sample weights
/// (row t = weights over the deduplicated samples, in their input order).
/// Exposed for diagnostics and verification.
struct KrigingSolution {
  std::vector<KrigingResult> results;
  std::vector<std::vector<double>> weights;
  std::vector<SpatialSample> dedup_samples;
};
KrigingSolution krige_detailed(const KrigingConfig& config,
                               const std::vector<SpatialSample>& samples,
                               const std::vector<Target>& targets);

/// One (kind, family) cell of the cross-validation search.
struct KrigingCvCell {
  KrigingKind kind = KrigingKind::Ordinary;
  VariogramFamily family = VariogramFamily::Spherical;
  std::vector<double> fold_rmse;
  double mean_rmse = 0.0;  // +inf when any fold failed to solve
};

struct KrigingSearchResult {
  KrigingConfig best;  // variogram refitted on all samples
  std::vector<KrigingCvCell> table;
};

/// Evaluates every (kind, family) candidate by seeded k-fold CV RMSE and
/// returns the argmin plus the full score table. Cells that fail to solve
/// score +inf rather than aborting the search.
KrigingSearchResult grid_search_kriging(
    const std::vector<SpatialSample>& samples,
    const std::vector<KrigingKind>& kinds,
    const std::vector<VariogramFamily>& families,
    int folds, std::uint64_t seed, int n_bins = 12);

/// JSON rendering of the CV score table (rows: kind x family).
std::string to_json_string(const KrigingSearchResult& result);

}  // namespace aeromap
