#pragma once

#include <string>
#include <vector>

namespace aeromap {

/// Equirectangular ground distance in meters with cosine-latitude longitude
/// scaling. Sub-0.1% error at city scale.
double ground_distance_m(double lat1, double lon1, double lat2, double lon2);

/// Meters per degree of latitude on the reference sphere; handy for
/// expressing variogram ranges given in degrees.
inline constexpr double kMetersPerDegree = 6371000.0 * 3.14159265358979323846 / 180.0;

enum class VariogramFamily { Linear, Spherical, Gaussian, Power };

const char* to_string(VariogramFamily f);
VariogramFamily variogram_family_from_string(const std::string& s);

/// Semivariogram model gamma(h). gamma(0) == 0 exactly (kriging exactness);
/// the nugget is the h->0+ limit. Bounded families (Spherical, Gaussian) use
/// sill/range; Linear uses scale; Power uses scale and exponent in (0,2).
struct VariogramModel {
  VariogramFamily family = VariogramFamily::Spherical;
  double nugget = 0.0;
  double sill = 1.0;      // total sill (nugget + partial sill), bounded families
  double range = 1.0;     // meters, bounded families
  double scale = 1.0;     // Linear: slope per meter; Power: coefficient
  double exponent = 1.0;  // Power only, in (0, 2)

  double operator()(double h) const;
};

struct VariogramBin {
  double lag = 0.0;           // mean pair distance in the bin, meters
  double semivariance = 0.0;  // mean of 0.5*(v_i - v_j)^2
  std::size_t pair_count = 0;
};

struct SpatialSample {
  double lat = 0.0;
  double lon = 0.0;
  double value = 0.0;
};

/// Bins 0.5*(vi-vj)^2 by pair distance over (0, max_dist]; empty bins are
/// omitted. max_dist <= 0 means half the maximum pairwise distance.
std::vector<VariogramBin> empirical_variogram(const std::vector<SpatialSample>& points,
                                              int n_bins = 12, double max_dist = 0.0);

struct VariogramFit {
  VariogramModel model;
  double residual_norm = 0.0;  // sqrt of weighted SSE at the optimum
};

/// Weighted least squares (weights = pair counts) over the family's
/// parameters. Needs >= 3 non-empty bins.
VariogramFit fit_variogram(const std::vector<VariogramBin>& empirical,
                           VariogramFamily family);

}  // namespace aeromap
