#pragma once

#include <string>
#include <vector>

#include "aeromap/sample.hpp"

namespace aeromap {

enum class LinearKind { Univariate, Multivariate, Ridge, Lasso };

const char* to_string(LinearKind k);

/// Linear regressor over standardized features. Prediction is
/// intercept + sum coef_i * (x_i - mean_i) / std_i. Univariate keeps a
/// single feature (nAODm unless configured otherwise).
struct LinearModel {
  LinearKind kind = LinearKind::Multivariate;
  std::vector<std::string> feature_names;
  std::vector<double> coefficients;   // per feature, standardized space
  std::vector<double> feature_means;  // captured at fit
  std::vector<double> feature_stds;
  double intercept = 0.0;
  double lambda = 0.0;  // Ridge/Lasso regularization strength

  std::vector<double> predict(const FeatureTable& table) const;
};

struct LinearFitOptions {
  double lambda = 0.1;                   // Ridge/Lasso only
  std::string univariate_feature = "nAODm";
  double lasso_tolerance = 1e-6;         // max coefficient change per sweep
  int lasso_max_sweeps = 10000;
};

/// OLS normal equations (Univariate/Multivariate), closed-form Ridge with an
/// unpenalized intercept, or coordinate-descent Lasso. Rank-deficient OLS
/// throws with a hint to use Ridge.
LinearModel fit_linear(const std::vector<Sample>& samples, LinearKind kind,
                       const LinearFitOptions& options = {});

/// As above on an explicit design (used by tests and the normalization
/// comparison); feature_names picks columns from the table.
LinearModel fit_linear(const FeatureTable& table, const std::vector<double>& targets,
                       LinearKind kind, const std::vector<std::string>& feature_names,
                       const LinearFitOptions& options = {});

}  // namespace aeromap
