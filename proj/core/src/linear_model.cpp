#include "aeromap/linear_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "aeromap/errors.hpp"

namespace aeromap {

const char* to_string(LinearKind k) {
  switch (k) {
    case LinearKind::Univariate: return "univariate";
    case LinearKind::Multivariate: return "multivariate";
    case LinearKind::Ridge: return "ridge";
    case LinearKind::Lasso: return "lasso";
  }
  return "?";
}

std::vector<double> LinearModel::predict(const FeatureTable& table) const {
  std::vector<const std::vector<double>*> cols(feature_names.size());
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    auto idx = table.column_index(feature_names[f]);
    if (!idx) throw Error("predict: missing mandatory feature '" + feature_names[f] + "'");
    cols[f] = &table.columns[*idx];
  }
  std::vector<double> out(table.n_rows(), intercept);
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    const double coef = coefficients[f];
    if (coef == 0.0) continue;
    const double mean = feature_means[f];
    const double inv_std = 1.0 / feature_stds[f];
    const std::vector<double>& col = *cols[f];
    for (std::size_t r = 0; r < out.size(); ++r) {
      out[r] += coef * (col[r] - mean) * inv_std;
    }
  }
  return out;
}

namespace {

struct Standardized {
  Eigen::MatrixXd x;  // n x p, centered and scaled
  std::vector<double> means;
  std::vector<double> stds;
};

Standardized standardize(const FeatureTable& table, const std::vector<std::string>& names) {
  const std::size_t n = table.n_rows();
  const std::size_t p = names.size();
  Standardized s;
  s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  s.means.resize(p);
  s.stds.resize(p);
  for (std::size_t f = 0; f < p; ++f) {
    auto idx = table.column_index(names[f]);
    if (!idx) throw Error("fit_linear: missing feature '" + names[f] + "'");
    const std::vector<double>& col = table.columns[*idx];
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / static_cast<double>(n));
    if (sd == 0.0) sd = 1.0;  // constant column; coefficient resolves to 0 or rank error
    s.means[f] = mean;
    s.stds[f] = sd;
    for (std::size_t r = 0; r < n; ++r) {
      s.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = (col[r] - mean) / sd;
    }
  }
  return s;
}

Eigen::VectorXd centered_targets(const std::vector<double>& y, double& mean_out) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  mean_out = mean;
  Eigen::VectorXd out(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i)) = y[i] - mean;
  return out;
}

std::vector<double> lasso_coordinate_descent(const Eigen::MatrixXd& x,
                                             const Eigen::VectorXd& yc, double lambda,
                                             double tolerance, int max_sweeps) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  // Objective: (1/2n)||yc - x beta||^2 + lambda * ||beta||_1.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = yc;
  Eigen::VectorXd col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) col_sq(j) = x.col(j).squaredNorm() / n;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double old = beta(j);
      const double rho = x.col(j).dot(residual) / n + col_sq(j) * old;
      double next = 0.0;
      if (rho > lambda) {
        next = (rho - lambda) / col_sq(j);
      } else if (rho < -lambda) {
        next = (rho + lambda) / col_sq(j);
      }
      if (next != old) {
        residual += x.col(j) * (old - next);
        beta(j) = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    if (max_change < tolerance) break;
  }
  return {beta.data(), beta.data() + p};
}

}  // namespace

LinearModel fit_linear(const FeatureTable& table, const std::vector<double>& targets,
                       LinearKind kind, const std::vector<std::string>& feature_names,
                       const LinearFitOptions& options) {
  const std::size_t n = table.n_rows();
  const std::size_t p = feature_names.size();
  if (n != targets.size()) throw Error("fit_linear: row/target count mismatch");
  const std::size_t min_n = (kind == LinearKind::Multivariate || kind == LinearKind::Ridge)
                                ? p + 1
                                : std::size_t{2};
  if (n < min_n) {
    throw Error("fit_linear: need >= " + std::to_string(min_n) + " samples, got " +
                std::to_string(n));
  }
  if (options.lambda < 0.0) throw Error("fit_linear: lambda must be >= 0");

  LinearModel model;
  model.kind = kind;
  model.feature_names = feature_names;
  model.lambda =
      (kind == LinearKind::Ridge || kind == LinearKind::Lasso) ? options.lambda : 0.0;

  Standardized s = standardize(table, feature_names);
  double y_mean = 0.0;
  Eigen::VectorXd yc = centered_targets(targets, y_mean);
  model.intercept = y_mean;  // standardized columns have zero mean
  model.feature_means = s.means;
  model.feature_stds = s.stds;

  switch (kind) {
    case LinearKind::Univariate:
    case LinearKind::Multivariate: {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.x);
      qr.setThreshold(1e-10);
      if (qr.rank() < static_cast<Eigen::Index>(p)) {
        throw Error(
            "fit_linear: rank-deficient design (collinear or constant features); "
            "consider ridge regression");
      }
      Eigen::VectorXd beta = qr.solve(yc);
      model.coefficients.assign(beta.data(), beta.data() + beta.size());
      break;
    }
    case LinearKind::Ridge: {
      Eigen::MatrixXd gram = s.x.transpose() * s.x;
      gram.diagonal().array() += model.lambda;
      Eigen::VectorXd beta = gram.ldlt().solve(s.x.transpose() * yc);
      model.coefficients.assign(beta.data(), beta.data() + beta.size());
      break;
    }
    case LinearKind::Lasso: {
      model.coefficients = lasso_coordinate_descent(s.x, yc, model.lambda,
                                                    options.lasso_tolerance,
                                                    options.lasso_max_sweeps);
      break;
    }
  }
  return model;
}

LinearModel fit_linear(const std::vector<Sample>& samples, LinearKind kind,
                       const LinearFitOptions& options) {
  if (samples.empty()) throw Error("fit_linear: no samples");
  FeatureTable table = FeatureTable::from_samples(samples);
  std::vector<std::string> names;
  if (kind == LinearKind::Univariate) {
    if (!feature_index(options.univariate_feature)) {
      throw Error("fit_linear: unknown univariate feature '" + options.univariate_feature +
                  "'");
    }
    names = {options.univariate_feature};
  } else {
    names.assign(kFeatureNames.begin(), kFeatureNames.end());
  }
  return fit_linear(table, targets_of(samples), kind, names, options);
}

}  // namespace aeromap
