#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeromap/sample.hpp"

namespace aeromap {

/// RMSE/MAE and squared-Pearson R2 of predictions against observations.
/// R2 is reported as 0 with the degenerate flag set when either vector has
/// zero variance.
struct EvalReport {
  std::string split_label;  // "train", "test", "cv-fold-3", ...
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
  bool degenerate_r2 = false;
};

EvalReport evaluate(const std::vector<double>& predictions,
                    const std::vector<double>& observed,
                    const std::string& split_label = {});

/// Seeded uniform shuffle, then split; train gets round(fraction * n) rows.
/// The two halves are disjoint and exhaustive.
std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test(
    const std::vector<Sample>& samples, double fraction, std::uint64_t seed);

/// Chronological split variant: earliest fraction of rows (by date, then
/// station) goes to train.
std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test_temporal(
    const std::vector<Sample>& samples, double fraction);

/// Seeded k-fold assignment; every sample lands in exactly one validation
/// fold. fit_and_predict(train, validation) -> predictions on validation.
template <class FitPredict>
std::vector<EvalReport> cross_validate_with(const std::vector<Sample>& samples, int k,
                                            std::uint64_t seed, FitPredict&& fit_and_predict);

/// Fold index per sample for k-fold CV (seeded shuffle, round-robin).
std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed);

/// Absolute-Pearson correlation matrix over the 19 features plus the target
/// (last row/column, labeled "PM_c").
struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // symmetric, diagonal 1
};
CorrelationMatrix correlation_matrix(const std::vector<Sample>& samples);

std::string to_json_string(const CorrelationMatrix& matrix);
std::string to_json_string(const std::vector<EvalReport>& reports);

// -- implementation --

template <class FitPredict>
std::vector<EvalReport> cross_validate_with(const std::vector<Sample>& samples, int k,
                                            std::uint64_t seed, FitPredict&& fit_and_predict) {
  std::vector<int> folds = fold_assignment(samples.size(), k, seed);
  std::vector<EvalReport> reports;
  reports.reserve(static_cast<std::size_t>(k));
  for (int fold = 0; fold < k; ++fold) {
    std::vector<Sample> train, validation;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (folds[i] == fold ? validation : train).push_back(samples[i]);
    }
    std::vector<double> pred = fit_and_predict(train, validation);
    reports.push_back(
        evaluate(pred, targets_of(validation), "cv-fold-" + std::to_string(fold + 1)));
  }
  return reports;
}

}  // namespace aeromap
