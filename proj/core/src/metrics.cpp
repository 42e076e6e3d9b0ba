#include "aeromap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aeromap/errors.hpp"
#include "aeromap/rng.hpp"

namespace aeromap {

EvalReport evaluate(const std::vector<double>& predictions,
                    const std::vector<double>& observed, const std::string& split_label) {
  if (predictions.size() != observed.size()) {
    throw Error("evaluate: prediction/observation size mismatch");
  }
  if (predictions.empty()) throw Error("evaluate: empty input");

  EvalReport report;
  report.split_label = split_label;
  report.n = predictions.size();

  const double n = static_cast<double>(predictions.size());
  double sse = 0.0, sae = 0.0;
  double mp = 0.0, mo = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - observed[i];
    sse += e * e;
    sae += std::abs(e);
    mp += predictions[i];
    mo += observed[i];
  }
  report.rmse = std::sqrt(sse / n);
  report.mae = sae / n;
  mp /= n;
  mo /= n;

  double spp = 0.0, soo = 0.0, spo = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double dp = predictions[i] - mp;
    const double dob = observed[i] - mo;
    spp += dp * dp;
    soo += dob * dob;
    spo += dp * dob;
  }
  if (spp == 0.0 || soo == 0.0) {
    report.r2 = 0.0;
    report.degenerate_r2 = true;
  } else {
    report.r2 = (spo * spo) / (spp * soo);
  }
  return report;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test(
    const std::vector<Sample>& samples, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw Error("split_train_test: fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "train-test-split"));
  shuffle(order, rng);

  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples.size())));
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  out.first.reserve(n_train);
  out.second.reserve(samples.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(samples[order[i]]);
  }
  return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test_temporal(
    const std::vector<Sample>& samples, double fraction) {
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw Error("split_train_test: fraction must be in (0, 1)");
  }
  std::vector<Sample> sorted = samples;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Sample& a, const Sample& b) {
    if (a.date != b.date) return a.date < b.date;
    return a.station_id < b.station_id;
  });
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(sorted.size())));
  std::vector<Sample> train(sorted.begin(), sorted.begin() + n_train);
  std::vector<Sample> test(sorted.begin() + n_train, sorted.end());
  return {std::move(train), std::move(test)};
}

std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("cross_validate: need k >= 2 folds");
  if (n < static_cast<std::size_t>(k)) throw Error("cross_validate: fewer samples than folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "cv-folds"));
  shuffle(order, rng);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) {
    fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

CorrelationMatrix correlation_matrix(const std::vector<Sample>& samples) {
  if (samples.size() < 2) throw Error("correlation_matrix: need >= 2 samples");

  const std::size_t p = kNumFeatures + 1;
  CorrelationMatrix m;
  m.labels.assign(kFeatureNames.begin(), kFeatureNames.end());
  m.labels.push_back("PM_c");

  std::vector<std::vector<double>> cols(p, std::vector<double>(samples.size()));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) cols[f][r] = samples[r].features[f];
    cols[kNumFeatures][r] = samples[r].target;
  }

  std::vector<double> mean(p, 0.0), sd(p, 0.0);
  for (std::size_t f = 0; f < p; ++f) {
    for (double v : cols[f]) mean[f] += v;
    mean[f] /= static_cast<double>(samples.size());
    for (double v : cols[f]) sd[f] += (v - mean[f]) * (v - mean[f]);
    sd[f] = std::sqrt(sd[f]);
  }

  m.values.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a) {
    m.values[a][a] = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      double cov = 0.0;
      for (std::size_t r = 0; r < samples.size(); ++r) {
        cov += (cols[a][r] - mean[a]) * (cols[b][r] - mean[b]);
      }
      const double denom = sd[a] * sd[b];
      const double corr = denom == 0.0 ? 0.0 : std::abs(cov / denom);
      m.values[a][b] = corr;
      m.values[b][a] = corr;
    }
  }
  return m;
}

}  // namespace aeromap
