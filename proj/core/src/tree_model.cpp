#include "aeromap/tree_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "aeromap/errors.hpp"
#include "aeromap/parallel.hpp"
#include "aeromap/rng.hpp"

namespace aeromap {

const char* to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::RandomForest: return "random_forest";
    case EnsembleKind::ExtraTrees: return "extra_trees";
    case EnsembleKind::GradientBoosting: return "gradient_boosting";
  }
  return "?";
}

double Tree::predict_row(const std::vector<const std::vector<double>*>& cols,
                         std::size_t row) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& n = nodes[node];
    node = (*cols[n.feature])[row] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

namespace {

struct Design {
  std::vector<std::string> names;
  std::vector<const std::vector<double>*> columns;  // [feature][row]
  std::size_t n_rows = 0;
  std::size_t n_features() const { return names.size(); }
};

Design design_from(const FeatureTable& table, const std::vector<std::string>& names) {
  Design d;
  d.names = names;
  d.columns.reserve(names.size());
  for (const auto& name : names) {
    auto idx = table.column_index(name);
    if (!idx) throw Error("tree fit: missing feature '" + name + "'");
    d.columns.push_back(&table.columns[*idx]);
  }
  d.n_rows = table.n_rows();
  return d;
}

using SortedIds = std::vector<std::vector<int>>;  // per feature, rows ascending by value

SortedIds presort(const Design& d) {
  SortedIds sorted(d.n_features());
  std::vector<int> base(d.n_rows);
  std::iota(base.begin(), base.end(), 0);
  for (std::size_t f = 0; f < d.n_features(); ++f) {
    sorted[f] = base;
    const std::vector<double>& col = *d.columns[f];
    std::sort(sorted[f].begin(), sorted[f].end(), [&](int a, int b) {
      if (col[a] != col[b]) return col[a] < col[b];
      return a < b;  // stable tie order keeps the build deterministic
    });
  }
  return sorted;
}

struct SplitParams {
  int max_depth = 6;
  double min_leaf_weight = 1.0;
  double min_gain = 0.0;  // strictly positive gain is always required
  int features_per_split = 1;
  bool random_thresholds = false;
};

int features_per_split_of(double fraction, std::size_t p) {
  int k = static_cast<int>(fraction * static_cast<double>(p) + 1e-9);
  return std::clamp(k, 1, static_cast<int>(p));
}

std::uint64_t draw_feature_mask(std::size_t p, int k, Rng& rng) {
  if (static_cast<std::size_t>(k) >= p) return p == 64 ? ~0ULL : ((1ULL << p) - 1);
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t mask = 0;
  for (int i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(idx[i], idx[j]);
    mask |= 1ULL << idx[i];
  }
  return mask;
}

// Exact greedy builder (random forest and boosting trees). Processes the
// tree level by level with one pass over each feature's presorted order per
// level, so a full tree costs O(depth * n_features * n_rows). `weights`
// carries bootstrap multiplicities (0 = out of bag); zero-weight rows still
// flow down the tree so callers can read per-row leaf values.
struct LevelNode {
  double weight = 0.0;
  double sum = 0.0;
  std::uint64_t mask = 0;
  double best_gain = 0.0;
  int best_feature = -1;
  double best_threshold = 0.0;
  double best_left_weight = 0.0;
  double best_left_sum = 0.0;
  int tree_node = -1;
};

Tree build_tree_exact(const Design& d, const SortedIds& sorted, const std::vector<double>& y,
                      const std::vector<double>& weights, const SplitParams& params, Rng& rng,
                      std::vector<double>* leaf_value_per_row) {
  const std::size_t n = d.n_rows;
  const std::size_t p = d.n_features();

  Tree tree;
  std::vector<int> node_of(n, 0);

  double root_w = 0.0, root_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    root_w += weights[i];
    root_s += weights[i] * y[i];
  }
  if (root_w <= 0.0) throw Error("tree fit: empty training set");

  tree.nodes.push_back(TreeNode{});
  std::vector<LevelNode> level(1);
  level[0].weight = root_w;
  level[0].sum = root_s;
  level[0].tree_node = 0;
  int level_first = 0;  // tree-node id of the first node in `level`

  auto finalize_leaf = [&](const LevelNode& ln) {
    TreeNode& tn = tree.nodes[ln.tree_node];
    tn.feature = -1;
    tn.value = ln.sum / ln.weight;
    tn.n_samples = static_cast<int>(ln.weight + 0.5);
  };

  for (int depth = 0; depth < params.max_depth && !level.empty(); ++depth) {
    // Feature subsets are drawn in node order from the tree RNG stream,
    // independent of any parallel schedule above this call.
    for (LevelNode& ln : level) {
      ln.mask = draw_feature_mask(p, params.features_per_split, rng);
    }

    const std::size_t n_level = level.size();
    std::vector<double> run_w(n_level), run_s(n_level), prev_v(n_level);
    std::vector<char> seen(n_level);

    for (std::size_t f = 0; f < p; ++f) {
      const std::uint64_t fbit = 1ULL << f;
      std::fill(run_w.begin(), run_w.end(), 0.0);
      std::fill(run_s.begin(), run_s.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      const std::vector<double>& col = *d.columns[f];
      for (int row : sorted[f]) {
        const int node = node_of[row];
        const int local = node - level_first;
        if (local < 0 || local >= static_cast<int>(n_level)) continue;
        if (weights[row] == 0.0) continue;
        LevelNode& ln = level[local];
        if (!(ln.mask & fbit)) continue;
        const double v = col[row];
        if (seen[local] && v > prev_v[local]) {
          const double wl = run_w[local];
          const double wr = ln.weight - wl;
          if (wl >= params.min_leaf_weight && wr >= params.min_leaf_weight) {
            const double sl = run_s[local];
            const double sr = ln.sum - sl;
            const double gain =
                sl * sl / wl + sr * sr / wr - ln.sum * ln.sum / ln.weight;
            if (gain > ln.best_gain) {
              const double threshold = 0.5 * (prev_v[local] + v);
              if (threshold < v) {  // guard against midpoint rounding up
                ln.best_gain = gain;
                ln.best_feature = static_cast<int>(f);
                ln.best_threshold = threshold;
                ln.best_left_weight = wl;
                ln.best_left_sum = sl;
              }
            }
          }
        }
        run_w[local] += weights[row];
        run_s[local] += weights[row] * y[row];
        prev_v[local] = v;
        seen[local] = 1;
      }
    }

    std::vector<LevelNode> next;
    for (LevelNode& ln : level) {
      const bool split = ln.best_feature >= 0 && ln.best_gain > 0.0 &&
                         ln.best_gain >= params.min_gain;
      if (!split) {
        finalize_leaf(ln);
        continue;
      }
      TreeNode& tn = tree.nodes[ln.tree_node];
      tn.feature = ln.best_feature;
      tn.threshold = ln.best_threshold;
      tn.gain = ln.best_gain;
      tn.n_samples = static_cast<int>(ln.weight + 0.5);
      tn.left = static_cast<int>(tree.nodes.size());
      tn.right = tn.left + 1;
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});

      LevelNode left, right;
      left.tree_node = tn.left;
      left.weight = ln.best_left_weight;
      left.sum = ln.best_left_sum;
      right.tree_node = tn.right;
      right.weight = ln.weight - ln.best_left_weight;
      right.sum = ln.sum - ln.best_left_sum;
      next.push_back(left);
      next.push_back(right);
    }

    if (!next.empty()) {
      // Route every row (including zero-weight ones) to its child.
      for (std::size_t row = 0; row < n; ++row) {
        const int node = node_of[row];
        if (node < level_first) continue;
        const TreeNode& tn = tree.nodes[node];
        if (tn.is_leaf()) continue;
        node_of[row] = (*d.columns[tn.feature])[row] <= tn.threshold ? tn.left : tn.right;
      }
    }
    level_first = next.empty() ? static_cast<int>(tree.nodes.size()) : next.front().tree_node;
    level = std::move(next);
  }

  for (LevelNode& ln : level) finalize_leaf(ln);

  if (leaf_value_per_row != nullptr) {
    leaf_value_per_row->resize(n);
    for (std::size_t row = 0; row < n; ++row) {
      int node = node_of[row];
      while (!tree.nodes[node].is_leaf()) {
        const TreeNode& tn = tree.nodes[node];
        node = (*d.columns[tn.feature])[row] <= tn.threshold ? tn.left : tn.right;
      }
      (*leaf_value_per_row)[row] = tree.nodes[node].value;
    }
  }
  return tree;
}

// Extra-trees builder: no bootstrap, one uniform random threshold per
// candidate feature, recursive preorder construction.
struct EtBuilder {
  const Design& d;
  const std::vector<double>& y;
  const SplitParams& params;
  Rng& rng;
  Tree tree;

  int build(std::vector<int>& rows, int depth) {
    double w = static_cast<double>(rows.size());
    double s = 0.0;
    for (int r : rows) s += y[r];

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[node_id].value = s / w;
    tree.nodes[node_id].n_samples = static_cast<int>(rows.size());
    if (depth >= params.max_depth || w < 2.0 * params.min_leaf_weight) return node_id;

    std::vector<int> subset;
    {
      std::uint64_t mask = draw_feature_mask(d.n_features(), params.features_per_split, rng);
      for (std::size_t f = 0; f < d.n_features(); ++f) {
        if (mask & (1ULL << f)) subset.push_back(static_cast<int>(f));
      }
    }

    double best_gain = 0.0, best_threshold = 0.0;
    int best_feature = -1;
    for (int f : subset) {
      const std::vector<double>& col = *d.columns[f];
      double lo = col[rows[0]], hi = lo;
      for (int r : rows) {
        lo = std::min(lo, col[r]);
        hi = std::max(hi, col[r]);
      }
      if (lo == hi) continue;
      const double threshold = rng.uniform(lo, hi);
      double wl = 0.0, sl = 0.0;
      for (int r : rows) {
        if (col[r] <= threshold) {
          wl += 1.0;
          sl += y[r];
        }
      }
      const double wr = w - wl;
      if (wl < params.min_leaf_weight || wr < params.min_leaf_weight) continue;
      const double sr = s - sl;
      const double gain = sl * sl / wl + sr * sr / wr - s * s / w;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = threshold;
      }
    }

    if (best_feature < 0 || best_gain <= 0.0 || best_gain < params.min_gain) return node_id;

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(rows.size());
    const std::vector<double>& col = *d.columns[best_feature];
    for (int r : rows) (col[r] <= best_threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int left_id = build(left_rows, depth + 1);
    const int right_id = build(right_rows, depth + 1);
    TreeNode& tn = tree.nodes[node_id];
    tn.feature = best_feature;
    tn.threshold = best_threshold;
    tn.gain = best_gain;
    tn.left = left_id;
    tn.right = right_id;
    return node_id;
  }
};

std::vector<const std::vector<double>*> resolve_columns(
    const std::vector<std::string>& names, const FeatureTable& table) {
  std::vector<const std::vector<double>*> cols(names.size());
  for (std::size_t f = 0; f < names.size(); ++f) {
    auto idx = table.column_index(names[f]);
    if (!idx) throw Error("predict: missing mandatory feature '" + names[f] + "'");
    cols[f] = &table.columns[*idx];
  }
  return cols;
}

}  // namespace

std::vector<double> TreeEnsemble::predict(const FeatureTable& table, int threads) const {
  const auto cols = resolve_columns(feature_names, table);
  std::vector<double> out(table.n_rows());
  const bool boosted = kind == EnsembleKind::GradientBoosting;
  parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double acc = 0.0;
      for (const Tree& t : trees) acc += t.predict_row(cols, r);
      out[r] = boosted ? base_score + learning_rate * acc
                       : acc / static_cast<double>(trees.size());
    }
  });
  return out;
}

namespace {

TreeEnsemble fit_forest_impl(const Design& d, const std::vector<double>& y, EnsembleKind kind,
                             const ForestParams& params, std::uint64_t seed, int threads) {
  if (d.n_rows < 2) throw Error("fit_forest: need >= 2 samples");
  if (params.n_estimators < 1) throw Error("fit_forest: n_estimators must be >= 1");
  if (d.n_features() > 64) throw Error("fit_forest: more than 64 features unsupported");

  TreeEnsemble model;
  model.kind = kind;
  model.feature_names = d.names;
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  SplitParams sp;
  sp.max_depth = params.max_depth;
  sp.min_leaf_weight = params.min_samples_leaf;
  sp.features_per_split = features_per_split_of(params.max_features, d.n_features());
  sp.random_thresholds = kind == EnsembleKind::ExtraTrees;

  const SortedIds sorted = kind == EnsembleKind::RandomForest ? presort(d) : SortedIds{};

  parallel_for(model.trees.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng(derive_seed(seed, "tree", t));
      if (kind == EnsembleKind::RandomForest) {
        std::vector<double> weights(d.n_rows, 0.0);
        for (std::size_t i = 0; i < d.n_rows; ++i) {
          weights[rng.below(d.n_rows)] += 1.0;
        }
        model.trees[t] = build_tree_exact(d, sorted, y, weights, sp, rng, nullptr);
      } else {
        std::vector<int> rows(d.n_rows);
        std::iota(rows.begin(), rows.end(), 0);
        EtBuilder builder{d, y, sp, rng, {}};
        builder.build(rows, 0);
        model.trees[t] = std::move(builder.tree);
      }
    }
  });
  return model;
}

}  // namespace

TreeEnsemble fit_forest(const std::vector<Sample>& samples, EnsembleKind kind,
                        const ForestParams& params, std::uint64_t seed, int threads) {
  if (kind == EnsembleKind::GradientBoosting) {
    throw Error("fit_forest: use fit_gbt for gradient boosting");
  }
  FeatureTable table = FeatureTable::from_samples(samples);
  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  Design d = design_from(table, names);
  return fit_forest_impl(d, targets_of(samples), kind, params, seed, threads);
}

namespace {

TreeEnsemble fit_gbt_impl(const Design& d, const std::vector<double>& y,
                          const GbtParams& params, std::uint64_t seed,
                          std::vector<double>* train_mse_per_stage) {
  const std::size_t n = d.n_rows;
  if (n < 2) throw Error("fit_gbt: need >= 2 samples");
  if (d.n_features() > 64) throw Error("fit_gbt: more than 64 features unsupported");

  TreeEnsemble model;
  model.kind = EnsembleKind::GradientBoosting;
  model.feature_names = d.names;
  model.learning_rate = params.learning_rate;

  // Optional early-stopping holdout, carved out before boosting starts.
  std::vector<double> weights(n, 1.0);
  std::vector<std::size_t> val_rows;
  if (params.early_stopping_rounds > 0 && params.validation_fraction > 0.0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffler(derive_seed(seed, "gbt-holdout"));
    shuffle(order, shuffler);
    const std::size_t n_val =
        std::min(n - 1, static_cast<std::size_t>(params.validation_fraction * n + 0.5));
    val_rows.assign(order.begin(), order.begin() + n_val);
    for (std::size_t row : val_rows) weights[row] = 0.0;
  }

  double base = 0.0, base_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    base += weights[i] * y[i];
    base_w += weights[i];
  }
  model.base_score = base / base_w;

  const SortedIds sorted = presort(d);

  SplitParams sp;
  sp.max_depth = params.max_depth;
  sp.min_leaf_weight = params.min_child_weight;
  sp.min_gain = params.gamma;
  sp.features_per_split = features_per_split_of(params.max_features, d.n_features());

  std::vector<double> pred(n, model.base_score);
  std::vector<double> residual(n);
  std::vector<double> leaf_values;

  double best_val_mse = std::numeric_limits<double>::infinity();
  int best_stage = 0;
  int rounds_since_best = 0;

  for (int stage = 0; stage < params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];

    Rng rng(derive_seed(seed, "gbt-stage", static_cast<std::uint64_t>(stage)));
    Tree tree = build_tree_exact(d, sorted, residual, weights, sp, rng, &leaf_values);
    for (std::size_t i = 0; i < n; ++i) pred[i] += params.learning_rate * leaf_values[i];
    model.trees.push_back(std::move(tree));

    if (train_mse_per_stage != nullptr) {
      double sse = 0.0, w_total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] == 0.0) continue;
        const double e = y[i] - pred[i];
        sse += e * e;
        w_total += 1.0;
      }
      train_mse_per_stage->push_back(sse / w_total);
    }

    if (!val_rows.empty()) {
      double sse = 0.0;
      for (std::size_t row : val_rows) {
        const double e = y[row] - pred[row];
        sse += e * e;
      }
      const double val_mse = sse / static_cast<double>(val_rows.size());
      if (val_mse < best_val_mse) {
        best_val_mse = val_mse;
        best_stage = stage + 1;
        rounds_since_best = 0;
      } else if (++rounds_since_best >= params.early_stopping_rounds) {
        model.trees.resize(static_cast<std::size_t>(best_stage));
        break;
      }
    }
  }
  return model;
}

}  // namespace

TreeEnsemble fit_gbt(const std::vector<Sample>& samples, const GbtParams& params,
                     std::uint64_t seed, std::vector<double>* train_mse_per_stage) {
  FeatureTable table = FeatureTable::from_samples(samples);
  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  Design d = design_from(table, names);
  return fit_gbt_impl(d, targets_of(samples), params, seed, train_mse_per_stage);
}

TreeEnsemble fit_gbt(const FeatureTable& table, const std::vector<double>& targets,
                     const std::vector<std::string>& feature_names, const GbtParams& params,
                     std::uint64_t seed, std::vector<double>* train_mse_per_stage) {
  Design d = design_from(table, feature_names);
  return fit_gbt_impl(d, targets, params, seed, train_mse_per_stage);
}

TreeEnsemble fit_forest(const FeatureTable& table, const std::vector<double>& targets,
                        const std::vector<std::string>& feature_names, EnsembleKind kind,
                        const ForestParams& params, std::uint64_t seed, int threads) {
  Design d = design_from(table, feature_names);
  return fit_forest_impl(d, targets, kind, params, seed, threads);
}

ImportanceReport feature_importance(const TreeEnsemble& model) {
  ImportanceReport report;
  report.feature_names = model.feature_names;
  report.shares.assign(model.feature_names.size(), 0.0);

  double total = 0.0;
  for (const Tree& tree : model.trees) {
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) continue;
      report.shares[static_cast<std::size_t>(node.feature)] += node.gain;
      total += node.gain;
    }
  }
  if (total <= 0.0) {
    report.no_splits = true;
    report.shares.assign(model.feature_names.size(), 0.0);
    return report;
  }
  for (double& s : report.shares) s /= total;

  report.ranking.resize(report.shares.size());
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return report.shares[a] > report.shares[b];
                   });
  return report;
}

}  // namespace aeromap
