#include "impartial/forest.hpp"

#include "impartial/errors.hpp"
#include "impartial/random.hpp"

#include <algorithm>
#include <cstdint>
#include <span>

namespace impartial {
namespace {

using Code = std::uint16_t;

struct BinnedFeatures {
  std::vector<std::vector<double>> thresholds;  // per feature, ascending
  std::vector<Code> codes;                      // column-major, n x p
  Eigen::Index n = 0;

  Code code(Eigen::Index row, Eigen::Index feature) const {
    return codes[static_cast<std::size_t>(feature * n + row)];
  }
};

std::vector<double> feature_thresholds(const Vector& column, int max_bins) {
  std::vector<double> uniq(column.data(), column.data() + column.size());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<double> th;
  if (uniq.size() < 2) return th;
  const std::size_t gaps = uniq.size() - 1;
  if (max_bins <= 0 || gaps <= static_cast<std::size_t>(max_bins)) {
    for (std::size_t i = 0; i < gaps; ++i) th.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    return th;
  }
  const auto bins = static_cast<std::size_t>(max_bins);
  for (std::size_t k = 1; k <= bins; ++k) {
    const std::size_t idx = std::max<std::size_t>(1, k * uniq.size() / (bins + 1));
    th.push_back(0.5 * (uniq[idx - 1] + uniq[idx]));
  }
  th.erase(std::unique(th.begin(), th.end()), th.end());
  return th;
}

BinnedFeatures bin_features(const Matrix& features, int max_bins) {
  BinnedFeatures b;
  b.n = features.rows();
  b.codes.resize(static_cast<std::size_t>(features.rows() * features.cols()));
  for (Eigen::Index f = 0; f < features.cols(); ++f) {
    b.thresholds.push_back(feature_thresholds(features.col(f), std::min(max_bins, 65000)));
    const auto& th = b.thresholds.back();
    for (Eigen::Index i = 0; i < b.n; ++i) {
      const auto pos = std::lower_bound(th.begin(), th.end(), features(i, f)) - th.begin();
      b.codes[static_cast<std::size_t>(f * b.n + i)] = static_cast<Code>(pos);
    }
  }
  return b;
}

class TreeBuilder {
 public:
  TreeBuilder(const BinnedFeatures& bins, const Vector& y, const ForestConfig& config, Rng& rng)
      : bins_(bins), y_(y), config_(config), rng_(rng) {
    for (std::size_t f = 0; f < bins_.thresholds.size(); ++f) all_features_.push_back(f);
  }

  template <typename Node>
  void build(std::vector<Node>& nodes, std::span<Eigen::Index> rows, int depth) {
    const int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double sum = 0.0, sumsq = 0.0;
    for (auto r : rows) {
      sum += y_[r];
      sumsq += y_[r] * y_[r];
    }
    const double n = static_cast<double>(rows.size());
    nodes[self].value = sum / n;
    const double ss = sumsq - sum * sum / n;
    const auto min_leaf = static_cast<std::size_t>(config_.min_leaf);
    if (depth >= config_.max_depth || rows.size() < 2 * min_leaf || ss <= 1e-14 * sumsq) return;

    auto candidates = all_features_;
    if (config_.features_per_split > 0 &&
        static_cast<std::size_t>(config_.features_per_split) < candidates.size()) {
      rng_.shuffle(std::span<std::size_t>(candidates));
      candidates.resize(static_cast<std::size_t>(config_.features_per_split));
      std::sort(candidates.begin(), candidates.end());
    }

    double best_gain = 1e-12 * ss;
    std::size_t best_feature = 0;
    std::size_t best_split = 0;
    bool found = false;
    for (auto f : candidates) {
      const auto& th = bins_.thresholds[f];
      if (th.empty()) continue;
      counts_.assign(th.size() + 1, 0);
      sums_.assign(th.size() + 1, 0.0);
      for (auto r : rows) {
        const Code c = bins_.code(r, static_cast<Eigen::Index>(f));
        ++counts_[c];
        sums_[c] += y_[r];
      }
      std::size_t left_n = 0;
      double left_sum = 0.0;
      for (std::size_t k = 0; k < th.size(); ++k) {
        left_n += counts_[k];
        left_sum += sums_[k];
        const std::size_t right_n = rows.size() - left_n;
        if (left_n < min_leaf) continue;
        if (right_n < min_leaf) break;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                            right_sum * right_sum / static_cast<double>(right_n) - sum * sum / n;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_split = k;
          found = true;
        }
      }
    }
    if (!found) return;

    const auto fi = static_cast<Eigen::Index>(best_feature);
    auto mid = std::partition(rows.begin(), rows.end(), [&](Eigen::Index r) {
      return bins_.code(r, fi) <= best_split;
    });
    const auto left_size = static_cast<std::size_t>(mid - rows.begin());
    nodes[self].feature = static_cast<int>(best_feature);
    nodes[self].threshold = bins_.thresholds[best_feature][best_split];
    nodes[self].left = static_cast<int>(nodes.size());
    build(nodes, rows.first(left_size), depth + 1);
    nodes[self].right = static_cast<int>(nodes.size());
    build(nodes, rows.subspan(left_size), depth + 1);
  }

 private:
  const BinnedFeatures& bins_;
  const Vector& y_;
  const ForestConfig& config_;
  Rng& rng_;
  std::vector<std::size_t> all_features_;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
};

}  // namespace

BaggedForest BaggedForest::fit(const Matrix& features, const Vector& response,
                               const ForestConfig& config) {
  if (features.rows() == 0 || response.size() == 0) {
    throw ContractError("bagged trees: empty training data");
  }
  if (features.rows() != response.size()) {
    throw ContractError("bagged trees: feature rows do not match response length");
  }
  if (config.trees < 1) throw ContractError("bagged trees: need at least one tree");
  if (config.max_depth < 0) throw ContractError("bagged trees: max_depth must be >= 0");
  if (config.min_leaf < 1) throw ContractError("bagged trees: min_leaf must be >= 1");
  if (!all_finite(features) || !all_finite(response)) {
    throw InputError("bagged trees: non-finite training values");
  }

  const Eigen::Index n = features.rows();
  const BinnedFeatures bins = bin_features(features, config.max_bins);

  BaggedForest forest;
  forest.feature_count_ = features.cols();
  Vector oob_sum = Vector::Zero(n);
  Eigen::VectorXi oob_count = Eigen::VectorXi::Zero(n);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::vector<int> in_bag(static_cast<std::size_t>(n));

  for (int t = 0; t < config.trees; ++t) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t), 0x7ee5));
    if (config.bootstrap) {
      std::fill(in_bag.begin(), in_bag.end(), 0);
      for (auto& r : rows) {
        r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        ++in_bag[static_cast<std::size_t>(r)];
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    }
    Tree tree;
    TreeBuilder builder(bins, response, config, rng);
    builder.build(tree, std::span<Eigen::Index>(rows), 0);
    if (config.bootstrap) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (in_bag[static_cast<std::size_t>(i)] == 0) {
          oob_sum[i] += predict_row(tree, features, i);
          ++oob_count[i];
        }
      }
    }
    forest.trees_.push_back(std::move(tree));
  }

  const Vector full = forest.predict(features);
  forest.oob_ = full;
  if (config.bootstrap) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (oob_count[i] > 0) forest.oob_[i] = oob_sum[i] / oob_count[i];
    }
  }
  return forest;
}

double BaggedForest::predict_row(const Tree& tree, const Matrix& features, Eigen::Index row) {
  int node = 0;
  while (tree[static_cast<std::size_t>(node)].feature >= 0) {
    const Node& nd = tree[static_cast<std::size_t>(node)];
    node = features(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return tree[static_cast<std::size_t>(node)].value;
}

Vector BaggedForest::predict(const Matrix& features) const {
  if (features.cols() != feature_count_) {
    throw ContractError("bagged trees: expected " + std::to_string(feature_count_) +
                        " feature columns, got " + std::to_string(features.cols()));
  }
  Vector out = Vector::Zero(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double s = 0.0;
    for (const auto& tree : trees_) s += predict_row(tree, features, i);
    out[i] = s / static_cast<double>(trees_.size());
  }
  return out;
}

Matrix tree_features(const EncodedDesign& design) {
  return hcat({&design.S, &design.X, &design.W});
}

Vector bagged_tree_predict(const EncodedDesign& train, const EncodedDesign& test, int trees,
                           std::uint64_t seed) {
  ForestConfig config;
  config.trees = trees;
  config.seed = seed;
  const auto forest = BaggedForest::fit(tree_features(train), train.y, config);
  return forest.predict(tree_features(test));
}

}  // namespace impartial
