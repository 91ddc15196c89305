#pragma once

#include "impartial/dataset.hpp"
#include "impartial/linalg.hpp"

#include <cstdint>
#include <vector>

namespace impartial {

struct ForestConfig {
  int trees = 50;
  int max_depth = 8;
  int min_leaf = 5;
  bool bootstrap = true;
  /// Candidate features per split; 0 means all of them.
  int features_per_split = 0;
  /// Split thresholds per feature. Features with fewer distinct values are split exactly.
  int max_bins = 64;
  std::uint64_t seed = 1;
};

/// Bagged regression trees with variance-reduction splits.
class BaggedForest {
 public:
  /// Throws ContractError for empty data, trees < 1, max_depth < 0 or min_leaf < 1.
  static BaggedForest fit(const Matrix& features, const Vector& response, const ForestConfig& config);

  Vector predict(const Matrix& features) const;
  /// Average over trees whose bootstrap sample left the row out; rows that were
  /// never left out get the full-forest prediction. Without bootstrap this is
  /// the in-sample prediction.
  const Vector& out_of_bag() const { return oob_; }
  std::size_t tree_count() const { return trees_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;  // go left when x <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  static double predict_row(const Tree& tree, const Matrix& features, Eigen::Index row);

  std::vector<Tree> trees_;
  Eigen::Index feature_count_ = 0;
  Vector oob_;
};

/// Centered [S | X | W] columns. The forest is allowed to see S.
Matrix tree_features(const EncodedDesign& design);

/// Fits a forest on `train` and predicts the rows of `test`.
Vector bagged_tree_predict(const EncodedDesign& train, const EncodedDesign& test, int trees,
                           std::uint64_t seed);

}  // namespace impartial
