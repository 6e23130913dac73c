#pragma once

#include <cstdint>
#include <vector>

#include "bugclass/features.hpp"
#include "bugclass/logistic.hpp"  // Prediction

namespace bugclass {

struct ForestParams {
  int n_trees = 100;
  int mtry = 0;  // 0 = floor(sqrt(num_features))
  std::uint64_t seed = 42;
  int threads = 1;
};

struct TreeNode {
  std::int32_t feature = -1;   // -1 for leaves
  double threshold = 0.0;      // go left when value <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t counts[2] = {0, 0};  // [nonbug, bug] training samples at the node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::uint32_t num_features = 0;
  int mtry = 0;
  std::uint64_t seed = 0;
};

double gini_impurity(std::uint64_t count_nonbug, std::uint64_t count_bug);

// Bagged CART trees, Gini splits over midpoint thresholds. Tree t uses an
// RNG seeded with seed ^ t, and bootstrap draws index a canonical row order
// sorted by doc_id, so the forest is reproducible for any thread count and
// row permutation.
Forest train_forest(const SparseFeatureMatrix& m, const ForestParams& params = {});

Label predict_tree(const DecisionTree& tree, const SparseRow& row);
Prediction predict_forest(const Forest& forest, const SparseRow& row);

}  // namespace bugclass
