#include "bugclass/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bugclass/error.hpp"
#include "bugclass/parallel.hpp"
#include "bugclass/rng.hpp"

namespace bugclass {

double gini_impurity(std::uint64_t count_nonbug, std::uint64_t count_bug) {
  const double n = static_cast<double>(count_nonbug + count_bug);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(count_nonbug) / n;
  const double p1 = static_cast<double>(count_bug) / n;
  return 1.0 - (p0 * p0 + p1 * p1);
}

namespace {

struct TreeBuilder {
  const SparseFeatureMatrix& m;
  Rng rng;
  int mtry;
  DecisionTree tree;
  std::vector<std::uint32_t> feature_scratch;
  std::vector<std::pair<double, std::uint8_t>> values;  // (value, is_bug) within a node

  TreeBuilder(const SparseFeatureMatrix& matrix, std::uint64_t seed, int mtry_count)
      : m(matrix), rng(seed), mtry(mtry_count) {}

  // mtry distinct features; rejection when sparse enough, partial
  // Fisher-Yates otherwise.
  void sample_features(std::vector<std::uint32_t>& out) {
    const std::uint32_t total = m.num_features;
    out.clear();
    if (static_cast<std::uint32_t>(mtry) * 2 <= total) {
      while (out.size() < static_cast<std::size_t>(mtry)) {
        const auto f = static_cast<std::uint32_t>(rng.below(total));
        if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
      }
    } else {
      feature_scratch.resize(total);
      std::iota(feature_scratch.begin(), feature_scratch.end(), 0);
      for (int j = 0; j < mtry; ++j) {
        const auto pick = j + static_cast<std::uint32_t>(rng.below(total - j));
        std::swap(feature_scratch[j], feature_scratch[pick]);
        out.push_back(feature_scratch[j]);
      }
    }
  }

  std::int32_t build(std::vector<std::uint32_t>& samples) {
    const auto node_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::uint32_t counts[2] = {0, 0};
    for (const std::uint32_t s : samples) {
      ++counts[m.rows[s].label == Label::Bug ? 1 : 0];
    }
    tree.nodes[node_index].counts[0] = counts[0];
    tree.nodes[node_index].counts[1] = counts[1];

    if (counts[0] == 0 || counts[1] == 0 || samples.size() < 2) return node_index;

    const double parent_gini = gini_impurity(counts[0], counts[1]);
    std::vector<std::uint32_t> candidates;
    sample_features(candidates);

    double best_score = parent_gini - 1e-12;
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;

    const double n_node = static_cast<double>(samples.size());
    for (const std::uint32_t f : candidates) {
      values.clear();
      for (const std::uint32_t s : samples) {
        values.emplace_back(m.rows[s].value_of(f),
                            m.rows[s].label == Label::Bug ? 1 : 0);
      }
      std::sort(values.begin(), values.end());
      std::uint32_t left[2] = {0, 0};
      // candidate thresholds: midpoints between consecutive distinct values
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        ++left[values[i].second];
        if (values[i].first == values[i + 1].first) continue;
        const double threshold = values[i].first + (values[i + 1].first - values[i].first) / 2.0;
        const std::uint32_t right[2] = {counts[0] - left[0], counts[1] - left[1]};
        const double nl = static_cast<double>(left[0] + left[1]);
        const double nr = n_node - nl;
        const double score = (nl / n_node) * gini_impurity(left[0], left[1]) +
                             (nr / n_node) * gini_impurity(right[0], right[1]);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<std::int32_t>(f);
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return node_index;  // no split improves impurity

    std::vector<std::uint32_t> left_samples, right_samples;
    for (const std::uint32_t s : samples) {
      const double v = m.rows[s].value_of(static_cast<std::uint32_t>(best_feature));
      (v <= best_threshold ? left_samples : right_samples).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    tree.nodes[node_index].feature = best_feature;
    tree.nodes[node_index].threshold = best_threshold;
    const std::int32_t left_child = build(left_samples);
    tree.nodes[node_index].left = left_child;
    const std::int32_t right_child = build(right_samples);
    tree.nodes[node_index].right = right_child;
    return node_index;
  }
};

}  // namespace

Forest train_forest(const SparseFeatureMatrix& m, const ForestParams& params) {
  if (m.rows.size() < 2) raise(ErrorCode::InvalidArgument, "need at least 2 examples");
  if (params.n_trees < 1) raise(ErrorCode::InvalidArgument, "n_trees must be >= 1");
  bool has_bug = false, has_nonbug = false;
  for (const auto& row : m.rows) {
    (row.label == Label::Bug ? has_bug : has_nonbug) = true;
  }
  if (!has_bug || !has_nonbug) {
    raise(ErrorCode::SingleClass, "training data must contain both classes");
  }

  const int mtry =
      params.mtry > 0
          ? std::min<int>(params.mtry, static_cast<int>(m.num_features))
          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(m.num_features)))));

  // Canonical row order: bootstrap indexes are positions in this ordering,
  // which makes training invariant to the input row permutation.
  std::vector<std::uint32_t> canonical(m.rows.size());
  std::iota(canonical.begin(), canonical.end(), 0);
  std::sort(canonical.begin(), canonical.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (m.rows[a].doc_id != m.rows[b].doc_id) return m.rows[a].doc_id < m.rows[b].doc_id;
    return a < b;
  });

  Forest forest;
  forest.num_features = m.num_features;
  forest.mtry = mtry;
  forest.seed = params.seed;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));

  const std::size_t n = m.rows.size();
  parallel_for(forest.trees.size(), params.threads, [&](std::size_t t) {
    TreeBuilder builder(m, params.seed ^ static_cast<std::uint64_t>(t), mtry);
    std::vector<std::uint32_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = canonical[builder.rng.below(n)];
    }
    builder.build(sample);
    forest.trees[t] = std::move(builder.tree);
  });
  return forest;
}

Label predict_tree(const DecisionTree& tree, const SparseRow& row) {
  std::int32_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& nd = tree.nodes[node];
    const double v = row.value_of(static_cast<std::uint32_t>(nd.feature));
    node = v <= nd.threshold ? nd.left : nd.right;
  }
  const auto& leaf = tree.nodes[node];
  // leaf ties go to NONBUG
  return leaf.counts[1] > leaf.counts[0] ? Label::Bug : Label::NonBug;
}

Prediction predict_forest(const Forest& forest, const SparseRow& row) {
  std::size_t bug_votes = 0;
  for (const auto& tree : forest.trees) {
    if (predict_tree(tree, row) == Label::Bug) ++bug_votes;
  }
  const double fraction = static_cast<double>(bug_votes) / static_cast<double>(forest.trees.size());
  return {fraction >= 0.5 ? Label::Bug : Label::NonBug, fraction};
}

}  // namespace bugclass
