#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bugclass/corpus.hpp"
#include "bugclass/features.hpp"
#include "bugclass/forest.hpp"
#include "bugclass/logistic.hpp"

namespace bugclass {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalMetrics {
  ClassMetrics bug;
  ClassMetrics nonbug;
  double weighted_f1 = 0.0;
  double bug_f1 = 0.0;
  // confusion[truth][prediction], index 1 = BUG
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
};

EvalMetrics evaluate(const std::vector<Label>& predictions, const std::vector<Label>& truth);

// Seeded uniform shuffle dealt into k chunks whose sizes differ by at most 1.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed);

// Oldest train_fraction of rows for training, newest for testing; ties on the
// timestamp break by doc_id, so the split is independent of row order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> chrono_split(
    const SparseFeatureMatrix& m, const std::map<DocId, std::int64_t>& timestamps,
    double train_fraction);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> chrono_split(
    const SparseFeatureMatrix& m, const Corpus& corpus, double train_fraction);

enum class SelectorKind { None, Chi2, Cfs };
enum class ClassifierKind { Logistic, Forest };

struct PipelineConfig {
  SelectorKind selector = SelectorKind::Chi2;
  std::size_t chi2_k = 200;
  bool select_on_all = false;  // fit selection on the full matrix (leaky variant)
  ClassifierKind classifier = ClassifierKind::Logistic;
  LogisticParams logistic;
  ForestParams forest;
  int threads = 1;
};

struct CvResult {
  EvalMetrics mean;                     // P/R/F fields averaged over folds,
                                        // supports and confusion summed
  std::vector<EvalMetrics> fold_metrics;
};

CvResult run_cv(const PipelineConfig& config, const SparseFeatureMatrix& m, int k,
                std::uint64_t seed);

// Train on fixed train rows, evaluate on fixed test rows, once.
EvalMetrics run_split(const PipelineConfig& config, const SparseFeatureMatrix& train,
                      const SparseFeatureMatrix& test);

struct DistributionSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

struct RunDistribution {
  std::vector<double> values;      // weighted F1 per run, in run order
  std::vector<double> bug_values;  // bug-class F1 per run
  DistributionSummary summary;
};

// Type-7 quartiles (linear interpolation) over a copy of the values.
DistributionSummary summarize(std::vector<double> values);

// Run i trains a forest seeded master_seed ^ i on the fixed train matrix and
// scores the fixed test matrix. Runs may execute on several threads; the
// distribution does not depend on the thread count.
RunDistribution multirun_forest(const PipelineConfig& config, const SparseFeatureMatrix& train,
                                const SparseFeatureMatrix& test, int runs,
                                std::uint64_t master_seed);

struct UTestResult {
  double u_statistic = 0.0;
  double z = 0.0;
  double p_two_sided = 1.0;
  bool all_tied = false;
};

// Midrank U statistic for the first sample; two-sided p via the normal
// approximation with tie-corrected variance and 0.5 continuity correction.
UTestResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bugclass
