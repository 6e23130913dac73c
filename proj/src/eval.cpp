#include "bugclass/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bugclass/error.hpp"
#include "bugclass/parallel.hpp"
#include "bugclass/rng.hpp"

namespace bugclass {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t support) {
  ClassMetrics cm;
  cm.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
  cm.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
  cm.f1 = safe_div(2.0 * cm.precision * cm.recall, cm.precision + cm.recall);
  cm.support = support;
  return cm;
}

}  // namespace

EvalMetrics evaluate(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
  if (predictions.size() != truth.size()) {
    raise(ErrorCode::LengthMismatch, "predictions and truth differ in length");
  }
  if (truth.empty()) raise(ErrorCode::LengthMismatch, "empty evaluation set");

  EvalMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m.confusion[static_cast<int>(truth[i])][static_cast<int>(predictions[i])];
  }
  const std::size_t bug_support = m.confusion[1][0] + m.confusion[1][1];
  const std::size_t nonbug_support = m.confusion[0][0] + m.confusion[0][1];
  m.bug = class_metrics(m.confusion[1][1], m.confusion[0][1], m.confusion[1][0], bug_support);
  m.nonbug = class_metrics(m.confusion[0][0], m.confusion[1][0], m.confusion[0][1],
                           nonbug_support);
  const double n = static_cast<double>(truth.size());
  m.weighted_f1 = (static_cast<double>(bug_support) * m.bug.f1 +
                   static_cast<double>(nonbug_support) * m.nonbug.f1) /
                  n;
  m.bug_f1 = m.bug.f1;
  return m;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) raise(ErrorCode::InvalidArgument, "k must be >= 2");
  if (n < static_cast<std::size_t>(k)) {
    raise(ErrorCode::InvalidArgument, "need at least k rows");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return folds;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> chrono_split(
    const SparseFeatureMatrix& m, const std::map<DocId, std::int64_t>& timestamps,
    double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    raise(ErrorCode::InvalidArgument, "train_fraction must be in (0, 1)");
  }
  struct Key {
    std::int64_t at;
    const DocId* id;
    std::size_t row;
  };
  std::vector<Key> keys;
  keys.reserve(m.rows.size());
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const auto it = timestamps.find(m.rows[r].doc_id);
    if (it == timestamps.end()) {
      raise(ErrorCode::MissingTimestamp, "no created_at for " + m.rows[r].doc_id.str());
    }
    keys.push_back({it->second, &m.rows[r].doc_id, r});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.at != b.at) return a.at < b.at;
    return *a.id < *b.id;
  });
  const auto cut = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(keys.size())));
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    (i < cut ? split.first : split.second).push_back(keys[i].row);
  }
  return split;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> chrono_split(
    const SparseFeatureMatrix& m, const Corpus& corpus, double train_fraction) {
  return chrono_split(m, corpus.timestamps(), train_fraction);
}

namespace {

SelectionResult fit_selection(const PipelineConfig& config, const SparseFeatureMatrix& train) {
  switch (config.selector) {
    case SelectorKind::Chi2:
      return select_chi2(train, config.chi2_k);
    case SelectorKind::Cfs:
      return select_cfs(train);
    case SelectorKind::None:
      break;
  }
  SelectionResult all;
  all.kept.resize(train.num_features);
  std::iota(all.kept.begin(), all.kept.end(), 0);
  all.scores.assign(train.num_features, 0.0);
  return all;
}

std::vector<Label> predict_all(const PipelineConfig& config, const SparseFeatureMatrix& train,
                               const SparseFeatureMatrix& test) {
  std::vector<Label> out;
  out.reserve(test.rows.size());
  if (config.classifier == ClassifierKind::Logistic) {
    const LogisticModel model = train_logistic(train, config.logistic);
    for (const auto& row : test.rows) out.push_back(predict_logistic(model, row).label);
  } else {
    ForestParams params = config.forest;
    params.threads = config.threads;
    const Forest model = train_forest(train, params);
    for (const auto& row : test.rows) out.push_back(predict_forest(model, row).label);
  }
  return out;
}

}  // namespace

EvalMetrics run_split(const PipelineConfig& config, const SparseFeatureMatrix& train,
                      const SparseFeatureMatrix& test) {
  const SelectionResult selection = fit_selection(config, train);
  const SparseFeatureMatrix train_sel = apply_selection(train, selection);
  const SparseFeatureMatrix test_sel = apply_selection(test, selection);
  const std::vector<Label> predictions = predict_all(config, train_sel, test_sel);
  return evaluate(predictions, test_sel.labels());
}

CvResult run_cv(const PipelineConfig& config, const SparseFeatureMatrix& m, int k,
                std::uint64_t seed) {
  const auto folds = kfold_split(m.rows.size(), k, seed);

  SelectionResult global_selection;
  if (config.select_on_all) global_selection = fit_selection(config, m);

  CvResult result;
  result.fold_metrics.resize(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    train_rows.reserve(m.rows.size() - folds[f].size());
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    }
    const SparseFeatureMatrix train = m.subset(train_rows);
    const SparseFeatureMatrix test = m.subset(folds[f]);
    try {
      PipelineConfig fold_config = config;
      fold_config.forest.seed = config.forest.seed ^ static_cast<std::uint64_t>(f);
      if (config.select_on_all) {
        const SparseFeatureMatrix train_sel = apply_selection(train, global_selection);
        const SparseFeatureMatrix test_sel = apply_selection(test, global_selection);
        const std::vector<Label> predictions = predict_all(fold_config, train_sel, test_sel);
        result.fold_metrics[f] = evaluate(predictions, test_sel.labels());
      } else {
        result.fold_metrics[f] = run_split(fold_config, train, test);
      }
    } catch (const Error& e) {
      raise(e.code(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }

  EvalMetrics& mean = result.mean;
  const double nf = static_cast<double>(folds.size());
  for (const auto& fm : result.fold_metrics) {
    mean.weighted_f1 += fm.weighted_f1 / nf;
    mean.bug_f1 += fm.bug_f1 / nf;
    mean.bug.precision += fm.bug.precision / nf;
    mean.bug.recall += fm.bug.recall / nf;
    mean.bug.f1 += fm.bug.f1 / nf;
    mean.bug.support += fm.bug.support;
    mean.nonbug.precision += fm.nonbug.precision / nf;
    mean.nonbug.recall += fm.nonbug.recall / nf;
    mean.nonbug.f1 += fm.nonbug.f1 / nf;
    mean.nonbug.support += fm.nonbug.support;
    for (int t = 0; t < 2; ++t) {
      for (int p = 0; p < 2; ++p) mean.confusion[t][p] += fm.confusion[t][p];
    }
  }
  return result;
}

DistributionSummary summarize(std::vector<double> values) {
  DistributionSummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  return s;
}

RunDistribution multirun_forest(const PipelineConfig& config, const SparseFeatureMatrix& train,
                                const SparseFeatureMatrix& test, int runs,
                                std::uint64_t master_seed) {
  if (runs < 1) raise(ErrorCode::InvalidArgument, "runs must be >= 1");
  RunDistribution dist;
  dist.values.resize(static_cast<std::size_t>(runs));
  dist.bug_values.resize(static_cast<std::size_t>(runs));
  const std::vector<Label> truth = test.labels();
  parallel_for(static_cast<std::size_t>(runs), config.threads, [&](std::size_t i) {
    ForestParams params = config.forest;
    params.seed = master_seed ^ static_cast<std::uint64_t>(i);
    params.threads = 1;  // parallelism is across runs here
    const Forest forest = train_forest(train, params);
    std::vector<Label> predictions;
    predictions.reserve(test.rows.size());
    for (const auto& row : test.rows) predictions.push_back(predict_forest(forest, row).label);
    const EvalMetrics m = evaluate(predictions, truth);
    dist.values[i] = m.weighted_f1;
    dist.bug_values[i] = m.bug_f1;
  });
  dist.summary = summarize(dist.values);
  return dist;
}

UTestResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) raise(ErrorCode::InvalidArgument, "both samples must be non-empty");
  const std::size_t n1 = a.size(), n2 = b.size();
  const std::size_t n = n1 + n2;

  struct Obs {
    double value;
    bool from_a;
  };
  std::vector<Obs> all;
  all.reserve(n);
  for (const double v : a) all.push_back({v, true});
  for (const double v : b) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Obs& x, const Obs& y) { return x.value < y.value; });

  double rank_sum_a = 0.0;
  double tie_sum = 0.0;  // sum of t^3 - t over tie groups
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && all[j].value == all[i].value) ++j;
    const double midrank = static_cast<double>(i + j + 1) / 2.0;  // 1-based average rank
    const double t = static_cast<double>(j - i);
    if (j - i > 1) tie_sum += t * t * t - t;
    for (std::size_t q = i; q < j; ++q) {
      if (all[q].from_a) rank_sum_a += midrank;
    }
    i = j;
  }

  UTestResult result;
  const double n1d = static_cast<double>(n1), n2d = static_cast<double>(n2);
  result.u_statistic = rank_sum_a - n1d * (n1d + 1.0) / 2.0;

  const double mean_u = n1d * n2d / 2.0;
  const double nd = static_cast<double>(n);
  double variance = n1d * n2d / 12.0 * (nd + 1.0);
  if (nd > 1.0) {
    variance = n1d * n2d / 12.0 * ((nd + 1.0) - tie_sum / (nd * (nd - 1.0)));
  }
  if (variance <= 0.0) {
    result.all_tied = true;
    result.z = 0.0;
    result.p_two_sided = 1.0;
    return result;
  }
  const double diff = std::max(std::abs(result.u_statistic - mean_u) - 0.5, 0.0);
  result.z = diff / std::sqrt(variance);
  const double p = std::erfc(result.z / std::sqrt(2.0));
  result.p_two_sided = std::min(1.0, std::max(p, 1e-300));
  return result;
}

}  // namespace bugclass
