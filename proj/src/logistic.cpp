#include "bugclass/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "bugclass/error.hpp"

namespace bugclass {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(-margin)) without overflow
double softplus_neg(double margin) {
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

double row_score(const SparseRow& row, const std::vector<double>& weights, double bias) {
  double score = bias;
  for (const auto& item : row.items) score += weights[item.ordinal] * item.value;
  return score;
}

void check_two_classes(const SparseFeatureMatrix& m) {
  bool has_bug = false, has_nonbug = false;
  for (const auto& row : m.rows) {
    (row.label == Label::Bug ? has_bug : has_nonbug) = true;
  }
  if (!has_bug || !has_nonbug) {
    raise(ErrorCode::SingleClass, "training data must contain both classes");
  }
}

}  // namespace

double logistic_loss(const SparseFeatureMatrix& m, const std::vector<double>& weights,
                     double bias, double lambda) {
  double loss = 0.0;
  for (const auto& row : m.rows) {
    const double y = row.label == Label::Bug ? 1.0 : -1.0;
    loss += softplus_neg(y * row_score(row, weights, bias));
  }
  loss /= static_cast<double>(m.rows.size());
  double norm2 = 0.0;
  for (const double w : weights) norm2 += w * w;
  return loss + 0.5 * lambda * norm2;
}

void logistic_gradient(const SparseFeatureMatrix& m, const std::vector<double>& weights,
                       double bias, double lambda, std::vector<double>& grad_w,
                       double& grad_b) {
  grad_w.assign(weights.size(), 0.0);
  grad_b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(m.rows.size());
  for (const auto& row : m.rows) {
    const double y = row.label == Label::Bug ? 1.0 : -1.0;
    const double coeff = -y * sigmoid(-y * row_score(row, weights, bias)) * inv_n;
    for (const auto& item : row.items) grad_w[item.ordinal] += coeff * item.value;
    grad_b += coeff;
  }
  for (std::size_t f = 0; f < weights.size(); ++f) grad_w[f] += lambda * weights[f];
}

LogisticModel train_logistic(const SparseFeatureMatrix& m, const LogisticParams& params) {
  if (m.rows.empty()) raise(ErrorCode::InvalidArgument, "empty training set");
  check_two_classes(m);

  LogisticModel model;
  model.lambda = params.lambda;
  model.weights.assign(m.num_features, 0.0);
  model.bias = 0.0;

  double loss = logistic_loss(m, model.weights, model.bias, params.lambda);
  model.loss_history.push_back(loss);

  std::vector<double> grad_w;
  std::vector<double> trial_w(m.num_features);
  double grad_b = 0.0;
  double step = 1.0;

  for (int iter = 0; iter < params.max_iter; ++iter) {
    logistic_gradient(m, model.weights, model.bias, params.lambda, grad_w, grad_b);

    double trial_loss = 0.0;
    double trial_b = 0.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t f = 0; f < trial_w.size(); ++f) {
        trial_w[f] = model.weights[f] - step * grad_w[f];
      }
      trial_b = model.bias - step * grad_b;
      trial_loss = logistic_loss(m, trial_w, trial_b, params.lambda);
      if (trial_loss <= loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction progress left

    model.weights.swap(trial_w);
    model.bias = trial_b;
    const double prev = loss;
    loss = trial_loss;
    model.loss_history.push_back(loss);
    step = std::min(step * 2.0, 1e6);

    const double rel_change = std::abs(prev - loss) / std::max(std::abs(prev), 1e-12);
    if (rel_change < params.tol) break;
  }
  return model;
}

Prediction predict_logistic(const LogisticModel& model, const SparseRow& row) {
  const double p = sigmoid(row_score(row, model.weights, model.bias));
  return {p >= 0.5 ? Label::Bug : Label::NonBug, p};
}

}  // namespace bugclass
