#pragma once

#include <cstdint>
#include <vector>

#include "bugclass/features.hpp"

namespace bugclass {

struct LogisticParams {
  double lambda = 1e-4;
  int max_iter = 1000;
  double tol = 1e-8;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;
  std::vector<double> loss_history;  // loss after each accepted iteration, [0] = initial
};

struct Prediction {
  Label label = Label::NonBug;
  double score = 0.0;  // probability (logistic) or BUG vote fraction (forest)
};

// (1/N) sum log(1 + exp(-y (w.x + b))) + (lambda/2) |w|^2, y in {-1, +1}.
double logistic_loss(const SparseFeatureMatrix& m, const std::vector<double>& weights,
                     double bias, double lambda);
void logistic_gradient(const SparseFeatureMatrix& m, const std::vector<double>& weights,
                       double bias, double lambda, std::vector<double>& grad_w,
                       double& grad_b);

// Full-batch gradient descent from zero with step halving on loss increase.
LogisticModel train_logistic(const SparseFeatureMatrix& m, const LogisticParams& params = {});

Prediction predict_logistic(const LogisticModel& model, const SparseRow& row);

}  // namespace bugclass
