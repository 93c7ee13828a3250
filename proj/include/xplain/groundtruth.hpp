#pragma once

#include "xplain/models.hpp"

#include <span>

namespace xplain {

// Analytic decomposition of the class-1 log-odds of one instance:
//   predict_logodds(x) == offset + sum_j lambda[j]
// The offset (intercept or log prior ratio) has no feature rank and is kept
// out of `lambda`.
struct GroundTruth {
  Vector lambda;
  double offset = 0.0;
  int target_class = 1;

  // offset + sum(lambda), accumulated left to right.
  double total() const;
};

// lambda_j = w_j * x_j, offset = w_0.
GroundTruth ground_truth_lr(const LogisticModel& model, std::span<const double> x);

// lambda_j = log N(x_j | mu_j^1, var_j^1) - log N(x_j | mu_j^0, var_j^0),
// offset = log P(y=1) - log P(y=0).
GroundTruth ground_truth_gnb(const GaussianNBModel& model, std::span<const double> x);

GroundTruth ground_truth(const ModelHandle& model, std::span<const double> x);

}  // namespace xplain
