#include "xplain/groundtruth.hpp"

#include <cmath>
#include <string>

namespace xplain {

namespace {

void check_dimension(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch, "instance has " + std::to_string(actual) +
                                                  " features, model expects " +
                                                  std::to_string(expected));
  }
}

}  // namespace

double GroundTruth::total() const {
  double sum = offset;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) sum += lambda[j];
  return sum;
}

GroundTruth ground_truth_lr(const LogisticModel& model, std::span<const double> x) {
  check_dimension(static_cast<std::size_t>(model.weights.size()), x.size());
  GroundTruth gt;
  gt.offset = model.intercept;
  gt.lambda.resize(model.weights.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    gt.lambda[jj] = model.weights[jj] * x[j];
  }
  return gt;
}

GroundTruth ground_truth_gnb(const GaussianNBModel& model, std::span<const double> x) {
  check_dimension(static_cast<std::size_t>(model.means[0].size()), x.size());
  GroundTruth gt;
  gt.offset = std::log(model.priors[1]) - std::log(model.priors[0]);
  gt.lambda.resize(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    gt.lambda[static_cast<Eigen::Index>(j)] = gnb_feature_log_ratio(model, j, x[j]);
  }
  return gt;
}

GroundTruth ground_truth(const ModelHandle& model, std::span<const double> x) {
  if (const auto* lr = std::get_if<LogisticModel>(&model.model())) return ground_truth_lr(*lr, x);
  return ground_truth_gnb(std::get<GaussianNBModel>(model.model()), x);
}

}  // namespace xplain
