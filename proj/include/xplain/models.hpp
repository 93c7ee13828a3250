#pragma once

#include "xplain/common.hpp"
#include "xplain/data.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace xplain {

enum class Penalty { l1, l2 };

std::string_view to_string(Penalty penalty);

struct LogisticModel {
  Vector weights;
  double intercept = 0.0;
  Penalty penalty = Penalty::l2;
  double strength = 0.0;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

struct GaussianNBModel {
  // Index 0 is class 0, index 1 is class 1.
  std::array<Vector, 2> means;
  std::array<Vector, 2> variances;
  std::array<double, 2> priors{0.5, 0.5};
  double variance_floor = 0.0;
};

enum class ModelKind { logistic, gaussian_nb };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// A trained classifier together with the preprocessing it was trained under.
class ModelHandle {
 public:
  using Variant = std::variant<LogisticModel, GaussianNBModel>;

  ModelHandle(Variant model, std::shared_ptr<const PreprocessSpec> preprocess = nullptr);

  ModelKind kind() const;
  std::size_t n_features() const;
  const Variant& model() const { return model_; }
  const PreprocessSpec* preprocess() const { return preprocess_.get(); }

 private:
  Variant model_;
  std::shared_ptr<const PreprocessSpec> preprocess_;
};

// Objective minimized for a single (penalty, strength) fit:
//   sum_i log(1 + exp(-s_i (w_0 + W.x_i))) + strength * R(W)
// with s_i = +-1, R = ||W||_1 (L1) or 0.5 ||W||_2^2 (L2); w_0 unpenalized.
double logistic_objective(const Matrix& X, std::span<const int> y, const Vector& weights,
                          double intercept, Penalty penalty, double strength);

struct LogisticFitOptions {
  // Stop when the gradient mapping sup-norm is below tolerance * max(1, objective).
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

// Proximal gradient with backtracking line search. When `trace` is given it
// receives the objective value after every iteration.
LogisticModel fit_logistic(const Matrix& X, std::span<const int> y, Penalty penalty,
                           double strength, const LogisticFitOptions& options = {},
                           std::vector<double>* trace = nullptr);

struct SearchOptions {
  int trials = 100;
  double max_strength = 4.0;
  double validation_fraction = 0.2;
  LogisticFitOptions fit;
};

struct SearchTrial {
  Penalty penalty = Penalty::l2;
  double strength = 0.0;
  bool converged = false;
  double validation_accuracy = 0.0;
};

// Random search over penalty in {L1, L2} and strength ~ U(0, max_strength),
// scored by accuracy on a seeded stratified inner validation split; the best
// trial is refit on the full training split. Trials run concurrently but draw
// their randomness from (seed, trial index) only.
LogisticModel train_logistic(const Dataset& dataset, int trials, std::uint64_t seed,
                             const SearchOptions& options = {},
                             std::vector<SearchTrial>* history = nullptr);

GaussianNBModel train_gnb(const Dataset& dataset);

double predict_proba(const ModelHandle& model, std::span<const double> x);
double predict_logodds(const ModelHandle& model, std::span<const double> x);

// Row-wise versions for explainers; inputs are assumed finite.
Vector predict_proba(const ModelHandle& model, const Matrix& X);
Vector predict_logodds(const ModelHandle& model, const Matrix& X);

double accuracy(const ModelHandle& model, const Matrix& X, std::span<const int> y);

// Log density of N(mean, variance) at x.
double log_normal_density(double x, double mean, double variance);

// Per-feature log density ratio log N(x|class 1) - log N(x|class 0).
double gnb_feature_log_ratio(const GaussianNBModel& model, std::size_t feature, double x);

inline constexpr double kProbabilityClip = 1e-12;

}  // namespace xplain
