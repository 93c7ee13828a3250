#include "xplain/models.hpp"
#include "xplain/parallel.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace xplain {

namespace {

// log(1 + exp(u)) without overflow.
double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clip_probability(double p) {
  return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
}

void check_instance(const ModelHandle& model, std::span<const double> x) {
  if (x.size() != model.n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "instance has " + std::to_string(x.size()) +
                                                  " features, model expects " +
                                                  std::to_string(model.n_features()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "instance contains a non-finite value");
  }
}

void check_matrix(const ModelHandle& model, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != model.n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix has " + std::to_string(X.cols()) +
                                                  " columns, model expects " +
                                                  std::to_string(model.n_features()));
  }
}

double lr_logodds(const LogisticModel& m, std::span<const double> x) {
  double sum = m.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) sum += m.weights[static_cast<Eigen::Index>(j)] * x[j];
  return sum;
}

// Per-feature constants so batch evaluation avoids a log per density.
struct GnbTerms {
  std::array<Vector, 2> log_norm;
  std::array<Vector, 2> inv_two_var;
  std::array<double, 2> log_prior;

  explicit GnbTerms(const GaussianNBModel& m) {
    for (int c = 0; c < 2; ++c) {
      log_norm[c] = -0.5 * (2.0 * std::numbers::pi * m.variances[c].array()).log();
      inv_two_var[c] = 0.5 / m.variances[c].array();
      log_prior[c] = std::log(m.priors[c]);
    }
  }

  // Summed per feature as class-1 minus class-0 terms, matching the ground-truth decomposition.
  double logodds(const GaussianNBModel& m, const double* x, Eigen::Index n) const {
    const double* mu0 = m.means[0].data();
    const double* mu1 = m.means[1].data();
    double sum = log_prior[1] - log_prior[0];
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d0 = x[j] - mu0[j];
      const double d1 = x[j] - mu1[j];
      sum += (log_norm[1][j] - d1 * d1 * inv_two_var[1][j]) - (log_norm[0][j] - d0 * d0 * inv_two_var[0][j]);
    }
    return sum;
  }
};

std::span<const double> row_span(const Matrix& X, Eigen::Index r) {
  return {X.data() + r * X.cols(), static_cast<std::size_t>(X.cols())};
}

}  // namespace

std::string_view to_string(Penalty penalty) { return penalty == Penalty::l1 ? "l1" : "l2"; }

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::logistic ? "lr" : "gnb";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "lr" || text == "logistic") return ModelKind::logistic;
  if (text == "gnb" || text == "nb") return ModelKind::gaussian_nb;
  throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(text) + "'");
}

ModelHandle::ModelHandle(Variant model, std::shared_ptr<const PreprocessSpec> preprocess)
    : model_(std::move(model)), preprocess_(std::move(preprocess)) {
  if (preprocess_ && preprocess_->n_features() != n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "preprocessing and model dimensions differ");
  }
}

ModelKind ModelHandle::kind() const {
  return std::holds_alternative<LogisticModel>(model_) ? ModelKind::logistic
                                                       : ModelKind::gaussian_nb;
}

std::size_t ModelHandle::n_features() const {
  if (const auto* lr = std::get_if<LogisticModel>(&model_)) {
    return static_cast<std::size_t>(lr->weights.size());
  }
  return static_cast<std::size_t>(std::get<GaussianNBModel>(model_).means[0].size());
}

double log_normal_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
}

double gnb_feature_log_ratio(const GaussianNBModel& model, std::size_t feature, double x) {
  const auto j = static_cast<Eigen::Index>(feature);
  return log_normal_density(x, model.means[1][j], model.variances[1][j]) -
         log_normal_density(x, model.means[0][j], model.variances[0][j]);
}

double logistic_objective(const Matrix& X, std::span<const int> y, const Vector& weights,
                          double intercept, Penalty penalty, double strength) {
  const Vector z = (X * weights).array() + intercept;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(y[static_cast<std::size_t>(i)] == 1 ? -z[i] : z[i]);
  }
  const double reg = penalty == Penalty::l1 ? weights.lpNorm<1>() : 0.5 * weights.squaredNorm();
  return loss + strength * reg;
}

LogisticModel fit_logistic(const Matrix& X, std::span<const int> y, Penalty penalty,
                           double strength, const LogisticFitOptions& options,
                           std::vector<double>* trace) {
  const Eigen::Index m = X.rows();
  const Eigen::Index n = X.cols();
  if (static_cast<std::size_t>(m) != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "label count differs from row count");
  }
  Vector target(m);
  for (Eigen::Index i = 0; i < m; ++i) target[i] = y[static_cast<std::size_t>(i)];

  // Smooth part: data loss, plus the L2 penalty when present. The L1 penalty
  // is handled by the proximal (soft-threshold) step.
  const double smooth_l2 = penalty == Penalty::l2 ? strength : 0.0;
  auto smooth = [&](const Vector& w, double b) {
    const Vector z = (X * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) loss += softplus(target[i] > 0.5 ? -z[i] : z[i]);
    return loss + 0.5 * smooth_l2 * w.squaredNorm();
  };
  auto gradient = [&](const Vector& w, double b, Vector& gw, double& gb) {
    const Vector z = (X * w).array() + b;
    Vector residual(m);
    for (Eigen::Index i = 0; i < m; ++i) residual[i] = sigmoid(z[i]) - target[i];
    gw = X.transpose() * residual + smooth_l2 * w;
    gb = residual.sum();
  };
  auto prox = [&](Vector& w, double step) {
    if (penalty != Penalty::l1 || strength == 0.0) return;
    const double threshold = step * strength;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = w[j];
      w[j] = v > threshold ? v - threshold : (v < -threshold ? v + threshold : 0.0);
    }
  };
  auto nonsmooth = [&](const Vector& w) {
    return penalty == Penalty::l1 ? strength * w.lpNorm<1>() : 0.0;
  };

  LogisticModel model;
  model.penalty = penalty;
  model.strength = strength;
  model.weights = Vector::Zero(n);
  model.intercept = 0.0;

  Vector w = model.weights;
  double b = 0.0;
  double smooth_value = smooth(w, b);
  double objective = smooth_value + nonsmooth(w);
  double step = 1.0;
  Vector gw(n);
  double gb = 0.0;

  int iter = 0;
  bool converged = false;
  gradient(w, b, gw, gb);
  Vector gw_next(n);
  double gb_next = 0.0;
  for (; iter < options.max_iterations; ++iter) {
    step = std::min(step * 2.0, 1e6);

    Vector w_next;
    double b_next = 0.0;
    double smooth_next = 0.0;
    for (;;) {
      w_next = w - step * gw;
      b_next = b - step * gb;
      prox(w_next, step);
      smooth_next = smooth(w_next, b_next);
      const Vector dw = w_next - w;
      const double db = b_next - b;
      const double move = dw.squaredNorm() + db * db;
      const double model_bound = smooth_value + gw.dot(dw) + gb * db + move / (2.0 * step);
      const double excess = smooth_next - model_bound;
      gradient(w_next, b_next, gw_next, gb_next);
      if (excess <= 0.0 || step < 1e-300) break;
      // Near the optimum the excess drowns in rounding of the loss sum; there
      // the curvature along the step, taken from gradient differences, decides.
      const double slack = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(smooth_value);
      if (excess <= slack && (gw_next - gw).dot(dw) + (gb_next - gb) * db <= move / step) break;
      step *= 0.5;
    }
    gw.swap(gw_next);
    gb = gb_next;

    const double objective_next = smooth_next + nonsmooth(w_next);
    // Gradient mapping: zero exactly at a minimizer of the composite objective,
    // unlike the objective change which shrinks with the square of the gradient.
    const double mapping =
        std::max((w_next - w).lpNorm<Eigen::Infinity>(), std::abs(b_next - b)) / step;
    w = std::move(w_next);
    b = b_next;
    smooth_value = smooth_next;
    objective = objective_next;
    if (trace) trace->push_back(objective);
    if (mapping <= options.tolerance * std::max(1.0, std::abs(objective))) {
      converged = true;
      ++iter;
      break;
    }
  }

  model.weights = w;
  model.intercept = b;
  model.iterations = iter;
  model.objective = objective;
  model.converged = converged;
  return model;
}

LogisticModel train_logistic(const Dataset& dataset, int trials, std::uint64_t seed,
                             const SearchOptions& options, std::vector<SearchTrial>* history) {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "search needs at least one trial");
  const auto& y = dataset.y_train;
  if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) {
    throw Error(ErrorCode::InvalidConfig, "training split must contain both classes");
  }

  // Inner stratified validation split of the training rows.
  std::array<std::vector<Eigen::Index>, 2> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(static_cast<Eigen::Index>(i));
  auto split_rng = derived_rng(seed, 0x1a11u);
  std::vector<Eigen::Index> fit_rows;
  std::vector<Eigen::Index> val_rows;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), split_rng);
    auto n_val = static_cast<std::size_t>(
        std::round(options.validation_fraction * static_cast<double>(rows.size())));
    n_val = std::min(n_val, rows.size() - 1);
    val_rows.insert(val_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit_rows.insert(fit_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
  }
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  if (val_rows.empty()) val_rows = fit_rows;

  const Matrix X_fit = dataset.X_train(fit_rows, Eigen::all);
  const Matrix X_val = dataset.X_train(val_rows, Eigen::all);
  std::vector<int> y_fit;
  std::vector<int> y_val;
  for (auto r : fit_rows) y_fit.push_back(y[static_cast<std::size_t>(r)]);
  for (auto r : val_rows) y_val.push_back(y[static_cast<std::size_t>(r)]);

  std::vector<SearchTrial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t t) {
    auto rng = derived_rng(seed, 0x7121u, t);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> strength_dist(0.0, options.max_strength);
    SearchTrial trial;
    trial.penalty = coin(rng) == 0 ? Penalty::l1 : Penalty::l2;
    trial.strength = strength_dist(rng);
    const auto fitted = fit_logistic(X_fit, y_fit, trial.penalty, trial.strength, options.fit);
    trial.converged = fitted.converged;
    if (fitted.converged) {
      trial.validation_accuracy = accuracy(ModelHandle(fitted), X_val, y_val);
    }
    results[t] = trial;
  });
  if (history) *history = results;

  const SearchTrial* best = nullptr;
  for (const auto& trial : results) {
    if (!trial.converged) continue;
    if (!best || trial.validation_accuracy > best->validation_accuracy) best = &trial;
  }
  if (!best) {
    throw Error(ErrorCode::NonConvergence, "no search trial converged within " +
                                               std::to_string(options.fit.max_iterations) +
                                               " iterations");
  }
  return fit_logistic(dataset.X_train, y, best->penalty, best->strength, options.fit);
}

GaussianNBModel train_gnb(const Dataset& dataset) {
  const Matrix& X = dataset.X_train;
  const auto& y = dataset.y_train;
  const Eigen::Index n = X.cols();
  std::array<Eigen::Index, 2> counts{0, 0};
  for (int label : y) ++counts[label];
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error(ErrorCode::InvalidConfig, "training split must contain both classes");
  }

  GaussianNBModel model;
  const Eigen::RowVectorXd total_mean = X.colwise().mean();
  const Eigen::RowVectorXd total_var =
      (X.rowwise() - total_mean).array().square().colwise().sum() / static_cast<double>(X.rows());
  const double max_var = total_var.size() > 0 ? total_var.maxCoeff() : 0.0;
  model.variance_floor = 1e-9 * (max_var > 0.0 ? max_var : 1.0);

  for (int c = 0; c < 2; ++c) {
    Vector sum = Vector::Zero(n);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) sum += X.row(static_cast<Eigen::Index>(i)).transpose();
    }
    const Vector mu = sum / static_cast<double>(counts[c]);
    Vector ss = Vector::Zero(n);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) ss += (X.row(static_cast<Eigen::Index>(i)).transpose() - mu).array().square().matrix();
    }
    Vector var = ss / static_cast<double>(counts[c]);
    var = var.cwiseMax(model.variance_floor);
    model.means[c] = mu;
    model.variances[c] = var;
    model.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(y.size());
  }
  return model;
}

double predict_logodds(const ModelHandle& model, std::span<const double> x) {
  check_instance(model, x);
  if (const auto* lr = std::get_if<LogisticModel>(&model.model())) return lr_logodds(*lr, x);
  const auto& nb = std::get<GaussianNBModel>(model.model());
  return GnbTerms(nb).logodds(nb, x.data(), static_cast<Eigen::Index>(x.size()));
}

double predict_proba(const ModelHandle& model, std::span<const double> x) {
  check_instance(model, x);
  if (const auto* lr = std::get_if<LogisticModel>(&model.model())) {
    return clip_probability(sigmoid(lr_logodds(*lr, x)));
  }
  return clip_probability(sigmoid(predict_logodds(model, x)));
}

Vector predict_logodds(const ModelHandle& model, const Matrix& X) {
  check_matrix(model, X);
  Vector out(X.rows());
  if (const auto* lr = std::get_if<LogisticModel>(&model.model())) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] = lr_logodds(*lr, row_span(X, r));
  } else {
    const auto& nb = std::get<GaussianNBModel>(model.model());
    const GnbTerms terms(nb);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      out[r] = terms.logodds(nb, X.data() + r * X.cols(), X.cols());
    }
  }
  return out;
}

Vector predict_proba(const ModelHandle& model, const Matrix& X) {
  check_matrix(model, X);
  Vector out(X.rows());
  if (const auto* lr = std::get_if<LogisticModel>(&model.model())) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      out[r] = clip_probability(sigmoid(lr_logodds(*lr, row_span(X, r))));
    }
  } else {
    const auto& nb = std::get<GaussianNBModel>(model.model());
    const GnbTerms terms(nb);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      out[r] = clip_probability(sigmoid(terms.logodds(nb, X.data() + r * X.cols(), X.cols())));
    }
  }
  return out;
}

double accuracy(const ModelHandle& model, const Matrix& X, std::span<const int> y) {
  if (X.rows() == 0) return 0.0;
  const Vector logodds = predict_logodds(model, X);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const int predicted = logodds[r] > 0.0 ? 1 : 0;
    if (predicted == y[static_cast<std::size_t>(r)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(X.rows());
}

}  // namespace xplain
