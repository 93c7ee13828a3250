#include "xplain/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace xplain {

namespace {

constexpr std::uint32_t kLimeStream = 0x11e0u;
constexpr std::uint32_t kShapStream = 0x5a40u;
constexpr std::uint32_t kLpiStream = 0x1e1u;

void check_inputs(const TargetFunction& f, const Vector& x, const Dataset& data) {
  if (static_cast<std::size_t>(x.size()) != f.n_features() || data.n_features() != f.n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "instance, dataset and model dimensions differ");
  }
  if (data.X_train.rows() == 0) {
    throw Error(ErrorCode::InvalidConfig, "explainers need a non-empty training split");
  }
}

double binomial(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(n - k) + 1.0));
}

// Group index of every encoded column.
std::vector<std::size_t> group_of_column(const Dataset& data) {
  std::vector<std::size_t> owner(data.n_features(), 0);
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    for (std::size_t k = 0; k < data.groups[g].size; ++k) owner[data.groups[g].first + k] = g;
  }
  return owner;
}

}  // namespace

std::string_view to_string(Technique technique) {
  switch (technique) {
    case Technique::lime: return "lime";
    case Technique::shap: return "shap";
    case Technique::lpi: return "lpi";
  }
  return "unknown";
}

std::string_view to_string(TargetSpace space) {
  return space == TargetSpace::logodds ? "logodds" : "probability";
}

Technique parse_technique(std::string_view text) {
  if (text == "lime") return Technique::lime;
  if (text == "shap") return Technique::shap;
  if (text == "lpi") return Technique::lpi;
  throw Error(ErrorCode::UnknownTechnique, "'" + std::string(text) + "'");
}

TargetSpace parse_target_space(std::string_view text) {
  if (text == "logodds") return TargetSpace::logodds;
  if (text == "probability") return TargetSpace::probability;
  throw Error(ErrorCode::InvalidConfig, "unknown target space '" + std::string(text) + "'");
}

TargetFunction::TargetFunction(std::size_t n_features, Batch batch)
    : n_features_(n_features), batch_(std::move(batch)) {}

TargetFunction TargetFunction::of(const ModelHandle& model, TargetSpace space) {
  if (space == TargetSpace::logodds) {
    return {model.n_features(), [model](const Matrix& rows) { return predict_logodds(model, rows); }};
  }
  return {model.n_features(), [model](const Matrix& rows) { return predict_proba(model, rows); }};
}

Vector TargetFunction::operator()(const Matrix& rows) const { return batch_(rows); }

double TargetFunction::operator()(const Vector& x) const {
  Matrix row = x.transpose();
  return batch_(row)[0];
}

void ExplainerConfig::validate() const {
  if (lime.samples < 1 || shap.samples < 1 || shap.background_size < 1 ||
      (lpi.samples && *lpi.samples < 1)) {
    throw Error(ErrorCode::InvalidConfig, "sample counts must be at least 1");
  }
  if (lime.kernel_width && !(*lime.kernel_width > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "LIME kernel width must be positive");
  }
  if (!(lime.ridge_strength >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "LIME ridge strength must be non-negative");
  }
}

std::vector<std::size_t> Explanation::top_k(std::size_t k) const {
  std::vector<std::size_t> order(static_cast<std::size_t>(phi.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(phi[static_cast<Eigen::Index>(a)]) > std::abs(phi[static_cast<Eigen::Index>(b)]);
  });
  order.resize(std::min(k, order.size()));
  return order;
}

Explanation explain_lime(const TargetFunction& f, const Vector& x, const Dataset& data,
                         const ExplainerConfig& config, std::uint64_t seed) {
  config.validate();
  check_inputs(f, x, data);
  const auto n = static_cast<Eigen::Index>(data.n_features());
  const auto samples = static_cast<Eigen::Index>(config.lime.samples);
  const Matrix& train = data.X_train;
  const double width = config.lime.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(n)));

  std::vector<double> spread(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector col = train.col(j);
    spread[static_cast<std::size_t>(j)] = sample_std({col.data(), static_cast<std::size_t>(col.size())});
  }

  // Categorical groups are redrawn as a whole from the training category
  // frequencies (column sums of the indicator block).
  std::vector<std::discrete_distribution<std::size_t>> category_draw(data.groups.size());
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    const auto& group = data.groups[g];
    if (!group.categorical) continue;
    std::vector<double> freq(group.size);
    for (std::size_t k = 0; k < group.size; ++k) {
      freq[k] = train.col(static_cast<Eigen::Index>(group.first + k)).sum();
    }
    category_draw[g] = std::discrete_distribution<std::size_t>(freq.begin(), freq.end());
  }

  auto rng = derived_rng(seed, kLimeStream);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix Z(samples, n);
  Vector sq_distance = Vector::Zero(samples);
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (std::size_t gi = 0; gi < data.groups.size(); ++gi) {
      const auto& g = data.groups[gi];
      const auto first = static_cast<Eigen::Index>(g.first);
      if (!g.categorical) {
        const double sd = spread[g.first];
        const double offset = normal(rng);
        Z(s, first) = x[first] + sd * offset;
        if (sd > 0.0) sq_distance[s] += offset * offset;
        continue;
      }
      const std::size_t chosen = category_draw[gi](rng);
      bool same = true;
      for (std::size_t k = 0; k < g.size; ++k) {
        const auto col = first + static_cast<Eigen::Index>(k);
        Z(s, col) = k == chosen ? 1.0 : 0.0;
        same = same && Z(s, col) == x[col];
      }
      if (!same) sq_distance[s] += 1.0;
    }
  }

  const Vector weights = (-sq_distance.array() / (width * width)).exp();
  if ((weights.array() < 1e-30).all()) {
    throw Error(ErrorCode::DegenerateWeights, "every LIME sample weight is below 1e-30");
  }
  const Vector targets = f(Z);

  // Weighted ridge with an unpenalized intercept: centre by weighted means.
  const double total = weights.sum();
  const Eigen::RowVectorXd z_mean = (weights.transpose() * Z) / total;
  const double t_mean = weights.dot(targets) / total;
  const Matrix Zc = Z.rowwise() - z_mean;
  const Vector tc = targets.array() - t_mean;
  Matrix gram = Zc.transpose() * weights.asDiagonal() * Zc;
  gram.diagonal().array() += config.lime.ridge_strength;
  const Vector rhs = Zc.transpose() * (weights.asDiagonal() * tc);

  Explanation out;
  out.phi = gram.ldlt().solve(rhs);
  if (!out.phi.allFinite()) out.phi = gram.completeOrthogonalDecomposition().solve(rhs);
  out.technique = Technique::lime;
  out.sample_count = config.lime.samples;
  out.seed = seed;
  return out;
}

Matrix shap_background(const Dataset& data, std::size_t size, std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(data.X_train.rows());
  if (rows == 0 || size == 0) throw Error(ErrorCode::EmptyBackground, "no background rows");
  std::vector<Eigen::Index> picked;
  if (rows <= size) {
    picked.resize(rows);
    std::iota(picked.begin(), picked.end(), 0);
  } else {
    std::vector<Eigen::Index> all(rows);
    std::iota(all.begin(), all.end(), 0);
    auto rng = derived_rng(seed, kShapStream, 0u);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), static_cast<std::ptrdiff_t>(size), rng);
  }
  return data.X_train(picked, Eigen::all);
}

Explanation explain_shap(const TargetFunction& f, const Vector& x, const Dataset& data,
                         const ExplainerConfig& config, std::uint64_t seed) {
  config.validate();
  check_inputs(f, x, data);
  return explain_shap(f, x, shap_background(data, config.shap.background_size, seed), config.shap,
                      seed);
}

Explanation explain_shap(const TargetFunction& f, const Vector& x, const Matrix& background,
                         const ShapConfig& config, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n < 1) throw Error(ErrorCode::DimensionMismatch, "KernelSHAP needs at least one feature");
  if (background.rows() == 0) throw Error(ErrorCode::EmptyBackground, "background is empty");
  if (static_cast<std::size_t>(background.cols()) != n || f.n_features() != n) {
    throw Error(ErrorCode::DimensionMismatch, "background, instance and model dimensions differ");
  }

  const double base = f(background).mean();
  const double fx = f(x);

  Explanation out;
  out.technique = Technique::shap;
  out.seed = seed;
  out.base_value = base;
  out.phi = Vector::Zero(static_cast<Eigen::Index>(n));
  if (n == 1) {
    out.phi[0] = fx - base;
    out.sample_count = 0;
    return out;
  }

  // Coalition masks and their regression weights.
  std::vector<std::vector<bool>> masks;
  std::vector<double> weights;
  if (n <= config.exact_max_features) {
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t code = 1; code < full; ++code) {
      std::vector<bool> mask(n);
      std::size_t size = 0;
      for (std::size_t j = 0; j < n; ++j) {
        mask[j] = (code >> j) & 1u;
        size += mask[j];
      }
      masks.push_back(std::move(mask));
      weights.push_back(static_cast<double>(n - 1) /
                        (binomial(n, size) * static_cast<double>(size) * static_cast<double>(n - size)));
    }
  } else {
    // Coalition size k is drawn with probability proportional to the total
    // kernel mass of that size, (n-1) / (k (n-k)); the subset is then uniform
    // and paired with its complement, so every sample has unit weight.
    auto rng = derived_rng(seed, kShapStream, 1u);
    std::vector<double> size_mass(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
      size_mass[k - 1] = static_cast<double>(n - 1) / static_cast<double>(k * (n - k));
    }
    std::discrete_distribution<std::size_t> pick_size(size_mass.begin(), size_mass.end());
    std::vector<std::size_t> order(n);
    const std::size_t pairs = std::max<std::size_t>(1, config.samples / 2);
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t k = pick_size(rng) + 1;
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
      }
      std::vector<bool> mask(n, false);
      for (std::size_t i = 0; i < k; ++i) mask[order[i]] = true;
      std::vector<bool> complement(n);
      for (std::size_t j = 0; j < n; ++j) complement[j] = !mask[j];
      masks.push_back(std::move(mask));
      masks.push_back(std::move(complement));
      weights.push_back(1.0);
      weights.push_back(1.0);
    }
  }

  // Coalition values: x on S, background row off S, averaged over rows.
  const Eigen::Index bg_rows = background.rows();
  Matrix work = background;
  std::vector<double> values(masks.size());
  for (std::size_t c = 0; c < masks.size(); ++c) {
    work = background;
    for (std::size_t j = 0; j < n; ++j) {
      if (masks[c][j]) work.col(static_cast<Eigen::Index>(j)).setConstant(x[static_cast<Eigen::Index>(j)]);
    }
    values[c] = f(work).sum() / static_cast<double>(bg_rows);
  }

  // Weighted least squares under base + sum(phi) = f(x); the last feature
  // is eliminated: phi_n = f(x) - base - sum_{j<n} phi_j.
  const auto rows = static_cast<Eigen::Index>(masks.size());
  const auto free = static_cast<Eigen::Index>(n - 1);
  Matrix A(rows, free);
  Vector b(rows);
  const double span = fx - base;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& mask = masks[static_cast<std::size_t>(r)];
    const double last = mask[n - 1] ? 1.0 : 0.0;
    const double sw = std::sqrt(weights[static_cast<std::size_t>(r)]);
    for (Eigen::Index j = 0; j < free; ++j) {
      A(r, j) = sw * ((mask[static_cast<std::size_t>(j)] ? 1.0 : 0.0) - last);
    }
    b[r] = sw * (values[static_cast<std::size_t>(r)] - base - last * span);
  }
  const Vector solved = A.colPivHouseholderQr().solve(b);
  out.phi.head(free) = solved;
  out.phi[free] = span - solved.sum();
  out.sample_count = masks.size();
  return out;
}

std::vector<double> lpi_replacements(const Dataset& data, std::size_t feature, std::size_t samples,
                                     std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(data.X_train.rows());
  if (rows == 0) throw Error(ErrorCode::InvalidConfig, "LPI needs a non-empty training split");
  if (feature >= data.n_features()) throw Error(ErrorCode::IndexOutOfRange, "feature index");
  // All columns of a one-hot group share one row permutation, so the values
  // swapped into each column come from the same training rows.
  const std::size_t group = group_of_column(data)[feature];
  auto rng = derived_rng(seed, kLpiStream, group);
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> values(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    values[s] = data.X_train(static_cast<Eigen::Index>(perm[s % rows]), static_cast<Eigen::Index>(feature));
  }
  return values;
}

Explanation explain_lpi(const TargetFunction& f, const Vector& x, const Dataset& data,
                        const ExplainerConfig& config, std::uint64_t seed) {
  config.validate();
  check_inputs(f, x, data);
  const auto n = static_cast<Eigen::Index>(x.size());
  const std::size_t samples =
      config.lpi.samples.value_or(static_cast<std::size_t>(data.X_train.rows()));

  Matrix batch = x.transpose().replicate(static_cast<Eigen::Index>(samples) + 1, 1);
  Explanation out;
  out.technique = Technique::lpi;
  out.seed = seed;
  out.sample_count = samples;
  out.phi.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto values = lpi_replacements(data, static_cast<std::size_t>(j), samples, seed);
    // Row 0 keeps x unchanged so f(x) comes from the same evaluation path.
    batch.col(j).setConstant(x[j]);
    for (std::size_t s = 0; s < samples; ++s) batch(static_cast<Eigen::Index>(s) + 1, j) = values[s];
    const Vector outputs = f(batch);
    // Mean of differences, so an unchanged output contributes exactly zero.
    const double diff = (outputs[0] - outputs.tail(static_cast<Eigen::Index>(samples)).array()).mean();
    out.phi[j] = config.lpi.absolute ? std::abs(diff) : diff;
    batch.col(j).setConstant(x[j]);
  }
  return out;
}

Explanation explain(Technique technique, TargetSpace space, const ModelHandle& model,
                    const Vector& x, const Dataset& data, const ExplainerConfig& config,
                    std::uint64_t seed) {
  const auto f = TargetFunction::of(model, space);
  Explanation out;
  switch (technique) {
    case Technique::lime: out = explain_lime(f, x, data, config, seed); break;
    case Technique::shap: out = explain_shap(f, x, data, config, seed); break;
    case Technique::lpi: out = explain_lpi(f, x, data, config, seed); break;
  }
  out.target_space = space;
  return out;
}

}  // namespace xplain
