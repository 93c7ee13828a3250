#pragma once

#include "xplain/data.hpp"
#include "xplain/models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace xplain {

enum class Technique { lime, shap, lpi };
enum class TargetSpace { logodds, probability };

std::string_view to_string(Technique technique);
std::string_view to_string(TargetSpace space);
Technique parse_technique(std::string_view text);
TargetSpace parse_target_space(std::string_view text);

// The black-box output an explainer decomposes, evaluated row by row.
class TargetFunction {
 public:
  using Batch = std::function<Vector(const Matrix&)>;

  TargetFunction(std::size_t n_features, Batch batch);

  // Class-1 log-odds or probability of `model`. The model is copied.
  static TargetFunction of(const ModelHandle& model, TargetSpace space);

  std::size_t n_features() const { return n_features_; }
  Vector operator()(const Matrix& rows) const;
  double operator()(const Vector& x) const;

 private:
  std::size_t n_features_;
  Batch batch_;
};

struct LimeConfig {
  std::size_t samples = 5000;
  // Defaults to 0.75 * sqrt(n_features).
  std::optional<double> kernel_width;
  double ridge_strength = 1.0;
};

struct ShapConfig {
  std::size_t samples = 5000;
  std::size_t background_size = 100;
  // Coalitions are enumerated exhaustively up to this many features.
  std::size_t exact_max_features = 13;
};

struct LpiConfig {
  // Defaults to the number of training rows.
  std::optional<std::size_t> samples;
  bool absolute = false;
};

struct ExplainerConfig {
  LimeConfig lime;
  ShapConfig shap;
  LpiConfig lpi;

  void validate() const;
};

struct Explanation {
  Vector phi;
  Technique technique = Technique::lime;
  TargetSpace target_space = TargetSpace::logodds;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::optional<double> base_value;

  // Indices of the k entries with largest |phi|, in decreasing order; ties
  // keep the lower index first.
  std::vector<std::size_t> top_k(std::size_t k) const;
};

// Gaussian perturbations around x scaled by training standard deviations,
// categorical groups redrawn from training frequencies, exponential kernel
// on the scaled distance, weighted ridge fit. phi holds the coefficients.
Explanation explain_lime(const TargetFunction& f, const Vector& x, const Dataset& data,
                         const ExplainerConfig& config, std::uint64_t seed);

// KernelSHAP with an interventional background sample. Exact coalition
// enumeration up to `exact_max_features`, Shapley-kernel sampling with
// complement pairs beyond that.
Explanation explain_shap(const TargetFunction& f, const Vector& x, const Dataset& data,
                         const ExplainerConfig& config, std::uint64_t seed);

// Same estimator on an explicit background matrix.
Explanation explain_shap(const TargetFunction& f, const Vector& x, const Matrix& background,
                         const ShapConfig& config, std::uint64_t seed);

// phi_j = f(x) - mean_s f(x with feature j set to the s-th value of a
// shuffled training column).
Explanation explain_lpi(const TargetFunction& f, const Vector& x, const Dataset& data,
                        const ExplainerConfig& config, std::uint64_t seed);

Explanation explain(Technique technique, TargetSpace space, const ModelHandle& model,
                    const Vector& x, const Dataset& data, const ExplainerConfig& config,
                    std::uint64_t seed);

// Background rows used by explain_shap(…, data, …) for a given seed.
Matrix shap_background(const Dataset& data, std::size_t size, std::uint64_t seed);

// Replacement values used by explain_lpi for feature `feature`.
std::vector<double> lpi_replacements(const Dataset& data, std::size_t feature, std::size_t samples,
                                     std::uint64_t seed);

}  // namespace xplain
