#pragma once

#include "xplain/explainers.hpp"
#include "xplain/groundtruth.hpp"

#include <span>
#include <string>
#include <vector>

namespace xplain {

struct CorrelationScore {
  double r = 0.0;
  std::size_t instance_index = 0;
  Technique technique = Technique::lime;
  // Either input had constant ranks; r is then 0.
  bool degenerate = false;
};

// Fractional (average) ranks, 1-based.
std::vector<double> fractional_ranks(std::span<const double> values);

// Spearman's rho: Pearson correlation of the two fractional-rank vectors.
CorrelationScore spearman(std::span<const double> phi, std::span<const double> lambda);
CorrelationScore spearman(const Vector& phi, const Vector& lambda);

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  // Tukey whiskers: extreme scores within 1.5 IQR of the quartiles.
  double whisker_low = 0.0;
  double whisker_high = 0.0;
};

BoxStats box_stats(std::span<const double> values);

// Count of scores strictly above the 0.7 shading threshold used in box plots.
inline constexpr double kStrongCorrelation = 0.7;

struct DatasetScoreSet {
  std::string dataset;
  ModelKind model = ModelKind::logistic;
  Technique technique = Technique::lime;
  TargetSpace target_space = TargetSpace::logodds;
  std::vector<CorrelationScore> scores;
  BoxStats stats;
  std::size_t degenerate_count = 0;
  std::size_t strong_count = 0;
};

struct InstanceResult {
  Explanation explanation;
  GroundTruth ground_truth;
  CorrelationScore score;
};

// Explain x, extract its ground truth, and correlate the two.
InstanceResult evaluate_instance(const Vector& x, const ModelHandle& model, Technique technique,
                                 TargetSpace space, const Dataset& data,
                                 const ExplainerConfig& config, std::uint64_t seed,
                                 std::size_t instance_index = 0);

struct InstanceRecord {
  std::size_t instance_index = 0;
  GroundTruth ground_truth;
  // One per requested technique, in request order.
  std::vector<Explanation> explanations;
};

// Every test instance under every technique. Instance k is explained with
// derived_seed(seed, k); instances may run concurrently, results are ordered
// by instance index.
std::vector<DatasetScoreSet> evaluate_dataset(const Dataset& data, const ModelHandle& model,
                                              std::span<const Technique> techniques,
                                              TargetSpace space, const ExplainerConfig& config,
                                              std::uint64_t seed,
                                              std::vector<InstanceRecord>* records = nullptr);

// Recomputes stats, degenerate and strong counts from `scores`.
void summarize(DatasetScoreSet& set);

struct RankTable {
  std::vector<std::string> datasets;
  std::vector<Technique> techniques;
  // ranks[d][t]: 1 = highest median; exact ties share the mean position.
  std::vector<std::vector<double>> ranks;
  std::vector<double> average;
  // Population standard deviation over datasets.
  std::vector<double> stddev;
};

// Medians are compared after rounding to 12 decimal digits.
RankTable rank_techniques(std::span<const DatasetScoreSet> score_sets);

// Lower-level form: medians[d][t] for datasets x techniques.
RankTable rank_medians(const std::vector<std::string>& datasets,
                       const std::vector<Technique>& techniques,
                       const std::vector<std::vector<double>>& medians);

}  // namespace xplain
