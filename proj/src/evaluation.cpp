#include "xplain/evaluation.hpp"
#include "xplain/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace xplain {

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean 1-based rank.
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

CorrelationScore spearman(std::span<const double> phi, std::span<const double> lambda) {
  if (phi.size() != lambda.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(phi.size()) + " vs " +
                                               std::to_string(lambda.size()) + " entries");
  }
  if (phi.size() < 2) {
    throw Error(ErrorCode::VectorTooShort, "rank correlation needs at least 2 features");
  }
  const auto a = fractional_ranks(phi);
  const auto b = fractional_ranks(lambda);
  const double n = static_cast<double>(a.size());
  // Mean of 1..n is (n+1)/2 for any fractional ranking.
  const double centre = 0.5 * (n + 1.0);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - centre;
    const double db = b[i] - centre;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  CorrelationScore score;
  if (saa == 0.0 || sbb == 0.0) {
    score.degenerate = true;
    return score;
  }
  score.r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  return score;
}

CorrelationScore spearman(const Vector& phi, const Vector& lambda) {
  return spearman(std::span<const double>(phi.data(), static_cast<std::size_t>(phi.size())),
                  std::span<const double>(lambda.data(), static_cast<std::size_t>(lambda.size())));
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyTestSplit, "no scores to summarize");
  std::vector<double> v(values.begin(), values.end());
  BoxStats s;
  s.median = quantile(v, 0.5);
  s.q1 = quantile(v, 0.25);
  s.q3 = quantile(v, 0.75);
  const double reach = 1.5 * (s.q3 - s.q1);
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double x : v) {
    if (x >= s.q1 - reach) s.whisker_low = std::min(s.whisker_low, x);
    if (x <= s.q3 + reach) s.whisker_high = std::max(s.whisker_high, x);
  }
  return s;
}

InstanceResult evaluate_instance(const Vector& x, const ModelHandle& model, Technique technique,
                                 TargetSpace space, const Dataset& data,
                                 const ExplainerConfig& config, std::uint64_t seed,
                                 std::size_t instance_index) {
  InstanceResult out;
  out.explanation = explain(technique, space, model, x, data, config, seed);
  out.ground_truth = ground_truth(model, {x.data(), static_cast<std::size_t>(x.size())});
  out.score = spearman(out.explanation.phi, out.ground_truth.lambda);
  out.score.instance_index = instance_index;
  out.score.technique = technique;
  return out;
}

void summarize(DatasetScoreSet& set) {
  std::vector<double> r;
  set.degenerate_count = 0;
  set.strong_count = 0;
  for (const auto& s : set.scores) {
    r.push_back(s.r);
    set.degenerate_count += s.degenerate;
    set.strong_count += s.r > kStrongCorrelation;
  }
  set.stats = box_stats(r);
}

std::vector<DatasetScoreSet> evaluate_dataset(const Dataset& data, const ModelHandle& model,
                                              std::span<const Technique> techniques,
                                              TargetSpace space, const ExplainerConfig& config,
                                              std::uint64_t seed,
                                              std::vector<InstanceRecord>* records) {
  const auto m = static_cast<std::size_t>(data.X_test.rows());
  if (m == 0) throw Error(ErrorCode::EmptyTestSplit, "dataset '" + data.name + "' has no test rows");
  config.validate();

  std::vector<DatasetScoreSet> sets;
  for (Technique t : techniques) {
    DatasetScoreSet set;
    set.dataset = data.name;
    set.model = model.kind();
    set.technique = t;
    set.target_space = space;
    set.scores.resize(m);
    sets.push_back(std::move(set));
  }

  if (records) records->assign(m, InstanceRecord{});
  parallel_for(m, [&](std::size_t k) {
    const Vector x = data.X_test.row(static_cast<Eigen::Index>(k)).transpose();
    const std::uint64_t instance_seed = derived_seed(seed, k);
    for (std::size_t t = 0; t < sets.size(); ++t) {
      auto result =
          evaluate_instance(x, model, sets[t].technique, space, data, config, instance_seed, k);
      sets[t].scores[k] = result.score;
      if (records) {
        auto& record = (*records)[k];
        record.instance_index = k;
        record.ground_truth = std::move(result.ground_truth);
        record.explanations.push_back(std::move(result.explanation));
      }
    }
  });

  for (auto& set : sets) summarize(set);
  return sets;
}

RankTable rank_medians(const std::vector<std::string>& datasets,
                       const std::vector<Technique>& techniques,
                       const std::vector<std::vector<double>>& medians) {
  RankTable table;
  table.datasets = datasets;
  table.techniques = techniques;
  const std::size_t k = techniques.size();
  for (const auto& row : medians) {
    if (row.size() != k) throw Error(ErrorCode::MissingCell, "median row has the wrong width");
    std::vector<double> key(k);
    // Rounded and negated so the highest median receives rank 1.
    for (std::size_t t = 0; t < k; ++t) key[t] = -std::round(row[t] * 1e12) / 1e12;
    table.ranks.push_back(fractional_ranks(key));
  }
  table.average.assign(k, 0.0);
  table.stddev.assign(k, 0.0);
  const double count = static_cast<double>(table.ranks.size());
  if (table.ranks.empty()) return table;
  for (std::size_t t = 0; t < k; ++t) {
    double sum = 0.0;
    for (const auto& row : table.ranks) sum += row[t];
    const double avg = sum / count;
    double ss = 0.0;
    for (const auto& row : table.ranks) ss += (row[t] - avg) * (row[t] - avg);
    table.average[t] = avg;
    table.stddev[t] = std::sqrt(ss / count);
  }
  return table;
}

RankTable rank_techniques(std::span<const DatasetScoreSet> score_sets) {
  std::vector<std::string> datasets;
  std::vector<Technique> techniques;
  for (const auto& set : score_sets) {
    if (std::find(datasets.begin(), datasets.end(), set.dataset) == datasets.end()) {
      datasets.push_back(set.dataset);
    }
    if (std::find(techniques.begin(), techniques.end(), set.technique) == techniques.end()) {
      techniques.push_back(set.technique);
    }
  }
  std::vector<std::vector<double>> medians(datasets.size(), std::vector<double>(techniques.size()));
  std::vector<std::vector<bool>> seen(datasets.size(), std::vector<bool>(techniques.size(), false));
  for (const auto& set : score_sets) {
    const auto d = static_cast<std::size_t>(
        std::find(datasets.begin(), datasets.end(), set.dataset) - datasets.begin());
    const auto t = static_cast<std::size_t>(
        std::find(techniques.begin(), techniques.end(), set.technique) - techniques.begin());
    medians[d][t] = set.stats.median;
    seen[d][t] = true;
  }
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::size_t t = 0; t < techniques.size(); ++t) {
      if (!seen[d][t]) {
        throw Error(ErrorCode::MissingCell, "no scores for dataset '" + datasets[d] +
                                                "', technique " + std::string(to_string(techniques[t])));
      }
    }
  }
  return rank_medians(datasets, techniques, medians);
}

}  // namespace xplain
