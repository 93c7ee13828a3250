#include "doctest.h"
#include "support.hpp"

#include "xplain/evaluation.hpp"

using namespace xplain;

namespace {

double rho(std::vector<double> a, std::vector<double> b) { return spearman(a, b).r; }

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected xplain::Error");
  return ErrorCode::InvalidConfig;
}

DatasetScoreSet score_set(const std::string& dataset, Technique t, std::vector<double> r) {
  DatasetScoreSet s;
  s.dataset = dataset;
  s.technique = t;
  for (std::size_t i = 0; i < r.size(); ++i) s.scores.push_back({r[i], i, t, false});
  summarize(s);
  return s;
}

}  // namespace

TEST_CASE("spearman hand cases") {
  CHECK(rho({1, 2, 3}, {10, 20, 30}) == 1.0);
  CHECK(rho({3, 2, 1}, {10, 20, 30}) == -1.0);
  CHECK(rho({1, 3, 2, 4}, {1, 2, 3, 4}) == 0.8);
  const auto flat = spearman(std::vector<double>{5, 5, 5}, std::vector<double>{1, 2, 3});
  CHECK(flat.r == 0.0);
  CHECK(flat.degenerate);
}

TEST_CASE("spearman preconditions") {
  CHECK(code_of([] { rho({1}, {2}); }) == ErrorCode::VectorTooShort);
  CHECK(code_of([] { rho({1, 2}, {1, 2, 3}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("fractional ranks average tied positions") {
  CHECK(fractional_ranks(std::vector<double>{10, 30, 20, 30}) == std::vector<double>{1, 3.5, 2, 3.5});
}

TEST_CASE("spearman matches the brute-force oracle, is symmetric and monotone-invariant") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> len(2, 30);
  std::uniform_int_distribution<int> level(0, 4);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Every third pair draws from a small set of values to force ties.
      a[i] = trial % 3 == 0 ? level(rng) : normal(rng);
      b[i] = trial % 3 == 1 ? level(rng) : normal(rng);
    }
    const auto s = spearman(a, b);
    worst = std::max(worst, std::abs(s.r - xtest::oracle_spearman(a, b)));
    CHECK(std::abs(s.r) <= 1.0);
    if (s.degenerate) CHECK(s.r == 0.0);
    CHECK(spearman(b, a).r == s.r);

    std::vector<double> up(n);
    std::vector<double> down(n);
    for (std::size_t i = 0; i < n; ++i) {
      up[i] = std::exp(a[i]) + 3.0;
      down[i] = -a[i] * a[i] * a[i];
    }
    if (trial % 3 != 0) {
      CHECK(rho(a, up) == 1.0);
      CHECK(rho(a, down) == -1.0);
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("box statistics use interpolated quartiles and Tukey whiskers") {
  const auto s = box_stats(std::vector<double>{0.2, 0.4, 0.6, 0.8});
  CHECK(s.median == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.q1 == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(s.q3 == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(s.whisker_low == 0.2);
  CHECK(s.whisker_high == 0.8);

  const auto single = box_stats(std::vector<double>{0.3});
  CHECK(single.median == 0.3);

  const auto outlier = box_stats(std::vector<double>{0.5, 0.5, 0.6, 0.6, -1.0});
  CHECK(outlier.whisker_low == 0.5);
  CHECK(code_of([] { box_stats(std::vector<double>{}); }) == ErrorCode::EmptyTestSplit);
}

TEST_CASE("summarize counts degenerate and strong scores") {
  DatasetScoreSet s;
  s.scores = {{0.9, 0, Technique::lime, false}, {0.0, 1, Technique::lime, true}, {0.7, 2, Technique::lime, false}};
  summarize(s);
  CHECK(s.degenerate_count == 1);
  CHECK(s.strong_count == 1);
  CHECK(s.stats.median == 0.7);
}

TEST_CASE("rank_medians: strict order, two-way tie, single dataset") {
  const std::vector<Technique> t{Technique::lime, Technique::shap, Technique::lpi};
  auto table = rank_medians({"a"}, t, {{0.9, 0.5, 0.1}});
  CHECK(table.ranks[0] == std::vector<double>{1, 2, 3});
  CHECK(table.average == std::vector<double>{1, 2, 3});
  CHECK(table.stddev == std::vector<double>{0, 0, 0});

  table = rank_medians({"a"}, t, {{0.7, 0.7, 0.1}});
  CHECK(table.ranks[0] == std::vector<double>{1.5, 1.5, 3});

  // Differences below the 12th decimal count as ties.
  table = rank_medians({"a"}, t, {{0.7, 0.7 + 1e-14, 0.1}});
  CHECK(table.ranks[0] == std::vector<double>{1.5, 1.5, 3});
}

TEST_CASE("rank_medians: averages, population std and row sums") {
  const std::vector<Technique> t{Technique::lime, Technique::shap, Technique::lpi};
  const auto table = rank_medians({"a", "b", "c"}, t, {{0.1, 0.5, 0.9}, {0.2, 0.8, 0.6}, {0.3, 0.3, 0.9}});
  for (const auto& row : table.ranks) CHECK(row[0] + row[1] + row[2] == 6.0);
  CHECK(table.average[2] == doctest::Approx(4.0 / 3.0));
  // Ranks of lpi: 1, 2, 1 -> population std sqrt(2/9).
  CHECK(table.stddev[2] == doctest::Approx(std::sqrt(2.0 / 9.0)));
}

TEST_CASE("rank_techniques builds the table from score sets and rejects gaps") {
  std::vector<DatasetScoreSet> sets{score_set("a", Technique::lime, {0.1, 0.2}),
                                    score_set("a", Technique::shap, {0.9, 0.8}),
                                    score_set("b", Technique::lime, {0.5}),
                                    score_set("b", Technique::shap, {0.4})};
  const auto table = rank_techniques(sets);
  CHECK(table.datasets == std::vector<std::string>{"a", "b"});
  CHECK(table.ranks[0] == std::vector<double>{2, 1});
  CHECK(table.ranks[1] == std::vector<double>{1, 2});
  sets.pop_back();
  CHECK(code_of([&] { rank_techniques(sets); }) == ErrorCode::MissingCell);
}

namespace {

struct Problem {
  Dataset data;
  ModelHandle model;
};

Problem lr_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix train = xtest::random_matrix(rng, 200, 5);
  const Matrix test = xtest::random_matrix(rng, 12, 5);
  Vector w(5);
  w << 1.2, -0.7, 0.4, 2.0, -1.5;
  return {xtest::numeric_dataset(train, xtest::logistic_labels(rng, train, w, 0.0), test,
                                 xtest::logistic_labels(rng, test, w, 0.0)),
          xtest::lr_handle(w, 0.0)};
}

}  // namespace

TEST_CASE("evaluate_instance: ground truth as explanation scores 1; LPI on standardized LR tracks it") {
  auto p = lr_problem(81);
  const Vector x = p.data.X_test.row(0).transpose();
  const auto gt = ground_truth(p.model, {x.data(), 5});
  CHECK(spearman(gt.lambda, gt.lambda).r == 1.0);

  ExplainerConfig config;
  const auto lpi = evaluate_instance(x, p.model, Technique::lpi, TargetSpace::logodds, p.data, config, 3, 0);
  // phi_j = w_j (x_j - column mean); with near-zero training means the ranks
  // agree unless two lambdas are closer than the shift.
  CHECK(lpi.score.r > 0.8);
  CHECK(lpi.explanation.phi.size() == lpi.ground_truth.lambda.size());
}

TEST_CASE("evaluate_dataset: ordering, determinism, seed derivation and scale invariance") {
  auto p = lr_problem(82);
  const std::vector<Technique> techniques{Technique::lime, Technique::shap, Technique::lpi};
  ExplainerConfig config;
  config.lime.samples = 400;

  std::vector<InstanceRecord> records;
  const auto a = evaluate_dataset(p.data, p.model, techniques, TargetSpace::logodds, config, 5, &records);
  const auto b = evaluate_dataset(p.data, p.model, techniques, TargetSpace::logodds, config, 5);
  REQUIRE(a.size() == 3);
  REQUIRE(records.size() == 12);
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(a[t].scores.size() == 12);
    for (std::size_t k = 0; k < 12; ++k) {
      CHECK(a[t].scores[k].instance_index == k);
      CHECK(a[t].scores[k].r == b[t].scores[k].r);
    }
    CHECK(a[t].stats.median == b[t].stats.median);
    std::vector<double> r;
    for (const auto& s : a[t].scores) r.push_back(s.r);
    CHECK(box_stats(r).median == a[t].stats.median);
  }

  // Instance k is explained with derived_seed(seed, k).
  const Vector x3 = p.data.X_test.row(3).transpose();
  const auto direct = explain(Technique::lime, TargetSpace::logodds, p.model, x3, p.data, config, derived_seed(5, 3));
  CHECK(records[3].explanations[0].phi == direct.phi);

  // Doubling the model scales LR phi (logodds) but never its ranks.
  auto w = std::get<LogisticModel>(p.model.model()).weights;
  const auto doubled = xtest::lr_handle(2.0 * w, 0.0);
  const auto c = evaluate_dataset(p.data, doubled, techniques, TargetSpace::logodds, config, 5);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t k = 0; k < 12; ++k) CHECK(c[t].scores[k].r == a[t].scores[k].r);
  }
}

TEST_CASE("evaluate_dataset rejects empty test splits and single-feature data") {
  auto p = lr_problem(83);
  const std::vector<Technique> techniques{Technique::lpi};
  Dataset empty = p.data;
  empty.X_test.resize(0, 5);
  empty.y_test.clear();
  CHECK(code_of([&] { evaluate_dataset(empty, p.model, techniques, TargetSpace::logodds, {}, 1); }) ==
        ErrorCode::EmptyTestSplit);

  std::mt19937_64 rng(1);
  const auto one = xtest::numeric_dataset(xtest::random_matrix(rng, 10, 1), std::vector<int>(10, 0),
                                          xtest::random_matrix(rng, 2, 1), {0, 1});
  CHECK(code_of([&] {
          evaluate_dataset(one, xtest::lr_handle(Vector::Ones(1), 0.0), techniques, TargetSpace::logodds, {}, 1);
        }) == ErrorCode::VectorTooShort);
}
