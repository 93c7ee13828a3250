#include "doctest.h"
#include "support.hpp"

#include "xplain/data.hpp"

#include <set>

using namespace xplain;

namespace {

DatasetConfig config_for(const std::filesystem::path& csv, const std::string& target,
                         const std::string& positive) {
  DatasetConfig c;
  c.name = "t";
  c.csv_path = csv;
  c.target_column = target;
  c.positive_label = positive;
  return c;
}

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

RawTable labelled_table(std::size_t positives, std::size_t negatives) {
  RawTable t;
  RawColumn col;
  col.spec.name = "v";
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    col.numbers.push_back(static_cast<double>(i));
    t.y.push_back(i < positives ? 1 : 0);
  }
  t.columns.push_back(col);
  return t;
}

}  // namespace

TEST_CASE("parse_csv handles quoting, escaped quotes and blank lines") {
  const auto rows = parse_csv("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\n\n2,,z\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == std::vector<std::string>{"1", "x,y", "say \"hi\""});
  CHECK(rows[2] == std::vector<std::string>{"2", "", "z"});
  CHECK(code_of([] { parse_csv("a,b\n\"open,1\n"); }) == ErrorCode::MalformedCsv);
}

TEST_CASE("three-row CSV maps labels to 0/1 and keeps both features") {
  xtest::TempDir dir("csv");
  const auto csv = dir.write("t.csv", "a,b,label\n1,2,yes\n3,4,no\n5,6,yes\n");
  const auto table = load_csv(csv, config_for(csv, "label", "yes"));
  REQUIRE(table.columns.size() == 2);
  CHECK(table.y == std::vector<int>{1, 0, 1});
  CHECK(table.columns[0].spec.kind == ColumnKind::numeric);
  CHECK(table.columns[1].numbers == std::vector<double>{2, 4, 6});
}

TEST_CASE("load_csv error contracts") {
  xtest::TempDir dir("csv-errors");
  SUBCASE("missing file") {
    const auto path = dir.path() / "absent.csv";
    CHECK(code_of([&] { load_csv(path, config_for(path, "y", "1")); }) == ErrorCode::MissingFile);
  }
  SUBCASE("target column absent") {
    const auto csv = dir.write("t.csv", "a,b\n1,2\n");
    CHECK(code_of([&] { load_csv(csv, config_for(csv, "y", "1")); }) ==
          ErrorCode::TargetColumnAbsent);
  }
  SUBCASE("three label values") {
    const auto csv = dir.write("t.csv", "a,y\n1,p\n2,q\n3,r\n");
    CHECK(code_of([&] { load_csv(csv, config_for(csv, "y", "p")); }) == ErrorCode::NonBinaryTarget);
  }
  SUBCASE("non-numeric cell in a declared numeric column") {
    const auto csv = dir.write("t.csv", "a,y\n1,p\nfoo,q\n");
    auto config = config_for(csv, "y", "p");
    config.categorical_columns = std::vector<std::string>{};
    CHECK(code_of([&] { load_csv(csv, config); }) == ErrorCode::UnparseableNumeric);
  }
  SUBCASE("ragged row") {
    const auto csv = dir.write("t.csv", "a,b,y\n1,2,p\n3,q\n");
    CHECK(code_of([&] { load_csv(csv, config_for(csv, "y", "p")); }) == ErrorCode::MalformedCsv);
  }
}

TEST_CASE("categorical column lists categories in first-appearance order") {
  xtest::TempDir dir("csv-cat");
  const auto csv = dir.write("t.csv", "colour,y\nred,1\ngreen,0\nred,1\nblue,0\n");
  const auto table = load_csv(csv, config_for(csv, "y", "1"));
  REQUIRE(table.columns.size() == 1);
  CHECK(table.columns[0].spec.kind == ColumnKind::categorical);
  CHECK(table.columns[0].spec.categories == std::vector<std::string>{"red", "green", "blue"});
}

TEST_CASE("dataset config resolves csv_path next to the config file") {
  xtest::TempDir dir("config");
  dir.write("c.json", R"({"csv_path": "d.csv", "target_column": "y", "positive_label": "1"})");
  const auto config = DatasetConfig::from_file(dir.path() / "c.json");
  CHECK(config.csv_path == dir.path() / "d.csv");
  CHECK(config.name == "c");
  CHECK(config.test_fraction == 0.25);
  CHECK(!config.categorical_columns.has_value());
  dir.write("bad.json", R"({"csv_path": "d.csv"})");
  CHECK(code_of([&] { DatasetConfig::from_file(dir.path() / "bad.json"); }) ==
        ErrorCode::InvalidConfig);
}

TEST_CASE("split: 100 rows at 0.25 gives 75/25 and is a pure function of the seed") {
  const auto a = split(labelled_table(40, 60), 0.25, 7);
  const auto b = split(labelled_table(40, 60), 0.25, 7);
  const auto c = split(labelled_table(40, 60), 0.25, 8);
  CHECK(a.train_rows.size() == 75);
  CHECK(a.test_rows.size() == 25);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
  CHECK(a.test_rows != c.test_rows);

  std::set<std::size_t> all(a.train_rows.begin(), a.train_rows.end());
  all.insert(a.test_rows.begin(), a.test_rows.end());
  CHECK(all.size() == 100);
  std::size_t test_pos = 0;
  for (auto r : a.test_rows) test_pos += a.table.y[r];
  CHECK(test_pos == 10);
}

TEST_CASE("split: 8 rows, 4 per class, keeps both classes on both sides") {
  const auto s = split(labelled_table(4, 4), 0.25, 3);
  CHECK(s.test_rows.size() == 2);
  for (const auto* rows : {&s.train_rows, &s.test_rows}) {
    std::set<int> classes;
    for (auto r : *rows) classes.insert(s.table.y[r]);
    CHECK(classes.size() == 2);
  }
}

TEST_CASE("split preconditions") {
  CHECK(code_of([] { split(labelled_table(5, 5), 0.0, 1); }) == ErrorCode::InvalidFraction);
  CHECK(code_of([] { split(labelled_table(5, 5), 1.0, 1); }) == ErrorCode::InvalidFraction);
  CHECK(code_of([] { split(labelled_table(1, 9), 0.25, 1); }) ==
        ErrorCode::StratificationImpossible);
}

TEST_CASE("one-hot encoding") {
  RawTable t;
  RawColumn colour;
  colour.spec = {"colour", ColumnKind::categorical, {}};
  RawColumn size;
  size.spec = {"size", ColumnKind::numeric, {}};
  colour.labels = {"a", "b", "c", "a", "b", "c", "blue"};
  size.numbers = {1, 2, 3, 4, 5, 6, 7};
  t.columns = {colour, size};
  t.y = {1, 0, 1, 0, 1, 0, 1};

  SplitTable s;
  s.table = t;
  s.train_rows = {0, 1, 2, 3, 4, 5};
  s.test_rows = {1, 6};
  const auto d = encode_onehot(s);

  CHECK(d.feature_names == std::vector<std::string>{"colour=a", "colour=b", "colour=c", "size"});
  REQUIRE(d.groups.size() == 2);
  CHECK(d.groups[0].categorical);
  CHECK(d.groups[0].size == 3);
  CHECK(d.is_onehot(2));
  CHECK(!d.is_onehot(3));
  // "b" encodes as (0, 1, 0).
  CHECK(d.X_test.row(0).head(3) == Eigen::RowVector3d(0, 1, 0));
  // "blue" was never seen in training rows.
  CHECK(d.X_test.row(1).head(3) == Eigen::RowVector3d(0, 0, 0));
  CHECK(d.unseen_categories == 1);
  for (Eigen::Index i = 0; i < d.X_train.rows(); ++i) CHECK(d.X_train.row(i).head(3).sum() == 1.0);
}

TEST_CASE("numeric-only tables encode as the identity") {
  SplitTable s;
  s.table = labelled_table(3, 3);
  s.train_rows = {0, 1, 3, 4};
  s.test_rows = {2, 5};
  const auto d = encode_onehot(s);
  CHECK(d.X_train.col(0) == Eigen::Vector4d(0, 1, 3, 4));
  CHECK(d.X_test.col(0) == Eigen::Vector2d(2, 5));
  CHECK(d.y_test == std::vector<int>{1, 0});
}

namespace {

Dataset column_dataset(std::vector<double> train, std::vector<double> test = {0.0}) {
  Matrix tr(static_cast<Eigen::Index>(train.size()), 1);
  for (std::size_t i = 0; i < train.size(); ++i) tr(static_cast<Eigen::Index>(i), 0) = train[i];
  Matrix te(static_cast<Eigen::Index>(test.size()), 1);
  for (std::size_t i = 0; i < test.size(); ++i) te(static_cast<Eigen::Index>(i), 0) = test[i];
  return xtest::numeric_dataset(tr, std::vector<int>(train.size(), 0), te,
                                std::vector<int>(test.size(), 0));
}

}  // namespace

TEST_CASE("standardize (1,2,3) gives mean 0 and sample std 1") {
  const auto d = column_dataset({1, 2, 3});
  const auto out = preprocess(d, fit_preprocess(d, PreprocessKind::standardize));
  const Vector col = out.X_train.col(0);
  CHECK(std::abs(mean({col.data(), 3})) < 1e-15);
  CHECK(sample_std({col.data(), 3}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("minmax maps (0,10) to (0,1) and does not clip test values") {
  const auto d = column_dataset({0, 10}, {20});
  const auto out = preprocess(d, fit_preprocess(d, PreprocessKind::minmax));
  CHECK(out.X_train(0, 0) == 0.0);
  CHECK(out.X_train(1, 0) == 1.0);
  CHECK(out.X_test(0, 0) == 2.0);
}

TEST_CASE("constant columns map to zero under every kind") {
  for (auto kind : {PreprocessKind::standardize, PreprocessKind::minmax, PreprocessKind::interquartile}) {
    const auto d = column_dataset({5, 5, 5});
    const auto out = preprocess(d, fit_preprocess(d, kind));
    CHECK(out.X_train.col(0).isZero(0.0));
  }
}

TEST_CASE("interquartile uses linearly interpolated quartiles") {
  // numpy: quantile([1,2,4,8,16], [.25,.5,.75]) = 2, 4, 8.
  const auto d = column_dataset({16, 1, 8, 2, 4});
  const auto spec = fit_preprocess(d, PreprocessKind::interquartile);
  CHECK(spec.center[0] == 4.0);
  CHECK(spec.scale[0] == 6.0);
  CHECK(quantile({1, 2, 3, 4}, 0.25) == 1.75);
  CHECK(quantile({7}, 0.9) == 7.0);
}

TEST_CASE("preprocess round trip, fixed point and fit/apply separation") {
  std::mt19937_64 rng(11);
  const Matrix train = xtest::random_matrix(rng, 40, 4, 3.0);
  const Matrix test = xtest::random_matrix(rng, 10, 4, 3.0).array() + 5.0;
  const auto d = xtest::numeric_dataset(train, std::vector<int>(40, 0), test, std::vector<int>(10, 0));

  for (auto kind : {PreprocessKind::standardize, PreprocessKind::minmax, PreprocessKind::interquartile}) {
    const auto spec = fit_preprocess(d, kind);
    CHECK((invert_preprocess(spec, apply_preprocess(spec, test)) - test).cwiseAbs().maxCoeff() < 1e-12);
  }

  PreprocessSpec identity;
  identity.center.assign(4, 0.0);
  identity.scale.assign(4, 1.0);
  identity.active.assign(4, true);
  CHECK((apply_preprocess(identity, test) - test).cwiseAbs().maxCoeff() < 1e-12);

  const auto out = preprocess(d, fit_preprocess(d, PreprocessKind::standardize));
  // Test columns were shifted by +5 before the train-fitted map.
  CHECK(out.X_test.colwise().mean().cwiseAbs().minCoeff() > 0.5);
}

TEST_CASE("preprocessing leaves one-hot columns untouched") {
  xtest::TempDir dir("onehot-pre");
  const auto csv = dir.write("t.csv",
                             "c,v,y\na,1,p\nb,5,q\na,2,p\nb,9,q\na,3,p\nb,4,q\na,8,p\nb,0,q\n");
  auto config = config_for(csv, "y", "p");
  config.seed = 5;
  const auto d = load_dataset(config);
  const auto spec = fit_preprocess(d, PreprocessKind::standardize);
  CHECK(!spec.active[0]);
  CHECK(!spec.active[1]);
  CHECK(spec.active[2]);
  const auto out = preprocess(d, spec);
  CHECK(out.X_train.leftCols(2) == d.X_train.leftCols(2));
  CHECK(out.X_test.leftCols(2) == d.X_test.leftCols(2));
}

TEST_CASE("preprocess kind names") {
  CHECK(parse_preprocess_kind("standard") == PreprocessKind::standardize);
  CHECK(parse_preprocess_kind("minmax") == PreprocessKind::minmax);
  CHECK(parse_preprocess_kind("interquartile") == PreprocessKind::interquartile);
  CHECK(to_string(PreprocessKind::standardize) == "standard");
  CHECK(code_of([] { parse_preprocess_kind("zscore"); }) == ErrorCode::InvalidConfig);
}
