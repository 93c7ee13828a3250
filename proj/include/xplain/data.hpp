#pragma once

#include "xplain/common.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xplain {

enum class ColumnKind { numeric, categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  // Distinct values in first-appearance order (categorical only).
  std::vector<std::string> categories;
};

// Parsed contents of a dataset config JSON file. `csv_path` is resolved
// against the config file's directory when relative.
struct DatasetConfig {
  std::string name;
  std::filesystem::path csv_path;
  std::string target_column;
  std::string positive_label;
  // Absent: every column whose cells do not all parse as numbers is
  // categorical. Present: exactly these columns are categorical.
  std::optional<std::vector<std::string>> categorical_columns;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;

  static DatasetConfig from_file(const std::filesystem::path& path);
};

// One feature column of a raw table. Numeric columns fill `numbers`,
// categorical columns fill `labels`.
struct RawColumn {
  ColumnSpec spec;
  std::vector<double> numbers;
  std::vector<std::string> labels;
};

struct RawTable {
  std::string name;
  std::vector<RawColumn> columns;
  std::vector<int> y;

  std::size_t rows() const { return y.size(); }
};

// Minimal RFC 4180 reader: header row, comma separated, optional quoting
// with doubled quotes as escapes. Blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

RawTable load_csv(const std::filesystem::path& path, const DatasetConfig& config);

// Row partition of a raw table. Both index lists are ascending.
struct SplitTable {
  RawTable table;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::uint64_t seed = 0;
};

// Stratified, seeded hold-out split. The test split holds
// ceil(test_fraction * rows) rows allocated across classes proportionally,
// with at least one member of each class on each side.
SplitTable split(RawTable table, double test_fraction, std::uint64_t seed);

// Contiguous block of encoded columns originating from one raw column.
struct FeatureGroup {
  std::size_t source_column = 0;
  std::size_t first = 0;
  std::size_t size = 1;
  bool categorical = false;
};

struct Dataset {
  std::string name;
  std::vector<ColumnSpec> columns;
  Matrix X_train;
  Matrix X_test;
  std::vector<int> y_train;
  std::vector<int> y_test;
  std::vector<std::string> feature_names;
  std::vector<FeatureGroup> groups;
  // Test cells whose category never appeared in training rows.
  std::size_t unseen_categories = 0;
  std::uint64_t seed = 0;

  std::size_t n_features() const { return feature_names.size(); }
  bool is_onehot(std::size_t feature) const;
};

// Expands categorical columns into indicator columns using categories fitted
// on training rows only. Unseen test categories encode as an all-zero group.
Dataset encode_onehot(const SplitTable& split);

// load_csv + split + encode_onehot with the config's fraction and seed.
Dataset load_dataset(const DatasetConfig& config);

enum class PreprocessKind { standardize, minmax, interquartile };

std::string_view to_string(PreprocessKind kind);
PreprocessKind parse_preprocess_kind(std::string_view text);

// Per-column affine map x -> (x - center) / scale. One-hot columns carry
// center 0 and scale 1 and are never touched.
struct PreprocessSpec {
  PreprocessKind kind = PreprocessKind::standardize;
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<bool> active;

  std::size_t n_features() const { return center.size(); }
};

PreprocessSpec fit_preprocess(const Dataset& dataset, PreprocessKind kind);
Matrix apply_preprocess(const PreprocessSpec& spec, const Matrix& matrix);
Matrix invert_preprocess(const PreprocessSpec& spec, const Matrix& matrix);

// Copy of `dataset` with both splits transformed by `spec`.
Dataset preprocess(const Dataset& dataset, const PreprocessSpec& spec);

// Summary statistics shared with tests and explainers.
double mean(std::span<const double> values);
double sample_std(std::span<const double> values);
// Quantile by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

}  // namespace xplain
