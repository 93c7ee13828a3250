#include "xplain/data.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace xplain {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

DatasetConfig DatasetConfig::from_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }

  DatasetConfig config;
  try {
    config.csv_path = doc.at("csv_path").get<std::string>();
    config.target_column = doc.at("target_column").get<std::string>();
    config.positive_label = doc.at("positive_label").get<std::string>();
    if (doc.contains("categorical_columns")) {
      config.categorical_columns = doc["categorical_columns"].get<std::vector<std::string>>();
    }
    config.test_fraction = doc.value("test_fraction", 0.25);
    config.seed = doc.value("seed", std::uint64_t{0});
    config.name = doc.value("name", path.stem().string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  if (config.csv_path.is_relative()) config.csv_path = path.parent_path() / config.csv_path;
  return config;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_row = [&] {
    if (field_started || !row.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::MalformedCsv, "unterminated quoted field");
  end_row();
  return rows;
}

RawTable load_csv(const std::filesystem::path& path, const DatasetConfig& config) {
  std::string text = read_file(path);
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::MalformedCsv, path.string() + ": no header row");

  const auto& header = rows.front();
  const std::size_t width = header.size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw Error(ErrorCode::MalformedCsv, path.string() + ": row " + std::to_string(r + 1) +
                                               " has " + std::to_string(rows[r].size()) +
                                               " fields, header has " + std::to_string(width));
    }
  }

  std::vector<std::string> names;
  for (const auto& h : header) names.emplace_back(trim(h));
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      if (names[a] == names[b]) {
        throw Error(ErrorCode::MalformedCsv, "duplicate column name '" + names[a] + "'");
      }
    }
  }

  const auto target_it = std::find(names.begin(), names.end(), config.target_column);
  if (target_it == names.end()) {
    throw Error(ErrorCode::TargetColumnAbsent,
                "column '" + config.target_column + "' not in " + path.string());
  }
  const std::size_t target = static_cast<std::size_t>(target_it - names.begin());

  if (config.categorical_columns) {
    for (const auto& c : *config.categorical_columns) {
      if (std::find(names.begin(), names.end(), c) == names.end() || c == config.target_column) {
        throw Error(ErrorCode::InvalidConfig, "categorical column '" + c + "' is not a feature");
      }
    }
  }

  RawTable table;
  table.name = config.name;
  const std::size_t n_rows = rows.size() - 1;

  std::vector<std::string> label_values;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string value(trim(rows[r][target]));
    if (std::find(label_values.begin(), label_values.end(), value) == label_values.end()) {
      label_values.push_back(value);
    }
  }
  if (label_values.size() != 2) {
    throw Error(ErrorCode::NonBinaryTarget, "target '" + config.target_column + "' has " +
                                                std::to_string(label_values.size()) +
                                                " distinct values, expected 2");
  }
  if (std::find(label_values.begin(), label_values.end(), config.positive_label) ==
      label_values.end()) {
    throw Error(ErrorCode::InvalidConfig,
                "positive label '" + config.positive_label + "' does not occur in the target");
  }
  table.y.reserve(n_rows);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    table.y.push_back(trim(rows[r][target]) == config.positive_label ? 1 : 0);
  }

  for (std::size_t c = 0; c < width; ++c) {
    if (c == target) continue;
    RawColumn column;
    column.spec.name = names[c];

    bool categorical = false;
    if (config.categorical_columns) {
      const auto& listed = *config.categorical_columns;
      categorical = std::find(listed.begin(), listed.end(), names[c]) != listed.end();
    } else {
      categorical = std::any_of(rows.begin() + 1, rows.end(),
                                [&](const auto& row) { return !parse_number(row[c]); });
    }

    if (categorical) {
      column.spec.kind = ColumnKind::categorical;
      column.labels.reserve(n_rows);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        std::string value(trim(rows[r][c]));
        auto& cats = column.spec.categories;
        if (std::find(cats.begin(), cats.end(), value) == cats.end()) cats.push_back(value);
        column.labels.push_back(std::move(value));
      }
    } else {
      column.spec.kind = ColumnKind::numeric;
      column.numbers.reserve(n_rows);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto value = parse_number(rows[r][c]);
        if (!value) {
          throw Error(ErrorCode::UnparseableNumeric, "column '" + names[c] + "', row " +
                                                         std::to_string(r + 1) + ": '" +
                                                         rows[r][c] + "'");
        }
        column.numbers.push_back(*value);
      }
    }
    table.columns.push_back(std::move(column));
  }
  return table;
}

SplitTable split(RawTable table, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidFraction,
                "test fraction must lie in (0, 1), got " + std::to_string(test_fraction));
  }

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t r = 0; r < table.rows(); ++r) by_class[table.y[r]].push_back(r);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2) {
      throw Error(ErrorCode::StratificationImpossible,
                  "class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                      " member(s); need at least 2");
    }
  }

  const std::size_t n = table.rows();
  const auto n_test =
      static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n) - 1e-9));

  // Largest-remainder allocation of test slots across the two classes.
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  for (int c = 0; c < 2; ++c) {
    const double exact =
        static_cast<double>(n_test) * static_cast<double>(by_class[c].size()) / static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
  }
  for (std::size_t left = n_test - quota[0] - quota[1]; left > 0; --left) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    ++quota[c];
    remainder[c] = -1.0;
  }
  for (int c = 0; c < 2; ++c) {
    quota[c] = std::clamp<std::size_t>(quota[c], 1, by_class[c].size() - 1);
  }

  SplitTable out;
  out.seed = seed;
  auto rng = derived_rng(seed, 0x5b117u);
  for (int c = 0; c < 2; ++c) {
    auto rows = by_class[c];
    std::shuffle(rows.begin(), rows.end(), rng);
    out.test_rows.insert(out.test_rows.end(), rows.begin(), rows.begin() + quota[c]);
    out.train_rows.insert(out.train_rows.end(), rows.begin() + quota[c], rows.end());
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.table = std::move(table);
  return out;
}

bool Dataset::is_onehot(std::size_t feature) const {
  for (const auto& g : groups) {
    if (feature >= g.first && feature < g.first + g.size) return g.categorical;
  }
  return false;
}

Dataset encode_onehot(const SplitTable& split) {
  const RawTable& table = split.table;
  Dataset out;
  out.name = table.name;
  out.seed = split.seed;

  std::size_t width = 0;
  for (const auto& column : table.columns) {
    ColumnSpec spec = column.spec;
    FeatureGroup group;
    group.source_column = out.columns.size();
    group.first = width;
    if (spec.kind == ColumnKind::categorical) {
      spec.categories.clear();
      for (std::size_t r : split.train_rows) {
        const auto& value = column.labels[r];
        if (std::find(spec.categories.begin(), spec.categories.end(), value) ==
            spec.categories.end()) {
          spec.categories.push_back(value);
        }
      }
      if (spec.categories.size() < 2) {
        throw Error(ErrorCode::InvalidConfig, "categorical column '" + spec.name +
                                                  "' has fewer than 2 categories in training rows");
      }
      group.size = spec.categories.size();
      group.categorical = true;
      for (const auto& cat : spec.categories) out.feature_names.push_back(spec.name + "=" + cat);
    } else {
      out.feature_names.push_back(spec.name);
    }
    width += group.size;
    out.groups.push_back(group);
    out.columns.push_back(std::move(spec));
  }

  auto fill = [&](const std::vector<std::size_t>& rows, Matrix& X, std::vector<int>& y,
                  std::size_t* unseen) {
    X = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    y.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = rows[i];
      y.push_back(table.y[r]);
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const auto& g = out.groups[c];
        const auto row = static_cast<Eigen::Index>(i);
        if (!g.categorical) {
          X(row, static_cast<Eigen::Index>(g.first)) = table.columns[c].numbers[r];
          continue;
        }
        const auto& cats = out.columns[c].categories;
        const auto it = std::find(cats.begin(), cats.end(), table.columns[c].labels[r]);
        if (it == cats.end()) {
          if (unseen) ++*unseen;
          continue;
        }
        X(row, static_cast<Eigen::Index>(g.first + static_cast<std::size_t>(it - cats.begin()))) = 1.0;
      }
    }
  };
  fill(split.train_rows, out.X_train, out.y_train, nullptr);
  fill(split.test_rows, out.X_test, out.y_test, &out.unseen_categories);
  return out;
}

Dataset load_dataset(const DatasetConfig& config) {
  return encode_onehot(split(load_csv(config.csv_path, config), config.test_fraction, config.seed));
}

std::string_view to_string(PreprocessKind kind) {
  switch (kind) {
    case PreprocessKind::standardize: return "standard";
    case PreprocessKind::minmax: return "minmax";
    case PreprocessKind::interquartile: return "interquartile";
  }
  return "unknown";
}

PreprocessKind parse_preprocess_kind(std::string_view text) {
  if (text == "standard" || text == "standardize") return PreprocessKind::standardize;
  if (text == "minmax") return PreprocessKind::minmax;
  if (text == "interquartile" || text == "robust") return PreprocessKind::interquartile;
  throw Error(ErrorCode::InvalidConfig, "unknown preprocessing '" + std::string(text) + "'");
}

double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::VectorTooShort, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PreprocessSpec fit_preprocess(const Dataset& dataset, PreprocessKind kind) {
  const std::size_t n = dataset.n_features();
  if (dataset.X_train.rows() == 0) {
    throw Error(ErrorCode::InvalidConfig, "cannot fit preprocessing on an empty training split");
  }
  PreprocessSpec spec;
  spec.kind = kind;
  spec.center.assign(n, 0.0);
  spec.scale.assign(n, 1.0);
  spec.active.assign(n, false);

  for (std::size_t j = 0; j < n; ++j) {
    if (dataset.is_onehot(j)) continue;
    spec.active[j] = true;
    const Vector col = dataset.X_train.col(static_cast<Eigen::Index>(j));
    std::vector<double> values(col.data(), col.data() + col.size());
    double center = 0.0;
    double scale = 0.0;
    switch (kind) {
      case PreprocessKind::standardize:
        center = mean(values);
        scale = sample_std(values);
        break;
      case PreprocessKind::minmax: {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        center = *lo;
        scale = *hi - *lo;
        break;
      }
      case PreprocessKind::interquartile:
        center = quantile(values, 0.5);
        scale = quantile(values, 0.75) - quantile(values, 0.25);
        break;
    }
    spec.center[j] = center;
    spec.scale[j] = scale > 0.0 ? scale : 1.0;
  }
  return spec;
}

Matrix apply_preprocess(const PreprocessSpec& spec, const Matrix& matrix) {
  if (static_cast<std::size_t>(matrix.cols()) != spec.n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix has " + std::to_string(matrix.cols()) +
                                                  " columns, preprocessing expects " +
                                                  std::to_string(spec.n_features()));
  }
  Matrix out = matrix;
  for (std::size_t j = 0; j < spec.n_features(); ++j) {
    if (!spec.active[j]) continue;
    auto col = out.col(static_cast<Eigen::Index>(j));
    col = (col.array() - spec.center[j]) / spec.scale[j];
  }
  return out;
}

Matrix invert_preprocess(const PreprocessSpec& spec, const Matrix& matrix) {
  if (static_cast<std::size_t>(matrix.cols()) != spec.n_features()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix has " + std::to_string(matrix.cols()) +
                                                  " columns, preprocessing expects " +
                                                  std::to_string(spec.n_features()));
  }
  Matrix out = matrix;
  for (std::size_t j = 0; j < spec.n_features(); ++j) {
    if (!spec.active[j]) continue;
    auto col = out.col(static_cast<Eigen::Index>(j));
    col = col.array() * spec.scale[j] + spec.center[j];
  }
  return out;
}

Dataset preprocess(const Dataset& dataset, const PreprocessSpec& spec) {
  Dataset out = dataset;
  out.X_train = apply_preprocess(spec, dataset.X_train);
  out.X_test = apply_preprocess(spec, dataset.X_test);
  return out;
}

}  // namespace xplain
