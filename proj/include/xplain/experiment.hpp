#pragma once

#include "xplain/evaluation.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xplain {

struct RunConfig {
  std::vector<std::filesystem::path> datasets;
  std::vector<ModelKind> models{ModelKind::logistic, ModelKind::gaussian_nb};
  std::vector<Technique> techniques{Technique::lime, Technique::shap, Technique::lpi};
  PreprocessKind preprocess = PreprocessKind::standardize;
  TargetSpace target_space = TargetSpace::logodds;
  std::uint64_t seed = 42;
  int search_trials = 100;
  ExplainerConfig explainers;
  std::filesystem::path output_dir = "xplain-out";
  // Include per-instance phi/lambda vectors in each dataset report.
  bool emit_instances = true;

  void validate() const;
};

// A dataset loaded from its config and preprocessed for training.
struct PreparedDataset {
  DatasetConfig config;
  Dataset raw;
  Dataset data;
  std::shared_ptr<const PreprocessSpec> spec;
};

PreparedDataset prepare_dataset(const std::filesystem::path& config_path, PreprocessKind kind);

ModelHandle train_model(const PreparedDataset& prepared, ModelKind kind, std::uint64_t seed,
                        int search_trials);

// Writes <out>/<dataset>__<model>.json per completed cell, <out>/ranks.json
// and <out>/boxplot.csv, prints the rank table to `out`, diagnostics to
// `err`. Returns 0 iff every (dataset, model, technique) cell completed.
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);

struct ExplainRequest {
  std::filesystem::path dataset;
  ModelKind model = ModelKind::logistic;
  // "lime", "shap", "lpi" or "groundtruth".
  std::string technique = "shap";
  std::size_t instance_index = 0;
  PreprocessKind preprocess = PreprocessKind::standardize;
  TargetSpace target_space = TargetSpace::logodds;
  std::uint64_t seed = 42;
  int search_trials = 100;
  ExplainerConfig explainers;
  std::optional<std::filesystem::path> model_file;
};

// Prints {phi, lambda, offset, r, ...} for one test instance as JSON.
int cmd_explain(const ExplainRequest& request, std::ostream& out, std::ostream& err);

struct TrainRequest {
  std::filesystem::path dataset;
  ModelKind model = ModelKind::logistic;
  PreprocessKind preprocess = PreprocessKind::standardize;
  std::uint64_t seed = 42;
  int search_trials = 100;
  std::filesystem::path output;
};

int cmd_train(const TrainRequest& request, std::ostream& out, std::ostream& err);

// Table-2 shaped summary: models x techniques average ranks.
void print_rank_table(std::ostream& out, const std::vector<ModelKind>& models,
                      const std::vector<RankTable>& tables);

}  // namespace xplain
