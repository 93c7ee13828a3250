#include "xplain/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

std::vector<xplain::Technique> parse_techniques(const std::string& list) {
  std::vector<xplain::Technique> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const std::string token = list.substr(start, end - start);
    if (!token.empty()) {
      const auto t = xplain::parse_technique(token);
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    start = end + 1;
  }
  return out;
}

std::vector<xplain::ModelKind> parse_models(const std::string& text) {
  if (text == "both") return {xplain::ModelKind::logistic, xplain::ModelKind::gaussian_nb};
  return {xplain::parse_model_kind(text)};
}

struct ExplainerFlags {
  std::size_t lime_samples = 5000;
  std::size_t shap_samples = 5000;
  std::size_t shap_background = 100;
  std::size_t lpi_samples = 0;
  double kernel_width = 0.0;
  bool lpi_absolute = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lime-samples", lime_samples, "LIME perturbations per instance")
        ->capture_default_str();
    cmd->add_option("--lime-kernel-width", kernel_width, "LIME kernel width (default 0.75*sqrt(n))");
    cmd->add_option("--shap-samples", shap_samples, "KernelSHAP coalitions when n > 13")
        ->capture_default_str();
    cmd->add_option("--shap-background", shap_background, "KernelSHAP background rows")
        ->capture_default_str();
    cmd->add_option("--lpi-samples", lpi_samples, "LPI replacements per feature (default: training rows)");
    cmd->add_flag("--lpi-absolute", lpi_absolute, "Rank absolute instead of signed LPI differences");
  }

  xplain::ExplainerConfig build() const {
    xplain::ExplainerConfig config;
    config.lime.samples = lime_samples;
    if (kernel_width > 0.0) config.lime.kernel_width = kernel_width;
    config.shap.samples = shap_samples;
    config.shap.background_size = shap_background;
    if (lpi_samples > 0) config.lpi.samples = lpi_samples;
    config.lpi.absolute = lpi_absolute;
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate local explanation techniques against analytic ground truth"};
  app.require_subcommand(1);

  std::string preprocess = "standard";
  std::string target = "logodds";
  std::uint64_t seed = 42;
  int trials = 100;

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run the full evaluation grid");
  std::vector<std::string> datasets;
  std::string models = "both";
  std::string techniques = "lime,shap,lpi";
  std::string out_dir = "xplain-out";
  bool no_instances = false;
  ExplainerFlags eval_flags;
  evaluate->add_option("--dataset", datasets, "Dataset config JSON files")->required()->expected(1, -1);
  evaluate->add_option("--model", models, "lr | gnb | both")->capture_default_str();
  evaluate->add_option("--technique", techniques, "Comma-separated subset of lime,shap,lpi")
      ->capture_default_str();
  evaluate->add_option("--preprocess", preprocess, "standard | minmax | interquartile")
      ->capture_default_str();
  evaluate->add_option("--target", target, "logodds | probability")->capture_default_str();
  evaluate->add_option("--seed", seed, "Seed for search and explainers")->capture_default_str();
  evaluate->add_option("--trials", trials, "Logistic regression search trials")->capture_default_str();
  evaluate->add_option("--out", out_dir, "Output directory")->capture_default_str();
  evaluate->add_flag("--no-instances", no_instances, "Omit per-instance vectors from reports");
  eval_flags.add_to(evaluate);

  // explain
  auto* explain = app.add_subcommand("explain", "Explain one test instance");
  std::string explain_dataset;
  std::string explain_model = "lr";
  std::string explain_technique = "shap";
  std::size_t instance = 0;
  std::string model_file;
  ExplainerFlags explain_flags;
  explain->add_option("--dataset", explain_dataset, "Dataset config JSON")->required();
  explain->add_option("--model", explain_model, "lr | gnb")->capture_default_str();
  explain->add_option("--technique", explain_technique, "lime | shap | lpi | groundtruth")
      ->capture_default_str();
  explain->add_option("--instance", instance, "Test-split row index")->capture_default_str();
  explain->add_option("--model-file", model_file, "Use a model written by `train`");
  explain->add_option("--preprocess", preprocess, "standard | minmax | interquartile")
      ->capture_default_str();
  explain->add_option("--target", target, "logodds | probability")->capture_default_str();
  explain->add_option("--seed", seed, "Seed")->capture_default_str();
  explain->add_option("--trials", trials, "Logistic regression search trials")->capture_default_str();
  explain_flags.add_to(explain);

  // train
  auto* train = app.add_subcommand("train", "Train a model and report accuracy");
  std::string train_dataset;
  std::string train_model = "lr";
  std::string train_out;
  train->add_option("--dataset", train_dataset, "Dataset config JSON")->required();
  train->add_option("--model", train_model, "lr | gnb")->capture_default_str();
  train->add_option("--preprocess", preprocess, "standard | minmax | interquartile")
      ->capture_default_str();
  train->add_option("--seed", seed, "Seed")->capture_default_str();
  train->add_option("--trials", trials, "Logistic regression search trials")->capture_default_str();
  train->add_option("--out", train_out, "Model JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) {
      xplain::RunConfig config;
      config.datasets.assign(datasets.begin(), datasets.end());
      config.models = parse_models(models);
      config.techniques = parse_techniques(techniques);
      config.preprocess = xplain::parse_preprocess_kind(preprocess);
      config.target_space = xplain::parse_target_space(target);
      config.seed = seed;
      config.search_trials = trials;
      config.explainers = eval_flags.build();
      config.output_dir = out_dir;
      config.emit_instances = !no_instances;
      return xplain::cmd_evaluate(config, std::cout, std::cerr);
    }
    if (*explain) {
      xplain::ExplainRequest request;
      request.dataset = explain_dataset;
      request.model = xplain::parse_model_kind(explain_model);
      request.technique = explain_technique;
      if (request.technique != "groundtruth") xplain::parse_technique(request.technique);
      request.instance_index = instance;
      request.preprocess = xplain::parse_preprocess_kind(preprocess);
      request.target_space = xplain::parse_target_space(target);
      request.seed = seed;
      request.search_trials = trials;
      request.explainers = explain_flags.build();
      if (!model_file.empty()) request.model_file = model_file;
      return xplain::cmd_explain(request, std::cout, std::cerr);
    }
    xplain::TrainRequest request;
    request.dataset = train_dataset;
    request.model = xplain::parse_model_kind(train_model);
    request.preprocess = xplain::parse_preprocess_kind(preprocess);
    request.seed = seed;
    request.search_trials = trials;
    request.output = train_out;
    return xplain::cmd_train(request, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "[xplain] error: " << e.what() << '\n';
    return 1;
  }
}
