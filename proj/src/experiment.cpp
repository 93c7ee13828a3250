#include "xplain/experiment.hpp"
#include "xplain/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <span>
#include <sstream>

namespace xplain {

namespace {

std::string model_title(ModelKind kind) {
  return kind == ModelKind::logistic ? "Logistic Regression" : "Naive Bayes";
}

Json dataset_report(const PreparedDataset& prepared, const ModelHandle& model,
                    const RunConfig& config, const std::vector<DatasetScoreSet>& sets,
                    const std::vector<InstanceRecord>& records) {
  const Dataset& data = prepared.data;
  Json doc;
  doc["dataset"] = data.name;
  doc["model"] = std::string(to_string(model.kind()));
  doc["preprocess"] = std::string(to_string(config.preprocess));
  doc["target_space"] = std::string(to_string(config.target_space));
  doc["seed"] = config.seed;
  doc["n_train"] = data.X_train.rows();
  doc["n_test"] = data.X_test.rows();
  doc["feature_names"] = data.feature_names;
  doc["unseen_categories"] = data.unseen_categories;
  doc["accuracy"] = {{"train", accuracy(model, data.X_train, data.y_train)},
                     {"test", accuracy(model, data.X_test, data.y_test)}};

  Json per_technique;
  for (const auto& set : sets) per_technique[std::string(to_string(set.technique))] = to_json(set);
  doc["per_technique"] = std::move(per_technique);

  const RankTable table = rank_techniques(sets);
  Json ranks;
  Json average;
  for (std::size_t t = 0; t < table.techniques.size(); ++t) {
    ranks[std::string(to_string(table.techniques[t]))] = table.ranks.at(0)[t];
    average[std::string(to_string(table.techniques[t]))] = table.average[t];
  }
  doc["ranks"] = std::move(ranks);
  doc["average_ranks"] = std::move(average);

  if (config.emit_instances) {
    Json instances = Json::array();
    for (const auto& record : records) {
      Json item;
      item["instance_index"] = record.instance_index;
      item["ground_truth"] = to_json(record.ground_truth, data.feature_names);
      Json explanations = Json::array();
      for (const auto& e : record.explanations) explanations.push_back(to_json(e, record.instance_index));
      item["explanations"] = std::move(explanations);
      instances.push_back(std::move(item));
    }
    doc["instances"] = std::move(instances);
  }
  return doc;
}

std::string format_rank(double value) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << value;
  return s.str();
}

}  // namespace

void RunConfig::validate() const {
  if (datasets.empty()) throw Error(ErrorCode::InvalidConfig, "at least one dataset is required");
  if (models.empty()) throw Error(ErrorCode::InvalidConfig, "at least one model is required");
  if (techniques.empty()) throw Error(ErrorCode::InvalidConfig, "at least one technique is required");
  if (search_trials < 1) throw Error(ErrorCode::InvalidConfig, "search trials must be positive");
  explainers.validate();
}

PreparedDataset prepare_dataset(const std::filesystem::path& config_path, PreprocessKind kind) {
  PreparedDataset out;
  out.config = DatasetConfig::from_file(config_path);
  out.raw = load_dataset(out.config);
  out.spec = std::make_shared<const PreprocessSpec>(fit_preprocess(out.raw, kind));
  out.data = preprocess(out.raw, *out.spec);
  return out;
}

ModelHandle train_model(const PreparedDataset& prepared, ModelKind kind, std::uint64_t seed,
                        int search_trials) {
  if (kind == ModelKind::logistic) {
    return ModelHandle(train_logistic(prepared.data, search_trials, seed), prepared.spec);
  }
  return ModelHandle(train_gnb(prepared.data), prepared.spec);
}

void print_rank_table(std::ostream& out, const std::vector<ModelKind>& models,
                      const std::vector<RankTable>& tables) {
  std::vector<std::string> datasets;
  for (const auto& table : tables) {
    for (const auto& d : table.datasets) {
      if (std::find(datasets.begin(), datasets.end(), d) == datasets.end()) datasets.push_back(d);
    }
  }
  std::size_t label_width = std::string("Standard Deviation").size();
  for (const auto& d : datasets) label_width = std::max(label_width, d.size());
  constexpr int cell = 8;

  out << std::left << std::setw(static_cast<int>(label_width)) << "" << "  ";
  for (std::size_t m = 0; m < models.size(); ++m) {
    const int span = cell * static_cast<int>(tables[m].techniques.size());
    out << std::left << std::setw(span) << model_title(models[m]) << "  ";
  }
  out << '\n' << std::left << std::setw(static_cast<int>(label_width)) << "Dataset" << "  ";
  for (const auto& table : tables) {
    for (Technique t : table.techniques) {
      std::string name(to_string(t));
      std::transform(name.begin(), name.end(), name.begin(), ::toupper);
      out << std::right << std::setw(cell) << name;
    }
    out << "  ";
  }
  out << '\n';

  auto row = [&](const std::string& label, auto&& value_of) {
    out << std::left << std::setw(static_cast<int>(label_width)) << label << "  ";
    for (const auto& table : tables) {
      for (std::size_t t = 0; t < table.techniques.size(); ++t) {
        out << std::right << std::setw(cell) << value_of(table, t);
      }
      out << "  ";
    }
    out << '\n';
  };

  for (const auto& d : datasets) {
    row(d, [&](const RankTable& table, std::size_t t) -> std::string {
      const auto it = std::find(table.datasets.begin(), table.datasets.end(), d);
      if (it == table.datasets.end()) return "-";
      return format_rank(table.ranks[static_cast<std::size_t>(it - table.datasets.begin())][t]);
    });
  }
  row("Average Rank", [](const RankTable& table, std::size_t t) {
    return table.datasets.empty() ? std::string("-") : format_rank(table.average[t]);
  });
  row("Standard Deviation", [](const RankTable& table, std::size_t t) {
    return table.datasets.empty() ? std::string("-") : format_rank(table.stddev[t]);
  });
}

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);

  bool all_ok = true;
  std::map<ModelKind, std::vector<DatasetScoreSet>> collected;

  for (const auto& path : config.datasets) {
    std::string stage = "load";
    std::string name = path.stem().string();
    try {
      err << "[xplain] " << name << ": loading " << path.string() << '\n';
      const PreparedDataset prepared = prepare_dataset(path, config.preprocess);
      name = prepared.data.name;
      if (prepared.data.unseen_categories > 0) {
        err << "[xplain] " << name << ": warning: " << prepared.data.unseen_categories
            << " test cell(s) with categories unseen in training\n";
      }
      for (ModelKind kind : config.models) {
        stage = "train " + std::string(to_string(kind));
        err << "[xplain] " << name << ": training " << to_string(kind) << '\n';
        const ModelHandle model = train_model(prepared, kind, config.seed, config.search_trials);

        stage = "evaluate " + std::string(to_string(kind));
        err << "[xplain] " << name << ": explaining " << prepared.data.X_test.rows()
            << " test instances with " << to_string(kind) << '\n';
        std::vector<InstanceRecord> records;
        const auto sets = evaluate_dataset(prepared.data, model, config.techniques,
                                           config.target_space, config.explainers, config.seed,
                                           config.emit_instances ? &records : nullptr);
        for (const auto& set : sets) {
          if (set.degenerate_count > 0) {
            err << "[xplain] " << name << ": " << to_string(kind) << "/" << to_string(set.technique)
                << ": " << set.degenerate_count << " degenerate correlation(s) scored as 0\n";
          }
        }

        stage = "write " + std::string(to_string(kind));
        write_json(config.output_dir / (name + "__" + std::string(to_string(kind)) + ".json"),
                   dataset_report(prepared, model, config, sets, records));
        auto& bucket = collected[kind];
        bucket.insert(bucket.end(), sets.begin(), sets.end());
      }
    } catch (const std::exception& e) {
      all_ok = false;
      err << "[xplain] error: dataset '" << name << "', stage '" << stage << "': " << e.what()
          << '\n';
    }
  }

  // Cross-dataset ranking over datasets that completed for each model.
  std::vector<RankTable> tables;
  Json ranks_doc;
  ranks_doc["preprocess"] = std::string(to_string(config.preprocess));
  ranks_doc["target_space"] = std::string(to_string(config.target_space));
  ranks_doc["seed"] = config.seed;
  Json per_model;
  for (ModelKind kind : config.models) {
    const auto& sets = collected[kind];
    RankTable table = sets.empty() ? rank_medians({}, config.techniques, {}) : rank_techniques(sets);
    per_model[std::string(to_string(kind))] = to_json(table);
    tables.push_back(std::move(table));
  }
  ranks_doc["models"] = std::move(per_model);
  write_json(config.output_dir / "ranks.json", ranks_doc);

  std::ofstream csv(config.output_dir / "boxplot.csv", std::ios::binary | std::ios::trunc);
  csv << "dataset,model,technique,target_space,instance,r,degenerate\n";
  csv << std::setprecision(17);
  for (ModelKind kind : config.models) {
    for (const auto& set : collected[kind]) {
      for (const auto& s : set.scores) {
        csv << set.dataset << ',' << to_string(kind) << ',' << to_string(set.technique) << ','
            << to_string(set.target_space) << ',' << s.instance_index << ',' << s.r << ','
            << (s.degenerate ? 1 : 0) << '\n';
      }
    }
  }

  out << "Average rank of explanation techniques by median Spearman correlation (preprocess="
      << to_string(config.preprocess) << ", target=" << to_string(config.target_space) << ")\n";
  print_rank_table(out, config.models, tables);
  return all_ok ? 0 : 1;
}

int cmd_explain(const ExplainRequest& request, std::ostream& out, std::ostream& err) {
  try {
    PreparedDataset prepared = prepare_dataset(request.dataset, request.preprocess);
    if (request.instance_index >= static_cast<std::size_t>(prepared.data.X_test.rows())) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "instance " + std::to_string(request.instance_index) + " but the test split has " +
                      std::to_string(prepared.data.X_test.rows()) + " rows");
    }
    const ModelHandle model = request.model_file
                                  ? load_model(*request.model_file)
                                  : train_model(prepared, request.model, request.seed,
                                                request.search_trials);
    if (model.n_features() != prepared.data.n_features()) {
      throw Error(ErrorCode::DimensionMismatch, "model file does not match the dataset encoding");
    }
    // A stored model carries the preprocessing it was trained under.
    if (request.model_file && model.preprocess()) {
      if (model.preprocess()->n_features() != prepared.raw.n_features()) {
        throw Error(ErrorCode::DimensionMismatch, "model preprocessing does not match the dataset");
      }
      prepared.data = preprocess(prepared.raw, *model.preprocess());
    }
    const Dataset& data = prepared.data;

    const Vector x = data.X_test.row(static_cast<Eigen::Index>(request.instance_index)).transpose();
    const GroundTruth truth = ground_truth(model, {x.data(), static_cast<std::size_t>(x.size())});

    Json doc;
    doc["dataset"] = data.name;
    doc["model"] = std::string(to_string(model.kind()));
    doc["technique"] = request.technique;
    doc["target_space"] = std::string(to_string(request.target_space));
    doc["instance_index"] = request.instance_index;
    doc["feature_names"] = data.feature_names;

    Vector phi;
    if (request.technique == "groundtruth") {
      phi = truth.lambda;
    } else {
      const Technique technique = parse_technique(request.technique);
      const auto explanation =
          explain(technique, request.target_space, model, x, data, request.explainers,
                  derived_seed(request.seed, request.instance_index));
      phi = explanation.phi;
      if (explanation.base_value) doc["base_value"] = *explanation.base_value;
    }
    doc["phi"] = std::vector<double>(phi.data(), phi.data() + phi.size());
    doc["lambda"] = std::vector<double>(truth.lambda.data(), truth.lambda.data() + truth.lambda.size());
    doc["offset"] = truth.offset;
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    doc["logodds"] = predict_logodds(model, xs);
    doc["probability"] = predict_proba(model, xs);
    const auto score = spearman(phi, truth.lambda);
    doc["r"] = score.r;
    doc["degenerate"] = score.degenerate;
    out << doc.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "[xplain] error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_train(const TrainRequest& request, std::ostream& out, std::ostream& err) {
  try {
    const PreparedDataset prepared = prepare_dataset(request.dataset, request.preprocess);
    const ModelHandle model =
        train_model(prepared, request.model, request.seed, request.search_trials);
    const Dataset& data = prepared.data;
    if (const auto* lr = std::get_if<LogisticModel>(&model.model())) {
      err << "[xplain] " << data.name << ": selected " << to_string(lr->penalty)
          << " strength " << lr->strength << " (" << lr->iterations << " iterations"
          << (lr->converged ? "" : ", not converged") << ")\n";
    }
    if (!request.output.empty()) save_model(request.output, model, data.feature_names);
    out << data.name << ' ' << to_string(model.kind()) << " train accuracy "
        << std::setprecision(4) << std::fixed << accuracy(model, data.X_train, data.y_train)
        << " test accuracy " << accuracy(model, data.X_test, data.y_test) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "[xplain] error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace xplain
