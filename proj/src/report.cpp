#include "xplain/report.hpp"

#include <fstream>
#include <sstream>

namespace xplain {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Json to_json(const PreprocessSpec& spec) {
  Json doc;
  doc["kind"] = std::string(to_string(spec.kind));
  doc["center"] = spec.center;
  doc["scale"] = spec.scale;
  doc["active"] = spec.active;
  return doc;
}

PreprocessSpec preprocess_from_json(const Json& doc) {
  PreprocessSpec spec;
  spec.kind = parse_preprocess_kind(doc.at("kind").get<std::string>());
  spec.center = doc.at("center").get<std::vector<double>>();
  spec.scale = doc.at("scale").get<std::vector<double>>();
  spec.active = doc.at("active").get<std::vector<bool>>();
  if (spec.scale.size() != spec.center.size() || spec.active.size() != spec.center.size()) {
    throw Error(ErrorCode::InvalidConfig, "preprocessing arrays differ in length");
  }
  return spec;
}

Json to_json(const ModelHandle& model, const std::vector<std::string>& feature_names) {
  Json doc;
  doc["model"] = std::string(to_string(model.kind()));
  doc["feature_names"] = feature_names;
  if (const auto* lr = std::get_if<LogisticModel>(&model.model())) {
    doc["weights"] = to_std(lr->weights);
    doc["intercept"] = lr->intercept;
    doc["penalty"] = std::string(to_string(lr->penalty));
    doc["strength"] = lr->strength;
    doc["iterations"] = lr->iterations;
    doc["objective"] = lr->objective;
    doc["converged"] = lr->converged;
  } else {
    const auto& nb = std::get<GaussianNBModel>(model.model());
    doc["means"] = {to_std(nb.means[0]), to_std(nb.means[1])};
    doc["variances"] = {to_std(nb.variances[0]), to_std(nb.variances[1])};
    doc["priors"] = nb.priors;
    doc["variance_floor"] = nb.variance_floor;
  }
  doc["preprocess"] = model.preprocess() ? to_json(*model.preprocess()) : Json(nullptr);
  return doc;
}

ModelHandle model_from_json(const Json& doc) {
  try {
    std::shared_ptr<const PreprocessSpec> spec;
    if (doc.contains("preprocess") && !doc["preprocess"].is_null()) {
      spec = std::make_shared<const PreprocessSpec>(preprocess_from_json(doc["preprocess"]));
    }
    const ModelKind kind = parse_model_kind(doc.at("model").get<std::string>());
    if (kind == ModelKind::logistic) {
      LogisticModel lr;
      lr.weights = from_std(doc.at("weights").get<std::vector<double>>());
      lr.intercept = doc.at("intercept").get<double>();
      lr.penalty = doc.at("penalty").get<std::string>() == "l1" ? Penalty::l1 : Penalty::l2;
      lr.strength = doc.at("strength").get<double>();
      lr.iterations = doc.value("iterations", 0);
      lr.objective = doc.value("objective", 0.0);
      lr.converged = doc.value("converged", true);
      if (!lr.weights.allFinite() || !std::isfinite(lr.intercept)) {
        throw Error(ErrorCode::InvalidConfig, "non-finite logistic weights");
      }
      return ModelHandle(std::move(lr), spec);
    }
    GaussianNBModel nb;
    const auto means = doc.at("means").get<std::vector<std::vector<double>>>();
    const auto vars = doc.at("variances").get<std::vector<std::vector<double>>>();
    if (means.size() != 2 || vars.size() != 2 || means[0].size() != means[1].size() ||
        vars[0].size() != means[0].size() || vars[1].size() != means[0].size()) {
      throw Error(ErrorCode::InvalidConfig, "malformed naive Bayes parameters");
    }
    for (int c = 0; c < 2; ++c) {
      nb.means[c] = from_std(means[c]);
      nb.variances[c] = from_std(vars[c]);
      if ((nb.variances[c].array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidConfig, "naive Bayes variances must be positive");
      }
    }
    nb.priors = doc.at("priors").get<std::array<double, 2>>();
    nb.variance_floor = doc.value("variance_floor", 0.0);
    return ModelHandle(std::move(nb), spec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelHandle& model,
                const std::vector<std::string>& feature_names) {
  write_json(path, to_json(model, feature_names));
}

ModelHandle load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

Json to_json(const Explanation& explanation, std::size_t instance_index) {
  Json doc;
  doc["instance_index"] = instance_index;
  doc["technique"] = std::string(to_string(explanation.technique));
  doc["target_space"] = std::string(to_string(explanation.target_space));
  doc["phi"] = to_std(explanation.phi);
  if (explanation.base_value) doc["base_value"] = *explanation.base_value;
  return doc;
}

Json to_json(const GroundTruth& truth, const std::vector<std::string>& feature_names) {
  Json doc;
  doc["target_class"] = truth.target_class;
  doc["offset"] = truth.offset;
  Json bars = Json::array();
  for (Eigen::Index j = 0; j < truth.lambda.size(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    bars.push_back({{"name", idx < feature_names.size() ? feature_names[idx] : std::to_string(j)},
                    {"value", truth.lambda[j]}});
  }
  doc["lambda"] = std::move(bars);
  return doc;
}

Json to_json(const DatasetScoreSet& set) {
  Json doc;
  std::vector<double> r;
  std::vector<std::size_t> degenerate;
  for (const auto& s : set.scores) {
    r.push_back(s.r);
    if (s.degenerate) degenerate.push_back(s.instance_index);
  }
  doc["scores"] = r;
  doc["median"] = set.stats.median;
  doc["q1"] = set.stats.q1;
  doc["q3"] = set.stats.q3;
  doc["whisker_low"] = set.stats.whisker_low;
  doc["whisker_high"] = set.stats.whisker_high;
  doc["degenerate_count"] = set.degenerate_count;
  doc["degenerate_instances"] = degenerate;
  doc["above_0_7_count"] = set.strong_count;
  return doc;
}

Json to_json(const RankTable& table) {
  Json doc;
  std::vector<std::string> names;
  for (Technique t : table.techniques) names.emplace_back(to_string(t));
  doc["techniques"] = names;
  Json rows = Json::array();
  for (std::size_t d = 0; d < table.datasets.size(); ++d) {
    Json ranks;
    double sum = 0.0;
    for (std::size_t t = 0; t < names.size(); ++t) {
      ranks[names[t]] = table.ranks[d][t];
      sum += table.ranks[d][t];
    }
    rows.push_back({{"dataset", table.datasets[d]}, {"ranks", ranks}, {"row_sum", sum}});
  }
  doc["datasets"] = std::move(rows);
  Json average;
  Json stddev;
  for (std::size_t t = 0; t < names.size(); ++t) {
    average[names[t]] = table.average[t];
    stddev[names[t]] = table.stddev[t];
  }
  doc["average_ranks"] = std::move(average);
  doc["stddev_ranks"] = std::move(stddev);
  return doc;
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace xplain
