#pragma once

#include "xplain/evaluation.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace xplain {

using Json = nlohmann::ordered_json;

Json to_json(const PreprocessSpec& spec);
PreprocessSpec preprocess_from_json(const Json& doc);

// {"model": "lr"|"gnb", parameters..., "feature_names", "preprocess"}.
Json to_json(const ModelHandle& model, const std::vector<std::string>& feature_names);
ModelHandle model_from_json(const Json& doc);

void save_model(const std::filesystem::path& path, const ModelHandle& model,
                const std::vector<std::string>& feature_names);
ModelHandle load_model(const std::filesystem::path& path);

// {instance_index, technique, target_space, phi, base_value?}
Json to_json(const Explanation& explanation, std::size_t instance_index);

// {offset, lambda: [{name, value}]}
Json to_json(const GroundTruth& truth, const std::vector<std::string>& feature_names);

Json to_json(const DatasetScoreSet& set);
Json to_json(const RankTable& table);

// Writes `doc` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace xplain
