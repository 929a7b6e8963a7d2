#include "learn/results.hpp"

#include <fstream>

#include <json.hpp>

namespace learn {

using ordered_json = nlohmann::ordered_json;

std::string record_to_json_line(const ResultsRecord& r) {
  ordered_json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["task"] = r.task;
  j["algorithm"] = r.algorithm;
  j["stage_index"] = r.stage_index;
  j["stage_kind"] = std::string(to_string(r.stage_kind));
  j["checkpoint_index"] = r.checkpoint_index;
  j["checkpoint_kind"] = std::string(to_string(r.checkpoint_kind));
  j["cumulative_target"] = r.cumulative_target;
  j["labeled_count"] = r.labeled_count;
  j["pool_size"] = r.pool_size;
  j["source_dataset"] = r.source_dataset;
  j["top1_accuracy"] = r.top1_accuracy;
  j["elapsed_ms"] = r.elapsed_ms;
  j["config_digest"] = r.config_digest;
  auto samples = ordered_json::array();
  for (const auto& s : r.per_sample) {
    ordered_json e;
    e["id"] = s.id;
    e["top5"] = s.top_classes;
    e["scores"] = s.top_scores;
    samples.push_back(std::move(e));
  }
  j["per_sample"] = std::move(samples);
  return j.dump();
}

ResultsRecord parse_record_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw_data("SchemaMismatch", std::string("results line is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw_data("SchemaMismatch", "results record has no schema_version");
  }
  const int version = j["schema_version"].get<int>();
  if (version != kResultsSchemaVersion) {
    throw_data("SchemaMismatch", "unsupported schema_version " + std::to_string(version));
  }
  try {
    ResultsRecord r;
    r.task = j.at("task").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.stage_index = j.at("stage_index").get<std::size_t>();
    const auto sk = j.at("stage_kind").get<std::string>();
    if (sk != "base" && sk != "adapt") throw_data("SchemaMismatch", "bad stage_kind '" + sk + "'");
    r.stage_kind = sk == "base" ? StageKind::base : StageKind::adapt;
    r.checkpoint_index = j.at("checkpoint_index").get<std::size_t>();
    const auto ck = j.at("checkpoint_kind").get<std::string>();
    if (ck != "seed" && ck != "label") throw_data("SchemaMismatch", "bad checkpoint_kind '" + ck + "'");
    r.checkpoint_kind = ck == "seed" ? CheckpointKind::seed : CheckpointKind::label;
    r.cumulative_target = j.at("cumulative_target").get<std::size_t>();
    r.labeled_count = j.at("labeled_count").get<std::size_t>();
    r.pool_size = j.at("pool_size").get<std::size_t>();
    r.source_dataset = j.at("source_dataset").get<std::string>();
    r.top1_accuracy = j.at("top1_accuracy").get<double>();
    r.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
    r.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& e : j.at("per_sample")) {
      r.per_sample.push_back({e.at("id").get<std::string>(), e.at("top5").get<std::vector<ClassIndex>>(),
                              e.at("scores").get<std::vector<double>>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw_data("SchemaMismatch", std::string("malformed results record: ") + e.what());
  }
}

std::vector<ResultsRecord> read_results_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("MissingFile", "cannot open results file '" + path + "'");
  std::vector<ResultsRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_record_line(line));
  }
  if (out.empty()) throw_data("EmptyResults", "results file '" + path + "' has no records");
  return out;
}

}  // namespace learn
