#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "learn/budget_scheduler.hpp"
#include "learn/protocol_config.hpp"

namespace learn {

inline constexpr int kResultsSchemaVersion = 1;

struct SamplePrediction {
  std::string id;
  std::vector<ClassIndex> top_classes;  // up to 5, by descending score
  std::vector<double> top_scores;

  bool operator==(const SamplePrediction&) const = default;
};

// One line of a results file.
struct ResultsRecord {
  std::string task;
  std::string algorithm;
  std::size_t stage_index = 0;
  StageKind stage_kind = StageKind::base;
  std::size_t checkpoint_index = 0;
  CheckpointKind checkpoint_kind = CheckpointKind::seed;
  std::size_t cumulative_target = 0;
  std::size_t labeled_count = 0;
  std::size_t pool_size = 0;
  std::string source_dataset;
  std::vector<SamplePrediction> per_sample;
  double top1_accuracy = 0.0;
  std::int64_t elapsed_ms = 0;
  std::string config_digest;

  bool operator==(const ResultsRecord&) const = default;
};

// Single-line JSON with `schema_version` first and a fixed key order.
std::string record_to_json_line(const ResultsRecord& record);

// Throws SchemaMismatch for a wrong/missing schema_version or malformed fields.
ResultsRecord parse_record_line(const std::string& line);

// Throws MissingFile, SchemaMismatch, EmptyResults.
std::vector<ResultsRecord> read_results_file(const std::string& path);

}  // namespace learn
