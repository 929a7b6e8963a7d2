#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "learn/error.hpp"

namespace learn {

class DatasetHandle;

enum class ProblemType { image_classification, video_classification, object_detection };
enum class StageKind { base, adapt };
enum class Algorithm { centroid, mme, consistency };
enum class QueryStrategy { random, entropy, margin };

std::string_view to_string(ProblemType v);
std::string_view to_string(StageKind v);
std::string_view to_string(Algorithm v);
std::string_view to_string(QueryStrategy v);

// Parsers throw Error{config, "InvalidParameter"} naming the valid options.
Algorithm parse_algorithm(std::string_view text);
QueryStrategy parse_query_strategy(std::string_view text);

struct StageSpec {
  StageKind kind = StageKind::base;
  std::string dataset;
  std::vector<std::size_t> seed_budgets;   // cumulative labels per class
  std::vector<std::size_t> label_budgets;  // cumulative total labels

  bool operator==(const StageSpec&) const = default;
};

struct TaskSpec {
  std::string name;
  ProblemType problem_type = ProblemType::image_classification;
  std::vector<StageSpec> stages;
  std::vector<std::string> whitelist;
  std::string results_file;

  bool operator==(const TaskSpec&) const = default;
};

// Task files are JSON objects with exactly the fields name, problem_type,
// stages, whitelist, results_file; each stage has exactly name ("base" or
// "adapt"), dataset, seed_budgets and label_budget.
// Throws MalformedInput on syntax errors and SchemaViolation otherwise.
TaskSpec parse_task_spec(std::string_view text);
TaskSpec load_task_spec(const std::string& path);
std::string serialize_task_spec(const TaskSpec& task);

// Checks every TaskSpec invariant; throws SchemaViolation.
void check_task_invariants(const TaskSpec& task);

struct AlgorithmParams {
  // mme
  double lambda = 0.1;
  double learning_rate = 0.01;
  std::int64_t iterations = 200;
  double temperature = 0.05;
  std::int64_t feature_dim = 0;  // 0 selects the input dimension
  // centroid
  std::vector<double> temperature_grid = {1, 2, 4, 8, 16, 32, 64, 128};
  double default_temperature = 10.0;
  std::int64_t episodes = 50;
  // consistency
  std::int64_t mask_count = 3;
  double mask_fraction = 0.5;
  std::int64_t rounds = 3;

  bool operator==(const AlgorithmParams&) const = default;
};

struct ExperimentConfig {
  TaskSpec task;
  Algorithm algorithm = Algorithm::centroid;
  std::uint64_t master_seed = 0;
  QueryStrategy query_strategy = QueryStrategy::random;
  AlgorithmParams algorithm_params;
  std::optional<std::string> pinned_source;

  bool operator==(const ExperimentConfig&) const = default;
};

// Range checks on algorithm_params; throws InvalidParameter naming the key.
void check_config_invariants(const ExperimentConfig& config);

// Canonical JSON rendering (stable key order) and its FNV-1a digest as 16
// lowercase hex digits.
std::string config_to_json(const ExperimentConfig& config);
std::string config_digest(const ExperimentConfig& config);

struct OverrideEntry {
  std::string key;
  std::string value;  // raw text; lists are comma-separated

  bool operator==(const OverrideEntry&) const = default;
};

class OverrideSet {
 public:
  OverrideSet() = default;

  // Parses a `a.b.c=value` token; throws MalformedInput.
  static OverrideEntry parse_token(std::string_view token);

  void add(std::string key, std::string value);
  void add_token(std::string_view token);

  const std::vector<OverrideEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<OverrideEntry> entries_;
};

bool is_valid_override_key(std::string_view key);

// Documented override paths, in the order `--help` lists them.
const std::vector<std::string>& override_keys();

// Applies entries in order (later wins). Throws UnknownKey, TypeMismatch, or
// InvalidParameter when the resulting value is out of range.
ExperimentConfig apply_overrides(const ExperimentConfig& config, const OverrideSet& overrides);

class DatasetRegistry {
 public:
  void add(std::shared_ptr<const DatasetHandle> dataset);
  std::shared_ptr<const DatasetHandle> find(std::string_view name) const;
  const DatasetHandle& at(std::string_view name) const;  // throws UnknownDataset
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;  // sorted
  std::size_t size() const noexcept { return datasets_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const DatasetHandle>, std::less<>> datasets_;
};

struct ValidatedPlan {
  ExperimentConfig config;
  std::vector<std::string> source_candidates;  // resolved whitelist, task order
};

struct PlanReport {
  std::optional<ValidatedPlan> plan;
  std::vector<Diagnostic> warnings;
  std::vector<Diagnostic> errors;

  bool ok() const noexcept { return plan.has_value(); }
};

// Resolves dataset names and budgets against the registry without mutating
// either input. Unknown whitelist names become warnings; everything else
// that blocks a run is collected into `errors`.
PlanReport validate_plan(const ExperimentConfig& config, const DatasetRegistry& registry);

}  // namespace learn
