#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "learn/budget_scheduler.hpp"
#include "learn/learner.hpp"
#include "learn/protocol_config.hpp"
#include "learn/results.hpp"

namespace learn {

// Milliseconds from an arbitrary monotonic origin.
using Clock = std::function<std::int64_t()>;

Clock steady_clock_ms();
// Always 0; every record then reports elapsed_ms = 0 and results files are
// byte-for-byte reproducible.
Clock frozen_clock();

struct RunContext {
  ExperimentConfig config;
  const DatasetRegistry* registry = nullptr;
  Clock clock = steady_clock_ms();
  std::string results_path;
};

struct Evaluation {
  std::vector<SamplePrediction> per_sample;  // test-file order
  double top1_accuracy = 0.0;
};

// Throws EmptyTestSet.
Evaluation evaluate(const LearnerState& state, const std::vector<Sample>& test_set);

// Hook for observing a stage from the inside; tests use it to check labeled
// sets and acquisition requests. Called after each checkpoint's acquisition.
struct CheckpointObserver {
  std::function<void(std::size_t stage_index, const Checkpoint&, const std::vector<std::string>& acquired,
                     const LabeledState&, const LearnerState&)>
      on_checkpoint;
};

struct StageOutcome {
  LearnerState state;
  std::vector<ResultsRecord> records;
  std::string source_dataset;
};

// Runs one stage. A base stage (inherited empty) picks its source through
// select_source unless the config pins one, fits the learner on the fully
// labeled source pool, then walks the checkpoint schedule on the target. An
// adapt stage starts from the inherited model and the given source name.
// Checkpoints that acquire no labels leave the model untouched.
// Each record is handed to `sink` as soon as it exists.
StageOutcome run_stage(const RunContext& ctx, std::size_t stage_index,
                       const std::optional<LearnerState>& inherited,
                       const std::optional<std::string>& inherited_source,
                       const std::function<void(const ResultsRecord&)>& sink,
                       Diagnostics* diag = nullptr,
                       const CheckpointObserver* observer = nullptr);

// Validates the plan, runs every stage with model carry-over, and writes the
// results file through `<path>.partial` + rename. On failure the partial file
// is left behind and the error propagates. Also writes `<path>.config.json`
// with the resolved configuration.
std::string run_experiment(const RunContext& ctx, Diagnostics* diag = nullptr,
                           const CheckpointObserver* observer = nullptr);

// outputs/<YYYY-MM-DD>/<HH-MM-SS>/<results_file> under `root` (UTC).
std::string default_results_path(const std::string& root, const std::string& results_file,
                                 std::chrono::system_clock::time_point start);

}  // namespace learn
