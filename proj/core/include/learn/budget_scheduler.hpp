#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "learn/dataset_store.hpp"
#include "learn/error.hpp"

namespace learn {

enum class CheckpointKind { seed, label };

std::string_view to_string(CheckpointKind kind);

struct Checkpoint {
  std::size_t index = 0;
  CheckpointKind kind = CheckpointKind::seed;
  // Per-class count for seed checkpoints, total count for label checkpoints.
  // Both are cumulative and include every label acquired so far.
  std::size_t cumulative_target = 0;

  bool operator==(const Checkpoint&) const = default;
};

struct CheckpointSchedule {
  std::vector<Checkpoint> checkpoints;

  std::size_t size() const noexcept { return checkpoints.size(); }
  const Checkpoint& operator[](std::size_t i) const { return checkpoints[i]; }
  auto begin() const { return checkpoints.begin(); }
  auto end() const { return checkpoints.end(); }
};

struct AcquisitionRequest {
  enum class Kind { stratified_per_class, strategy_total };

  Kind kind = Kind::stratified_per_class;
  std::vector<std::size_t> per_class_delta;  // size C, stratified_per_class only
  std::size_t total_delta = 0;               // strategy_total only

  std::size_t requested() const;
};

// Seed checkpoints first, then label checkpoints, targets copied verbatim.
// Throws BudgetExceedsPool when max(label_budgets) > pool_size; warns
// (SeedBudgetExceedsPool, LabelBudgetBelowSeeds) for softer conflicts.
CheckpointSchedule build_schedule(std::span<const std::size_t> seed_budgets,
                                  std::span<const std::size_t> label_budgets,
                                  std::size_t class_count, std::size_t pool_size,
                                  Diagnostics* diag = nullptr);

// Deltas are clamped at zero: a checkpoint whose target is already met still
// trains and evaluates, it just acquires nothing.
AcquisitionRequest next_acquisition(const Checkpoint& checkpoint, const LabeledState& state,
                                    std::size_t class_count);

}  // namespace learn
