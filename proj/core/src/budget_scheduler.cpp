#include "learn/budget_scheduler.hpp"

#include <algorithm>
#include <numeric>

namespace learn {

std::string_view to_string(CheckpointKind kind) {
  return kind == CheckpointKind::seed ? "seed" : "label";
}

std::size_t AcquisitionRequest::requested() const {
  if (kind == Kind::strategy_total) return total_delta;
  return std::accumulate(per_class_delta.begin(), per_class_delta.end(), std::size_t{0});
}

CheckpointSchedule build_schedule(std::span<const std::size_t> seed_budgets,
                                  std::span<const std::size_t> label_budgets,
                                  std::size_t class_count, std::size_t pool_size,
                                  Diagnostics* diag) {
  if (class_count == 0) throw_config("SchemaViolation", "class count must be >= 1");
  if (pool_size == 0) throw_config("SchemaViolation", "pool size must be >= 1");
  if (!label_budgets.empty() && label_budgets.back() > pool_size) {
    throw_config("BudgetExceedsPool", "label budget " + std::to_string(label_budgets.back()) +
                                          " exceeds pool size " + std::to_string(pool_size));
  }

  CheckpointSchedule schedule;
  for (auto b : seed_budgets) {
    schedule.checkpoints.push_back({schedule.size(), CheckpointKind::seed, b});
  }
  for (auto b : label_budgets) {
    schedule.checkpoints.push_back({schedule.size(), CheckpointKind::label, b});
  }

  if (!seed_budgets.empty()) {
    const std::size_t seed_total = class_count * seed_budgets.back();
    if (seed_total > pool_size) {
      warn(diag, "SeedBudgetExceedsPool", std::to_string(seed_budgets.back()) + "-shot",
           "seeding needs " + std::to_string(seed_total) + " labels but the pool has " +
               std::to_string(pool_size));
    }
    for (auto b : label_budgets) {
      if (b < seed_total) {
        warn(diag, "LabelBudgetBelowSeeds", std::to_string(b),
             "label budget " + std::to_string(b) + " is below the " + std::to_string(seed_total) +
                 " labels consumed by seeding; its checkpoint acquires nothing");
      }
    }
  }
  return schedule;
}

AcquisitionRequest next_acquisition(const Checkpoint& checkpoint, const LabeledState& state,
                                    std::size_t class_count) {
  AcquisitionRequest req;
  if (checkpoint.kind == CheckpointKind::seed) {
    req.kind = AcquisitionRequest::Kind::stratified_per_class;
    req.per_class_delta.resize(class_count, 0);
    for (ClassIndex c = 0; c < class_count; ++c) {
      const auto have = state.count(c);
      req.per_class_delta[c] = checkpoint.cumulative_target > have ? checkpoint.cumulative_target - have : 0;
    }
  } else {
    req.kind = AcquisitionRequest::Kind::strategy_total;
    req.total_delta = checkpoint.cumulative_target > state.size() ? checkpoint.cumulative_target - state.size() : 0;
  }
  return req;
}

}  // namespace learn
