#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "learn/centroid.hpp"

namespace learn {

// Self-training on a centroid base model. A sample is trusted when the base
// prediction survives every one of m disjoint masks over its most salient
// coordinates (salience = |feature value|).
struct ConsistencyState {
  CentroidModel base;
  std::size_t mask_count = 3;
  double mask_fraction = 0.5;
  std::size_t rounds = 3;
  std::map<std::string, ClassIndex> pseudo_labels;
};

// Coordinates by descending |x_j|, ties by lower index.
std::vector<std::size_t> importance_ranking(const Eigen::VectorXd& features);

// Deals the top ceil(p * d) coordinates of `ranking` round-robin into m
// masks (rank 1 -> mask 1, rank 2 -> mask 2, ...). Masks past the k-th stay
// empty. Throws InvalidParameter unless 0 < p < 1 and m >= 1.
std::vector<std::vector<std::size_t>> consistency_masks(std::span<const std::size_t> ranking,
                                                        std::size_t mask_count, double mask_fraction);

// Selects samples whose base argmax is unchanged under every mask (the masked
// coordinates are zeroed; cosine scoring re-normalizes). A variant that
// vanishes entirely counts as a disagreement. Empty masks are no-ops.
std::map<std::string, ClassIndex> consistency_select(const ConsistencyState& state,
                                                     std::span<const UnlabeledExample> unlabeled);

// Up to `rounds` passes of select -> pseudo-label -> refit the base on
// labeled + pseudo-labeled samples (equal weight, base temperature kept).
// Stops early once a round selects the same set as the round before.
// Throws NoLabels.
ConsistencyState consistency_self_train(const ConsistencyState& state,
                                        std::span<const LabeledExample> labeled,
                                        std::span<const UnlabeledExample> unlabeled);

}  // namespace learn
