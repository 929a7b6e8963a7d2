#include "learn/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace learn {

std::vector<std::size_t> importance_ranking(const Eigen::VectorXd& features) {
  std::vector<std::size_t> order(static_cast<std::size_t>(features.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(features[static_cast<Eigen::Index>(a)]) > std::abs(features[static_cast<Eigen::Index>(b)]);
  });
  return order;
}

std::vector<std::vector<std::size_t>> consistency_masks(std::span<const std::size_t> ranking,
                                                        std::size_t mask_count, double mask_fraction) {
  if (mask_count < 1) throw_config("InvalidParameter", "mask_count must be >= 1");
  if (!(mask_fraction > 0.0 && mask_fraction < 1.0)) {
    throw_config("InvalidParameter", "mask_fraction must be in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> masks(mask_count);
  if (ranking.empty()) return masks;
  const double raw = mask_fraction * static_cast<double>(ranking.size());
  // Guard against p*d landing a hair above an integer through rounding.
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  k = std::clamp<std::size_t>(k, 1, ranking.size());
  for (std::size_t r = 0; r < k; ++r) masks[r % mask_count].push_back(ranking[r]);
  return masks;
}

std::map<std::string, ClassIndex> consistency_select(const ConsistencyState& state,
                                                     std::span<const UnlabeledExample> unlabeled) {
  std::map<std::string, ClassIndex> selected;
  for (const auto& ex : unlabeled) {
    const auto original = centroid_predict(state.base, ex.features).argmax;
    const auto ranking = importance_ranking(ex.features);
    const auto masks = consistency_masks(ranking, state.mask_count, state.mask_fraction);
    bool consistent = true;
    for (const auto& mask : masks) {
      if (mask.empty()) continue;
      Eigen::VectorXd variant = ex.features;
      for (auto j : mask) variant[static_cast<Eigen::Index>(j)] = 0.0;
      if (variant.norm() < kZeroVectorNorm ||
          centroid_predict(state.base, variant).argmax != original) {
        consistent = false;
        break;
      }
    }
    if (consistent) selected.emplace(ex.id, original);
  }
  return selected;
}

ConsistencyState consistency_self_train(const ConsistencyState& state,
                                        std::span<const LabeledExample> labeled,
                                        std::span<const UnlabeledExample> unlabeled) {
  if (labeled.empty()) throw_runtime("NoLabels", "self-training needs labeled samples");
  ConsistencyState current = state;
  for (std::size_t round = 0; round < state.rounds; ++round) {
    auto selected = consistency_select(current, unlabeled);
    if (selected == current.pseudo_labels) break;

    std::vector<LabeledExample> train(labeled.begin(), labeled.end());
    for (const auto& ex : unlabeled) {
      auto it = selected.find(ex.id);
      if (it != selected.end()) train.push_back({ex.id, ex.features, it->second});
    }
    current.base = fill_absent_classes(
        centroid_fit_fixed(train, state.base.class_count(), state.base.temperature), state.base);
    current.pseudo_labels = std::move(selected);
  }
  return current;
}

}  // namespace learn
