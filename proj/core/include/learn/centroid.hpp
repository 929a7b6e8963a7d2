#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "learn/dataset_store.hpp"
#include "learn/prediction.hpp"
#include "learn/random.hpp"

namespace learn {

// Nearest-centroid classifier under cosine similarity with a temperature
// multiplier on the similarities before the softmax.
struct CentroidModel {
  Eigen::MatrixXd centroids;  // C x d, unit rows for present classes
  std::vector<bool> present;  // false: no usable centroid, scored as -inf
  double temperature = 10.0;

  std::size_t class_count() const noexcept { return present.size(); }
};

struct CentroidOptions {
  std::vector<double> temperature_grid = {1, 2, 4, 8, 16, 32, 64, 128};
  double default_temperature = 10.0;
  std::size_t episodes = 50;
};

// Centroid of a class whose normalized mean has norm below this is flagged absent.
inline constexpr double kDegenerateCentroidNorm = 1e-9;
// Inputs with a norm below this cannot be compared by cosine.
inline constexpr double kZeroVectorNorm = 1e-12;

// Centroids only: c_k = normalize(mean of normalized class-k features).
// Throws NoLabels, ZeroVector.
CentroidModel centroid_fit_fixed(std::span<const LabeledExample> labeled, std::size_t class_count,
                                 double temperature);

// Centroids plus a temperature from centroid_tune.
CentroidModel centroid_fit(std::span<const LabeledExample> labeled, std::size_t class_count,
                           const CentroidOptions& options, RngStream& rng);

// Picks the grid temperature with the highest mean query log-likelihood over
// `episodes` random support/query splits (one query per eligible class per
// episode). Needs at least two classes with two or more labels; otherwise
// returns options.default_temperature without touching `rng`.
double centroid_tune(std::span<const LabeledExample> labeled, std::size_t class_count,
                     const CentroidOptions& options, RngStream& rng);

bool centroid_tune_feasible(std::span<const LabeledExample> labeled, std::size_t class_count);

// Copies centroids from `fallback` for classes absent in `fitted`.
CentroidModel fill_absent_classes(CentroidModel fitted, const CentroidModel& fallback);

// p = softmax(tau * cos(x, c_k)) over present classes. Throws ZeroVector.
Prediction centroid_predict(const CentroidModel& model, const Eigen::VectorXd& features);

}  // namespace learn
