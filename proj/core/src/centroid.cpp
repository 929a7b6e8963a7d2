#include "learn/centroid.hpp"

#include <cmath>
#include <limits>

namespace learn {

namespace {

Eigen::VectorXd unit(const Eigen::VectorXd& x) {
  const double n = x.norm();
  if (!(n >= kZeroVectorNorm)) throw_runtime("ZeroVector", "cannot normalize a zero feature vector");
  return x / n;
}

// Centroids from an index subset of `labeled`.
template <typename Pick>
CentroidModel centroids_from(std::span<const LabeledExample> labeled, std::size_t class_count,
                             Eigen::Index dim, Pick&& pick) {
  CentroidModel m;
  m.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(class_count), dim);
  m.present.assign(class_count, false);
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (!pick(i)) continue;
    const auto& ex = labeled[i];
    if (ex.label >= class_count) throw_runtime("UnknownLabel", "label out of range for sample '" + ex.id + "'");
    m.centroids.row(static_cast<Eigen::Index>(ex.label)) += unit(ex.features).transpose();
    ++counts[ex.label];
  }
  for (std::size_t k = 0; k < class_count; ++k) {
    if (counts[k] == 0) continue;
    auto row = m.centroids.row(static_cast<Eigen::Index>(k));
    row /= static_cast<double>(counts[k]);
    const double n = row.norm();
    if (n < kDegenerateCentroidNorm) {
      row.setZero();
    } else {
      row /= n;
      m.present[k] = true;
    }
  }
  return m;
}

}  // namespace

CentroidModel centroid_fit_fixed(std::span<const LabeledExample> labeled, std::size_t class_count,
                                 double temperature) {
  if (labeled.empty()) throw_runtime("NoLabels", "centroid fit needs at least one labeled sample");
  auto m = centroids_from(labeled, class_count, labeled.front().features.size(),
                          [](std::size_t) { return true; });
  m.temperature = temperature;
  return m;
}

bool centroid_tune_feasible(std::span<const LabeledExample> labeled, std::size_t class_count) {
  std::vector<std::size_t> counts(class_count, 0);
  for (const auto& ex : labeled) {
    if (ex.label < class_count) ++counts[ex.label];
  }
  std::size_t eligible = 0;
  for (auto c : counts) eligible += c >= 2 ? 1 : 0;
  return eligible >= 2;
}

double centroid_tune(std::span<const LabeledExample> labeled, std::size_t class_count,
                     const CentroidOptions& options, RngStream& rng) {
  if (!centroid_tune_feasible(labeled, class_count) || options.temperature_grid.empty()) {
    return options.default_temperature;
  }
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < labeled.size(); ++i) by_class[labeled[i].label].push_back(i);

  std::vector<Eigen::VectorXd> normalized;
  normalized.reserve(labeled.size());
  for (const auto& ex : labeled) normalized.push_back(unit(ex.features));

  const auto& grid = options.temperature_grid;
  std::vector<double> loglik(grid.size(), 0.0);
  std::size_t queries = 0;
  std::vector<bool> is_query(labeled.size(), false);

  for (std::size_t e = 0; e < options.episodes; ++e) {
    std::fill(is_query.begin(), is_query.end(), false);
    std::vector<std::size_t> episode_queries;
    for (const auto& members : by_class) {
      if (members.size() < 2) continue;
      const auto q = members[static_cast<std::size_t>(rng.uniform_index(members.size()))];
      is_query[q] = true;
      episode_queries.push_back(q);
    }
    const auto support = centroids_from(labeled, class_count, labeled.front().features.size(),
                                        [&](std::size_t i) { return !is_query[i]; });
    for (auto q : episode_queries) {
      const auto y = labeled[q].label;
      if (!support.present[y]) continue;
      const Eigen::VectorXd cos = support.centroids * normalized[q];
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < class_count; ++k) {
          if (support.present[k]) best = std::max(best, grid[g] * cos[static_cast<Eigen::Index>(k)]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < class_count; ++k) {
          if (support.present[k]) total += std::exp(grid[g] * cos[static_cast<Eigen::Index>(k)] - best);
        }
        loglik[g] += grid[g] * cos[static_cast<Eigen::Index>(y)] - best - std::log(total);
      }
      ++queries;
    }
  }
  if (queries == 0) return options.default_temperature;

  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (loglik[g] > loglik[best]) best = g;
  }
  return grid[best];
}

CentroidModel centroid_fit(std::span<const LabeledExample> labeled, std::size_t class_count,
                           const CentroidOptions& options, RngStream& rng) {
  auto m = centroid_fit_fixed(labeled, class_count, options.default_temperature);
  m.temperature = centroid_tune(labeled, class_count, options, rng);
  return m;
}

CentroidModel fill_absent_classes(CentroidModel fitted, const CentroidModel& fallback) {
  if (fallback.class_count() != fitted.class_count() || fallback.centroids.cols() != fitted.centroids.cols()) {
    return fitted;
  }
  for (std::size_t k = 0; k < fitted.class_count(); ++k) {
    if (fitted.present[k] || !fallback.present[k]) continue;
    fitted.centroids.row(static_cast<Eigen::Index>(k)) = fallback.centroids.row(static_cast<Eigen::Index>(k));
    fitted.present[k] = true;
  }
  return fitted;
}

Prediction centroid_predict(const CentroidModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.centroids.cols()) {
    throw_runtime("DimensionMismatch", "feature length does not match the centroid model");
  }
  const Eigen::VectorXd scores = model.temperature * (model.centroids * unit(features));
  return softmax_prediction(scores, model.present);
}

}  // namespace learn
