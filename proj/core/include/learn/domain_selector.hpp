#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "learn/dataset_store.hpp"

namespace learn {

class DatasetRegistry;

struct DatasetMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased (n - 1 denominator)
  std::size_t sample_count = 0;
};

struct RankedSource {
  std::string name;
  double score = 0.0;

  bool operator==(const RankedSource&) const = default;
};

struct SimilarityReport {
  std::vector<RankedSource> ranked;  // ascending score, ties by name
  std::string chosen;
};

// Throws TooFewSamples (< 2 vectors) or DimensionMismatch.
DatasetMoments dataset_moments(std::span<const Eigen::VectorXd> features);
DatasetMoments dataset_moments(const std::vector<Sample>& samples);

// ||mu_a - mu_b||^2 + ||Sigma_a - Sigma_b||_F. Throws DimensionMismatch.
double domain_distance(const DatasetMoments& a, const DatasetMoments& b);

// Scores every whitelisted candidate found in the registry against the
// target's train pool (never the test split). Unknown names are skipped.
// Throws EmptyWhitelist when nothing resolves.
SimilarityReport select_source(const DatasetHandle& target, const DatasetRegistry& candidates,
                               std::span<const std::string> whitelist);

// CSV rendering used by `learn select-source`: header `name,score`.
std::string similarity_report_csv(const SimilarityReport& report);

}  // namespace learn
