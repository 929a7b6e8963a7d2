#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "learn/dataset_store.hpp"
#include "learn/protocol_config.hpp"
#include "learn/random.hpp"

namespace learn {

struct QueryContext {
  std::vector<std::string> unlabeled_ids;
  // Class-probability vector per unlabeled id; required by entropy/margin.
  std::optional<std::map<std::string, Eigen::VectorXd>> predictions;
  RngStream* rng = nullptr;  // required by query_random
};

// Every strategy sorts the candidate ids before doing anything else, so the
// result never depends on the order the caller assembled them in.
// Throws InsufficientPool when k exceeds the candidate count.
std::vector<std::string> query_random(const QueryContext& ctx, std::size_t k);

// Descending H(p) = -sum p ln p, ties by id. Throws MissingPredictions.
std::vector<std::string> query_entropy(const QueryContext& ctx, std::size_t k);

// Ascending top1 - top2 margin, ties by id. Throws MissingPredictions.
std::vector<std::string> query_margin(const QueryContext& ctx, std::size_t k);

std::vector<std::string> run_query(QueryStrategy strategy, const QueryContext& ctx, std::size_t k);

double predictive_entropy(const Eigen::VectorXd& p);
double predictive_margin(const Eigen::VectorXd& p);

// For each class in index order, draws per_class_deltas[c] ids uniformly
// without replacement from that class's unlabeled pool members. A class with
// too few members gives all it has and a SeedShortfall warning.
std::vector<std::string> stratified_seed_query(const DatasetHandle& pool, const LabeledState& state,
                                               const std::vector<std::size_t>& per_class_deltas,
                                               RngStream& rng, Diagnostics* diag = nullptr);

}  // namespace learn
