#include "learn/active_query.hpp"

#include <algorithm>
#include <cmath>

namespace learn {

namespace {

std::vector<std::string> sorted_candidates(const QueryContext& ctx, std::size_t k) {
  std::vector<std::string> ids = ctx.unlabeled_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw_runtime("DuplicateId", "query candidates contain a duplicate id");
  }
  if (k > ids.size()) {
    throw_runtime("InsufficientPool", "requested " + std::to_string(k) + " ids from a pool of " +
                                          std::to_string(ids.size()));
  }
  return ids;
}

const Eigen::VectorXd& prediction_for(const QueryContext& ctx, const std::string& id) {
  if (!ctx.predictions) throw_runtime("MissingPredictions", "strategy needs model predictions");
  auto it = ctx.predictions->find(id);
  if (it == ctx.predictions->end()) {
    throw_runtime("MissingPredictions", "no prediction for unlabeled id '" + id + "'");
  }
  const auto& p = it->second;
  if (p.size() == 0 || std::abs(p.sum() - 1.0) > 1e-9 || (p.array() < 0.0).any()) {
    throw_runtime("InvalidPredictions", "prediction for '" + id + "' is not a probability vector");
  }
  return p;
}

// Orders ids by key (descending when `descending`), ties by id ascending.
std::vector<std::string> rank_by(const QueryContext& ctx, std::size_t k, bool descending,
                                 double (*key)(const Eigen::VectorXd&)) {
  auto ids = sorted_candidates(ctx, k);
  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(ids.size());
  for (auto& id : ids) scored.emplace_back(key(prediction_for(ctx, id)), std::move(id));
  std::stable_sort(scored.begin(), scored.end(), [descending](const auto& a, const auto& b) {
    return descending ? a.first > b.first : a.first < b.first;
  });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(std::move(scored[i].second));
  return out;
}

}  // namespace

double predictive_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

double predictive_margin(const Eigen::VectorXd& p) {
  if (p.size() < 2) return 1.0;
  double top1 = -1.0, top2 = -1.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > top1) {
      top2 = top1;
      top1 = p[i];
    } else if (p[i] > top2) {
      top2 = p[i];
    }
  }
  return top1 - top2;
}

std::vector<std::string> query_random(const QueryContext& ctx, std::size_t k) {
  auto ids = sorted_candidates(ctx, k);
  if (k == 0) return {};
  if (ctx.rng == nullptr) throw_runtime("MissingStream", "query_random needs a random stream");
  ctx.rng->shuffle(ids);
  ids.resize(k);
  return ids;
}

std::vector<std::string> query_entropy(const QueryContext& ctx, std::size_t k) {
  return rank_by(ctx, k, true, &predictive_entropy);
}

std::vector<std::string> query_margin(const QueryContext& ctx, std::size_t k) {
  return rank_by(ctx, k, false, &predictive_margin);
}

std::vector<std::string> run_query(QueryStrategy strategy, const QueryContext& ctx, std::size_t k) {
  switch (strategy) {
    case QueryStrategy::random:
      return query_random(ctx, k);
    case QueryStrategy::entropy:
      return query_entropy(ctx, k);
    case QueryStrategy::margin:
      return query_margin(ctx, k);
  }
  throw_runtime("InvalidParameter", "unknown query strategy");
}

std::vector<std::string> stratified_seed_query(const DatasetHandle& pool, const LabeledState& state,
                                               const std::vector<std::size_t>& per_class_deltas,
                                               RngStream& rng, Diagnostics* diag) {
  std::vector<std::vector<std::string>> members(pool.class_count());
  for (const auto& s : pool.train_pool()) {
    if (!state.contains(s.id())) members[LabelOracle::label(s)].push_back(s.id());
  }
  std::vector<std::string> out;
  for (ClassIndex c = 0; c < per_class_deltas.size() && c < members.size(); ++c) {
    auto& m = members[c];
    std::size_t want = per_class_deltas[c];
    if (want > m.size()) {
      warn(diag, "SeedShortfall", pool.class_names()[c],
           "class '" + pool.class_names()[c] + "' has " + std::to_string(m.size()) +
               " unlabeled samples, " + std::to_string(want) + " requested");
      want = m.size();
    }
    // Partial Fisher-Yates: the first `want` slots are a uniform draw.
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(m.size() - i));
      std::swap(m[i], m[j]);
      out.push_back(m[i]);
    }
  }
  return out;
}

}  // namespace learn
