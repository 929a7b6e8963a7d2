#include "learn/domain_selector.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "learn/protocol_config.hpp"

namespace learn {

DatasetMoments dataset_moments(std::span<const Eigen::VectorXd> features) {
  if (features.size() < 2) {
    throw_data("TooFewSamples", "moments need at least 2 vectors, got " + std::to_string(features.size()));
  }
  const auto d = features.front().size();
  for (const auto& f : features) {
    if (f.size() != d) throw_data("DimensionMismatch", "feature vectors differ in length");
  }
  const auto n = static_cast<double>(features.size());
  DatasetMoments m;
  m.sample_count = features.size();
  m.mean = Eigen::VectorXd::Zero(d);
  for (const auto& f : features) m.mean += f;
  m.mean /= n;
  m.covariance = Eigen::MatrixXd::Zero(d, d);
  for (const auto& f : features) {
    const Eigen::VectorXd c = f - m.mean;
    m.covariance.noalias() += c * c.transpose();
  }
  m.covariance /= (n - 1.0);
  // Exact symmetry regardless of accumulation order.
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  return m;
}

DatasetMoments dataset_moments(const std::vector<Sample>& samples) {
  std::vector<Eigen::VectorXd> features;
  features.reserve(samples.size());
  for (const auto& s : samples) features.push_back(s.features());
  return dataset_moments(features);
}

double domain_distance(const DatasetMoments& a, const DatasetMoments& b) {
  if (a.mean.size() != b.mean.size() || a.covariance.rows() != b.covariance.rows()) {
    throw_data("DimensionMismatch", "moments have different dimensions");
  }
  return (a.mean - b.mean).squaredNorm() + (a.covariance - b.covariance).norm();
}

SimilarityReport select_source(const DatasetHandle& target, const DatasetRegistry& candidates,
                               std::span<const std::string> whitelist) {
  const auto target_moments = dataset_moments(target.train_pool());
  SimilarityReport report;
  std::set<std::string> seen;
  for (const auto& name : whitelist) {
    auto ds = candidates.find(name);
    if (!ds || !seen.insert(name).second) continue;
    if (ds->dim() != target.dim()) continue;
    report.ranked.push_back({name, domain_distance(target_moments, dataset_moments(ds->train_pool()))});
  }
  if (report.ranked.empty()) {
    throw_config("EmptyWhitelist", "no whitelisted source dataset is available for target '" +
                                       target.name() + "'");
  }
  std::sort(report.ranked.begin(), report.ranked.end(), [](const RankedSource& x, const RankedSource& y) {
    return x.score != y.score ? x.score < y.score : x.name < y.name;
  });
  report.chosen = report.ranked.front().name;
  return report;
}

std::string similarity_report_csv(const SimilarityReport& report) {
  std::string out = "name,score\n";
  char buf[64];
  for (const auto& r : report.ranked) {
    std::snprintf(buf, sizeof buf, "%.12g", r.score);
    out += r.name + "," + buf + "\n";
  }
  return out;
}

}  // namespace learn
