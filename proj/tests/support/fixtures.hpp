#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "learn/dataset_store.hpp"
#include "learn/error.hpp"
#include "learn/mme.hpp"
#include "learn/protocol_config.hpp"
#include "learn/random.hpp"

namespace learn::testing {

// Code of the learn::Error thrown by f, or "" if it returns normally.
template <typename F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

template <typename F>
ErrorCategory error_category(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  throw std::logic_error("expected a learn::Error");
}

inline Eigen::VectorXd random_vector(RngStream& rng, std::size_t d, double scale = 1.0) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
  return v;
}

inline Eigen::MatrixXd random_matrix(RngStream& rng, std::size_t rows, std::size_t cols,
                                     double scale = 1.0) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

// Uniform integer in [lo, hi].
inline std::size_t random_between(RngStream& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform_index(hi - lo + 1));
}

inline std::vector<std::string> class_names(std::size_t c) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < c; ++k) names.push_back("c" + std::to_string(k));
  return names;
}

// Pool whose class of sample i is labels[i]; features are drawn around a per-class mean.
inline DatasetHandle make_dataset(const std::string& name, std::size_t c, std::size_t d,
                                  const std::vector<ClassIndex>& train_labels,
                                  const std::vector<ClassIndex>& test_labels, RngStream& rng,
                                  double separation = 3.0) {
  std::vector<Eigen::VectorXd> means;
  for (std::size_t k = 0; k < c; ++k) means.push_back(random_vector(rng, d, separation));
  auto build = [&](const std::vector<ClassIndex>& labels, const char* prefix) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out.emplace_back(prefix + std::to_string(i), means[labels[i]] + random_vector(rng, d),
                       labels[i]);
    }
    return out;
  };
  return DatasetHandle(name, name, d, class_names(c), build(train_labels, "tr"),
                       build(test_labels, "te"));
}

inline std::vector<ClassIndex> balanced_labels(std::size_t c, std::size_t per_class) {
  std::vector<ClassIndex> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t k = 0; k < c; ++k) labels.push_back(k);
  }
  return labels;
}

inline std::vector<LabeledExample> random_labeled(RngStream& rng, std::size_t c, std::size_t d,
                                                  std::size_t n) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"l" + std::to_string(i), random_vector(rng, d),
                   static_cast<ClassIndex>(rng.uniform_index(c))});
  }
  return out;
}

inline std::vector<UnlabeledExample> random_unlabeled(RngStream& rng, std::size_t d, std::size_t n) {
  std::vector<UnlabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"u" + std::to_string(i), random_vector(rng, d)});
  return out;
}

// MME model with every prototype active.
inline MmeModel random_mme_model(RngStream& rng, std::size_t c, std::size_t d, std::size_t d_prime,
                                 double temperature) {
  MmeModel m;
  m.feature_map = random_matrix(rng, d_prime, d);
  m.prototypes = random_matrix(rng, c, d_prime);
  m.temperature = temperature;
  return m;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("learn_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Two-stage task over the standard synthetic benchmark domains.
inline TaskSpec benchmark_task(std::vector<std::size_t> seeds = {1, 2, 5, 10},
                               std::vector<std::size_t> labels = {50, 125, 250, 500}) {
  TaskSpec t;
  t.name = "synthetic_shift";
  t.problem_type = ProblemType::image_classification;
  t.stages = {{StageKind::base, "target_base", seeds, labels},
              {StageKind::adapt, "target_adapt", seeds, labels}};
  t.whitelist = {"source"};
  t.results_file = "results.jsonl";
  return t;
}

}  // namespace learn::testing
