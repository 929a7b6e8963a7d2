#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "learn/error.hpp"

namespace learn {

class DatasetRegistry;

using ClassIndex = std::size_t;

// A pool or test sample. The ground-truth label is private: only
// LabelOracle can read it, which is how learners are kept to the labels
// that were actually acquired.
class Sample {
 public:
  Sample(std::string id, Eigen::VectorXd features, ClassIndex oracle_label);

  const std::string& id() const noexcept { return id_; }
  const Eigen::VectorXd& features() const noexcept { return features_; }

 private:
  friend class LabelOracle;
  std::string id_;
  Eigen::VectorXd features_;
  ClassIndex oracle_label_;
};

// Ground-truth access point for acquisition, evaluation and data writers.
class LabelOracle {
 public:
  static ClassIndex label(const Sample& sample) noexcept { return sample.oracle_label_; }
};

class DatasetHandle {
 public:
  // Validates dimensions, label range, finiteness and id uniqueness.
  // Throws DimensionMismatch, UnknownLabel, NonFiniteFeature, DuplicateId.
  DatasetHandle(std::string name, std::string domain_tag, std::size_t dim,
                std::vector<std::string> class_names, std::vector<Sample> train_pool,
                std::vector<Sample> test_set);

  const std::string& name() const noexcept { return name_; }
  const std::string& domain_tag() const noexcept { return domain_tag_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t class_count() const noexcept { return class_names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<Sample>& train_pool() const noexcept { return train_pool_; }
  const std::vector<Sample>& test_set() const noexcept { return test_set_; }

  std::optional<std::size_t> train_index(const std::string& id) const;

  // Copy with a different name/domain tag; samples are shared by value.
  DatasetHandle renamed(std::string name, std::string domain_tag) const;

 private:
  std::string name_;
  std::string domain_tag_;
  std::size_t dim_;
  std::vector<std::string> class_names_;
  std::vector<Sample> train_pool_;
  std::vector<Sample> test_set_;
  std::unordered_map<std::string, std::size_t> train_index_;
};

struct LabeledExample {
  std::string id;
  Eigen::VectorXd features;
  ClassIndex label;
};

struct UnlabeledExample {
  std::string id;
  Eigen::VectorXd features;
};

struct LabeledState {
  std::set<std::string> labeled_ids;
  std::map<ClassIndex, std::size_t> per_class_counts;

  std::size_t size() const noexcept { return labeled_ids.size(); }
  std::size_t count(ClassIndex c) const;
  bool contains(const std::string& id) const { return labeled_ids.contains(id); }

  bool operator==(const LabeledState&) const = default;
};

// Functional update: returns a new state with `ids` added.
// Throws UnknownId or AlreadyLabeled (including duplicates inside `ids`).
LabeledState acquire_labels(const LabeledState& state, std::span<const std::string> ids,
                            const DatasetHandle& pool);

// Labeled/unlabeled views over the train pool, in pool order.
std::vector<LabeledExample> labeled_examples(const DatasetHandle& pool, const LabeledState& state);
std::vector<UnlabeledExample> unlabeled_examples(const DatasetHandle& pool, const LabeledState& state);
std::vector<LabeledExample> fully_labeled_pool(const DatasetHandle& pool);

// Manifest: JSON object {name, domain_tag, dim, classes, train_csv, test_csv};
// CSV paths resolve relative to the manifest. CSV header: id,label,f0..f{d-1}
// with the label given as a class name.
DatasetHandle load_feature_dataset(const std::string& manifest_path);

// Writes `<dir>/<name>.json`, `<dir>/<name>_train.csv`, `<dir>/<name>_test.csv`.
// Numbers use shortest round-trip formatting so reloading is exact.
void write_feature_dataset(const DatasetHandle& dataset, const std::string& dir);

// Loads every *.json manifest in `dir` (sorted by file name).
DatasetRegistry load_registry(const std::string& dir);

}  // namespace learn
