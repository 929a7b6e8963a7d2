#include "learn/dataset_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "learn/protocol_config.hpp"

namespace learn {

namespace fs = std::filesystem;

Sample::Sample(std::string id, Eigen::VectorXd features, ClassIndex oracle_label)
    : id_(std::move(id)), features_(std::move(features)), oracle_label_(oracle_label) {}

DatasetHandle::DatasetHandle(std::string name, std::string domain_tag, std::size_t dim,
                             std::vector<std::string> class_names, std::vector<Sample> train_pool,
                             std::vector<Sample> test_set)
    : name_(std::move(name)),
      domain_tag_(std::move(domain_tag)),
      dim_(dim),
      class_names_(std::move(class_names)),
      train_pool_(std::move(train_pool)),
      test_set_(std::move(test_set)) {
  if (dim_ == 0) throw_data("DimensionMismatch", name_ + ": dim must be positive");
  if (class_names_.empty()) throw_data("UnknownLabel", name_ + ": no classes declared");

  std::unordered_map<std::string, std::size_t> all_ids;
  auto check = [&](const Sample& s, const char* split) {
    if (static_cast<std::size_t>(s.features().size()) != dim_) {
      throw_data("DimensionMismatch", name_ + "/" + split + " sample '" + s.id() + "' has " +
                                          std::to_string(s.features().size()) +
                                          " features, expected " + std::to_string(dim_));
    }
    if (!s.features().allFinite()) {
      throw_data("NonFiniteFeature", name_ + "/" + split + " sample '" + s.id() + "'");
    }
    if (LabelOracle::label(s) >= class_names_.size()) {
      throw_data("UnknownLabel", name_ + "/" + split + " sample '" + s.id() + "' label out of range");
    }
    if (!all_ids.emplace(s.id(), 0).second) {
      throw_data("DuplicateId", name_ + ": sample id '" + s.id() + "' appears more than once");
    }
  };
  for (const auto& s : train_pool_) check(s, "train");
  for (const auto& s : test_set_) check(s, "test");
  for (std::size_t i = 0; i < train_pool_.size(); ++i) train_index_.emplace(train_pool_[i].id(), i);
}

std::optional<std::size_t> DatasetHandle::train_index(const std::string& id) const {
  auto it = train_index_.find(id);
  if (it == train_index_.end()) return std::nullopt;
  return it->second;
}

DatasetHandle DatasetHandle::renamed(std::string name, std::string domain_tag) const {
  DatasetHandle copy = *this;
  copy.name_ = std::move(name);
  copy.domain_tag_ = std::move(domain_tag);
  return copy;
}

std::size_t LabeledState::count(ClassIndex c) const {
  auto it = per_class_counts.find(c);
  return it == per_class_counts.end() ? 0 : it->second;
}

LabeledState acquire_labels(const LabeledState& state, std::span<const std::string> ids,
                            const DatasetHandle& pool) {
  LabeledState next = state;
  for (const auto& id : ids) {
    const auto idx = pool.train_index(id);
    if (!idx) throw_runtime("UnknownId", "sample '" + id + "' is not in the train pool of " + pool.name());
    if (!next.labeled_ids.insert(id).second) {
      throw_runtime("AlreadyLabeled", "sample '" + id + "' is already labeled");
    }
    ++next.per_class_counts[LabelOracle::label(pool.train_pool()[*idx])];
  }
  return next;
}

std::vector<LabeledExample> labeled_examples(const DatasetHandle& pool, const LabeledState& state) {
  std::vector<LabeledExample> out;
  out.reserve(state.size());
  for (const auto& s : pool.train_pool()) {
    if (state.contains(s.id())) out.push_back({s.id(), s.features(), LabelOracle::label(s)});
  }
  return out;
}

std::vector<UnlabeledExample> unlabeled_examples(const DatasetHandle& pool, const LabeledState& state) {
  std::vector<UnlabeledExample> out;
  for (const auto& s : pool.train_pool()) {
    if (!state.contains(s.id())) out.push_back({s.id(), s.features()});
  }
  return out;
}

std::vector<LabeledExample> fully_labeled_pool(const DatasetHandle& pool) {
  std::vector<LabeledExample> out;
  out.reserve(pool.train_pool().size());
  for (const auto& s : pool.train_pool()) out.push_back({s.id(), s.features(), LabelOracle::label(s)});
  return out;
}

// --- file IO -----------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<Sample> read_csv(const fs::path& path, std::size_t dim,
                             const std::vector<std::string>& classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("MissingFile", "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw_data("MalformedCsv", path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw_data("MalformedCsv", path.string() + ": header must start with id,label");
  }
  if (header.size() - 2 != dim) {
    throw_data("DimensionMismatch", path.string() + ": header declares " +
                                        std::to_string(header.size() - 2) + " features, manifest dim " +
                                        std::to_string(dim));
  }

  std::vector<Sample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != dim + 2) {
      throw_data("DimensionMismatch", where + ": row has " + std::to_string(cells.size() - 2) +
                                          " features, expected " + std::to_string(dim));
    }
    auto cls = std::find(classes.begin(), classes.end(), cells[1]);
    if (cls == classes.end()) throw_data("UnknownLabel", where + ": label '" + cells[1] + "'");
    Eigen::VectorXd f(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& cell = cells[j + 2];
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw_data("MalformedCsv", where + ": '" + cell + "' is not a number");
      }
      f[static_cast<Eigen::Index>(j)] = v;
    }
    out.emplace_back(cells[0], std::move(f),
                     static_cast<ClassIndex>(std::distance(classes.begin(), cls)));
  }
  return out;
}

void write_csv(const fs::path& path, const DatasetHandle& ds, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("IoError", "cannot write '" + path.string() + "'");
  out << "id,label";
  for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (const auto& s : samples) {
    out << s.id() << ',' << ds.class_names()[LabelOracle::label(s)];
    for (Eigen::Index j = 0; j < s.features().size(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, s.features()[j]);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw_data("IoError", "failed writing '" + path.string() + "'");
}

}  // namespace

DatasetHandle load_feature_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw_data("MissingFile", "cannot open manifest '" + manifest_path + "'");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw_data("MalformedManifest", manifest_path + ": " + e.what());
  }
  try {
    const auto name = m.at("name").get<std::string>();
    const auto tag = m.at("domain_tag").get<std::string>();
    const auto dim = m.at("dim").get<std::size_t>();
    const auto classes = m.at("classes").get<std::vector<std::string>>();
    const fs::path base = fs::path(manifest_path).parent_path();
    auto train = read_csv(base / m.at("train_csv").get<std::string>(), dim, classes);
    auto test = read_csv(base / m.at("test_csv").get<std::string>(), dim, classes);
    return DatasetHandle(name, tag, dim, classes, std::move(train), std::move(test));
  } catch (const nlohmann::json::exception& e) {
    throw_data("MalformedManifest", manifest_path + ": " + e.what());
  }
}

void write_feature_dataset(const DatasetHandle& dataset, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_data("IoError", "cannot create '" + dir + "': " + ec.message());
  const std::string train = dataset.name() + "_train.csv";
  const std::string test = dataset.name() + "_test.csv";
  write_csv(fs::path(dir) / train, dataset, dataset.train_pool());
  write_csv(fs::path(dir) / test, dataset, dataset.test_set());

  nlohmann::ordered_json m;
  m["name"] = dataset.name();
  m["domain_tag"] = dataset.domain_tag();
  m["dim"] = dataset.dim();
  m["classes"] = dataset.class_names();
  m["train_csv"] = train;
  m["test_csv"] = test;
  const auto path = fs::path(dir) / (dataset.name() + ".json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("IoError", "cannot write '" + path.string() + "'");
  out << m.dump(2) << '\n';
}

DatasetRegistry load_registry(const std::string& dir) {
  if (!fs::is_directory(dir)) throw_data("MissingFile", "data directory '" + dir + "' does not exist");
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());
  DatasetRegistry registry;
  for (const auto& p : manifests) {
    registry.add(std::make_shared<const DatasetHandle>(load_feature_dataset(p.string())));
  }
  return registry;
}

}  // namespace learn
