#include "learn/protocol_config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "learn/dataset_store.hpp"
#include "learn/random.hpp"

namespace learn {

using ordered_json = nlohmann::ordered_json;

namespace {

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::string_view, N>& names) {
  return names.at(static_cast<std::size_t>(v));
}

constexpr std::array<std::string_view, 3> kProblemTypes = {"image_classification",
                                                           "video_classification",
                                                           "object_detection"};
constexpr std::array<std::string_view, 2> kStageKinds = {"base", "adapt"};
constexpr std::array<std::string_view, 3> kAlgorithms = {"centroid", "mme", "consistency"};
constexpr std::array<std::string_view, 3> kStrategies = {"random", "entropy", "margin"};

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view text, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <std::size_t N>
std::string join_names(const std::array<std::string_view, N>& names) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  return out;
}

[[noreturn]] void schema(const std::string& detail) { throw_config("SchemaViolation", detail); }

void require_exact_fields(const nlohmann::json& obj, const std::vector<std::string>& fields,
                          const std::string& where) {
  if (!obj.is_object()) schema(where + " must be an object");
  for (const auto& f : fields) {
    if (!obj.contains(f)) schema(where + ": missing field '" + f + "'");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(fields.begin(), fields.end(), it.key()) == fields.end()) {
      schema(where + ": unknown field '" + it.key() + "'");
    }
  }
}

std::string as_string(const nlohmann::json& v, const std::string& where) {
  if (!v.is_string()) schema(where + " must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> as_budgets(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) schema(where + " must be a list of positive integers");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) schema(where + " must contain integers");
    if (e.is_number_unsigned()) {
      out.push_back(e.get<std::size_t>());
    } else {
      const auto x = e.get<std::int64_t>();
      if (x <= 0) schema(where + " must contain positive integers");
      out.push_back(static_cast<std::size_t>(x));
    }
    if (out.back() == 0) schema(where + " must contain positive integers");
  }
  return out;
}

void check_strictly_increasing(const std::vector<std::size_t>& v, const std::string& where) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) schema(where + " must be strictly increasing");
  }
}

}  // namespace

std::string_view to_string(ProblemType v) { return enum_name(v, kProblemTypes); }
std::string_view to_string(StageKind v) { return enum_name(v, kStageKinds); }
std::string_view to_string(Algorithm v) { return enum_name(v, kAlgorithms); }
std::string_view to_string(QueryStrategy v) { return enum_name(v, kStrategies); }

Algorithm parse_algorithm(std::string_view text) {
  if (auto a = lookup<Algorithm>(text, kAlgorithms)) return *a;
  throw_config("InvalidParameter", "unknown algorithm '" + std::string(text) +
                                       "' (valid: " + join_names(kAlgorithms) + ")");
}

QueryStrategy parse_query_strategy(std::string_view text) {
  if (auto q = lookup<QueryStrategy>(text, kStrategies)) return *q;
  throw_config("InvalidParameter", "unknown query_strategy '" + std::string(text) +
                                       "' (valid: " + join_names(kStrategies) + ")");
}

void check_task_invariants(const TaskSpec& task) {
  if (task.name.empty()) schema("name must be non-empty");
  if (task.stages.empty()) schema("stages must be non-empty");
  for (std::size_t i = 0; i < task.stages.size(); ++i) {
    const auto& st = task.stages[i];
    const std::string where = "stages[" + std::to_string(i) + "]";
    if (i == 0 && st.kind != StageKind::base) schema(where + ".name must be \"base\"");
    if (i > 0 && st.kind != StageKind::adapt) schema(where + ".name must be \"adapt\"");
    if (st.dataset.empty()) schema(where + ".dataset must be non-empty");
    if (st.seed_budgets.empty() && st.label_budgets.empty()) {
      schema(where + ": seed_budgets and label_budget are both empty");
    }
    for (auto b : st.seed_budgets) {
      if (b == 0) schema(where + ".seed_budgets must contain positive integers");
    }
    for (auto b : st.label_budgets) {
      if (b == 0) schema(where + ".label_budget must contain positive integers");
    }
    check_strictly_increasing(st.seed_budgets, where + ".seed_budgets");
    check_strictly_increasing(st.label_budgets, where + ".label_budget");
  }
  std::set<std::string> seen;
  for (const auto& w : task.whitelist) {
    if (!seen.insert(w).second) schema("whitelist contains duplicate name '" + w + "'");
  }
  if (task.results_file.empty()) schema("results_file must be non-empty");
  if (task.results_file.front() == '/') schema("results_file must be a relative path");
}

TaskSpec parse_task_spec(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw_config("MalformedInput", e.what());
  }
  require_exact_fields(doc, {"name", "problem_type", "stages", "whitelist", "results_file"},
                       "task");

  TaskSpec task;
  task.name = as_string(doc["name"], "name");
  const auto pt = as_string(doc["problem_type"], "problem_type");
  auto ptype = lookup<ProblemType>(pt, kProblemTypes);
  if (!ptype) {
    schema("problem_type '" + pt + "' is not one of " + join_names(kProblemTypes));
  }
  task.problem_type = *ptype;

  const auto& stages = doc["stages"];
  if (!stages.is_array()) schema("stages must be a list");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string where = "stages[" + std::to_string(i) + "]";
    require_exact_fields(stages[i], {"name", "dataset", "seed_budgets", "label_budget"}, where);
    StageSpec st;
    const auto kind = as_string(stages[i]["name"], where + ".name");
    auto k = lookup<StageKind>(kind, kStageKinds);
    if (!k) schema(where + ".name must be \"base\" or \"adapt\"");
    st.kind = *k;
    st.dataset = as_string(stages[i]["dataset"], where + ".dataset");
    st.seed_budgets = as_budgets(stages[i]["seed_budgets"], where + ".seed_budgets");
    st.label_budgets = as_budgets(stages[i]["label_budget"], where + ".label_budget");
    task.stages.push_back(std::move(st));
  }

  const auto& wl = doc["whitelist"];
  if (!wl.is_array()) schema("whitelist must be a list of strings");
  for (const auto& w : wl) task.whitelist.push_back(as_string(w, "whitelist entry"));
  task.results_file = as_string(doc["results_file"], "results_file");

  check_task_invariants(task);
  return task;
}

TaskSpec load_task_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_config("MissingFile", "cannot open task file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_task_spec(ss.str());
}

namespace {

ordered_json task_to_json(const TaskSpec& task) {
  ordered_json j;
  j["name"] = task.name;
  j["problem_type"] = std::string(to_string(task.problem_type));
  j["stages"] = ordered_json::array();
  for (const auto& st : task.stages) {
    ordered_json s;
    s["name"] = std::string(to_string(st.kind));
    s["dataset"] = st.dataset;
    s["seed_budgets"] = st.seed_budgets;
    s["label_budget"] = st.label_budgets;
    j["stages"].push_back(std::move(s));
  }
  j["whitelist"] = task.whitelist;
  j["results_file"] = task.results_file;
  return j;
}

}  // namespace

std::string serialize_task_spec(const TaskSpec& task) { return task_to_json(task).dump(2) + "\n"; }

void check_config_invariants(const ExperimentConfig& config) {
  const auto& p = config.algorithm_params;
  auto bad = [](const std::string& key, const std::string& why) {
    throw_config("InvalidParameter", "algorithm_params." + key + " " + why);
  };
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) bad("lambda", "must be >= 0");
  if (!(p.learning_rate >= 0.0) || !std::isfinite(p.learning_rate)) {
    bad("learning_rate", "must be >= 0");
  }
  if (p.iterations < 1) bad("iterations", "must be >= 1");
  if (!(p.temperature > 0.0) || !std::isfinite(p.temperature)) bad("temperature", "must be > 0");
  if (p.feature_dim < 0) bad("feature_dim", "must be >= 0");
  if (p.temperature_grid.empty()) bad("temperature_grid", "must be non-empty");
  for (double t : p.temperature_grid) {
    if (!(t > 0.0) || !std::isfinite(t)) bad("temperature_grid", "entries must be > 0");
  }
  if (!(p.default_temperature > 0.0)) bad("default_temperature", "must be > 0");
  if (p.episodes < 1) bad("episodes", "must be >= 1");
  if (p.mask_count < 1) bad("mask_count", "must be >= 1");
  if (!(p.mask_fraction > 0.0 && p.mask_fraction < 1.0)) bad("mask_fraction", "must be in (0, 1)");
  if (p.rounds < 1) bad("rounds", "must be >= 1");
}

std::string config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["task"] = task_to_json(config.task);
  j["algorithm"] = std::string(to_string(config.algorithm));
  j["master_seed"] = config.master_seed;
  j["query_strategy"] = std::string(to_string(config.query_strategy));
  const auto& p = config.algorithm_params;
  ordered_json ap;
  ap["lambda"] = p.lambda;
  ap["learning_rate"] = p.learning_rate;
  ap["iterations"] = p.iterations;
  ap["temperature"] = p.temperature;
  ap["feature_dim"] = p.feature_dim;
  ap["temperature_grid"] = p.temperature_grid;
  ap["default_temperature"] = p.default_temperature;
  ap["episodes"] = p.episodes;
  ap["mask_count"] = p.mask_count;
  ap["mask_fraction"] = p.mask_fraction;
  ap["rounds"] = p.rounds;
  j["algorithm_params"] = std::move(ap);
  j["pinned_source"] = config.pinned_source ? ordered_json(*config.pinned_source) : ordered_json();
  return j.dump();
}

std::string config_digest(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(config))));
  return buf;
}

// --- overrides -------------------------------------------------------------

bool is_valid_override_key(std::string_view key) {
  static const std::regex re(R"([A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*)");
  return std::regex_match(key.begin(), key.end(), re);
}

OverrideEntry OverrideSet::parse_token(std::string_view token) {
  const auto eq = token.find('=');
  if (eq == std::string_view::npos) {
    throw_config("MalformedInput", "override '" + std::string(token) + "' is not key=value");
  }
  std::string key(token.substr(0, eq));
  if (!is_valid_override_key(key)) {
    throw_config("MalformedInput", "override key '" + key + "' is not a dotted identifier path");
  }
  return {std::move(key), std::string(token.substr(eq + 1))};
}

void OverrideSet::add(std::string key, std::string value) {
  if (!is_valid_override_key(key)) {
    throw_config("MalformedInput", "override key '" + key + "' is not a dotted identifier path");
  }
  entries_.push_back({std::move(key), std::move(value)});
}

void OverrideSet::add_token(std::string_view token) { entries_.push_back(parse_token(token)); }

namespace {

[[noreturn]] void mismatch(const std::string& key, const std::string& value, const char* expected) {
  throw_config("TypeMismatch", key + ": '" + value + "' is not " + expected);
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    mismatch(key, text, "an integer");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    mismatch(key, text, "an unsigned 64-bit integer");
  }
  return v;
}

double to_real(const std::string& key, const std::string& text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    mismatch(key, text, "a finite real number");
  }
  return v;
}

std::vector<std::string> to_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(text.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = [] {
    std::vector<std::pair<std::string, Setter>> t;
    auto real = [](double AlgorithmParams::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.algorithm_params.*field = to_real(k, v);
      };
    };
    auto integer = [](std::int64_t AlgorithmParams::*field) {
      return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.algorithm_params.*field = to_int(k, v);
      };
    };
    t.emplace_back("algorithm", [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.algorithm = parse_algorithm(v);
    });
    t.emplace_back("master_seed", [](ExperimentConfig& c, const std::string& k,
                                     const std::string& v) { c.master_seed = to_uint(k, v); });
    t.emplace_back("query_strategy", [](ExperimentConfig& c, const std::string&,
                                        const std::string& v) {
      c.query_strategy = parse_query_strategy(v);
    });
    t.emplace_back("pinned_source", [](ExperimentConfig& c, const std::string&,
                                       const std::string& v) {
      c.pinned_source = v.empty() ? std::nullopt : std::optional<std::string>(v);
    });
    t.emplace_back("task.name", [](ExperimentConfig& c, const std::string&, const std::string& v) {
      c.task.name = v;
    });
    t.emplace_back("task.problem_type", [](ExperimentConfig& c, const std::string& k,
                                           const std::string& v) {
      auto pt = lookup<ProblemType>(v, kProblemTypes);
      if (!pt) mismatch(k, v, "a problem type");
      c.task.problem_type = *pt;
    });
    t.emplace_back("task.whitelist", [](ExperimentConfig& c, const std::string&,
                                        const std::string& v) { c.task.whitelist = to_list(v); });
    t.emplace_back("task.results_file", [](ExperimentConfig& c, const std::string&,
                                           const std::string& v) { c.task.results_file = v; });
    t.emplace_back("algorithm_params.lambda", real(&AlgorithmParams::lambda));
    t.emplace_back("algorithm_params.learning_rate", real(&AlgorithmParams::learning_rate));
    t.emplace_back("algorithm_params.iterations", integer(&AlgorithmParams::iterations));
    t.emplace_back("algorithm_params.temperature", real(&AlgorithmParams::temperature));
    t.emplace_back("algorithm_params.feature_dim", integer(&AlgorithmParams::feature_dim));
    t.emplace_back("algorithm_params.temperature_grid",
                   [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                     std::vector<double> grid;
                     for (const auto& e : to_list(v)) grid.push_back(to_real(k, e));
                     c.algorithm_params.temperature_grid = std::move(grid);
                   });
    t.emplace_back("algorithm_params.default_temperature",
                   real(&AlgorithmParams::default_temperature));
    t.emplace_back("algorithm_params.episodes", integer(&AlgorithmParams::episodes));
    t.emplace_back("algorithm_params.mask_count", integer(&AlgorithmParams::mask_count));
    t.emplace_back("algorithm_params.mask_fraction", real(&AlgorithmParams::mask_fraction));
    t.emplace_back("algorithm_params.rounds", integer(&AlgorithmParams::rounds));
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentConfig apply_overrides(const ExperimentConfig& config, const OverrideSet& overrides) {
  ExperimentConfig out = config;
  bool touched_task = false;
  for (const auto& entry : overrides.entries()) {
    const auto& table = setters();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& s) { return s.first == entry.key; });
    if (it == table.end()) throw_config("UnknownKey", "unknown config key '" + entry.key + "'");
    it->second(out, entry.key, entry.value);
    touched_task = touched_task || entry.key.starts_with("task.");
  }
  if (touched_task) check_task_invariants(out.task);
  check_config_invariants(out);
  return out;
}

// --- registry & plan validation -------------------------------------------

void DatasetRegistry::add(std::shared_ptr<const DatasetHandle> dataset) {
  const std::string name = dataset->name();
  if (datasets_.contains(name)) throw_data("DuplicateDataset", "dataset '" + name + "' registered twice");
  datasets_.emplace(name, std::move(dataset));
}

std::shared_ptr<const DatasetHandle> DatasetRegistry::find(std::string_view name) const {
  auto it = datasets_.find(name);
  return it == datasets_.end() ? nullptr : it->second;
}

const DatasetHandle& DatasetRegistry::at(std::string_view name) const {
  auto ds = find(name);
  if (!ds) throw_config("UnknownDataset", "dataset '" + std::string(name) + "' is not registered");
  return *ds;
}

std::vector<std::string> DatasetRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : datasets_) out.push_back(name);
  return out;
}

PlanReport validate_plan(const ExperimentConfig& config, const DatasetRegistry& registry) {
  PlanReport report;
  auto error = [&](std::string code, std::string subject, std::string msg) {
    report.errors.push_back({std::move(code), std::move(subject), std::move(msg)});
  };

  try {
    check_task_invariants(config.task);
    check_config_invariants(config);
  } catch (const Error& e) {
    error(e.code(), config.task.name, e.detail());
  }

  if (config.task.problem_type == ProblemType::object_detection) {
    error("UnsupportedProblemType", "object_detection",
          "problem_type 'object_detection' is not supported; use image_classification or "
          "video_classification feature datasets");
  }

  std::shared_ptr<const DatasetHandle> base_target;
  for (std::size_t i = 0; i < config.task.stages.size(); ++i) {
    const auto& st = config.task.stages[i];
    auto ds = registry.find(st.dataset);
    if (!ds) {
      error("UnknownTargetDataset", st.dataset,
            "stage " + std::to_string(i) + " target dataset '" + st.dataset + "' is not registered");
      continue;
    }
    if (i == 0) base_target = ds;
    if (!st.label_budgets.empty() && st.label_budgets.back() > ds->train_pool().size()) {
      error("BudgetExceedsPool", st.dataset,
            "label budget " + std::to_string(st.label_budgets.back()) + " exceeds train pool of " +
                std::to_string(ds->train_pool().size()));
    }
    if (base_target && i > 0 && ds->class_names() != base_target->class_names()) {
      error("ClassMismatch", st.dataset,
            "stage " + std::to_string(i) + " classes differ from the base stage target");
    }
  }

  std::vector<std::string> candidates;
  for (const auto& w : config.task.whitelist) {
    auto ds = registry.find(w);
    if (!ds) {
      report.warnings.push_back(
          {"UnknownWhitelistDataset", w, "whitelist dataset '" + w + "' is not registered; skipped"});
      continue;
    }
    if (base_target && ds->class_names() != base_target->class_names()) {
      report.warnings.push_back(
          {"ClassMismatch", w, "whitelist dataset '" + w + "' has different classes; skipped"});
      continue;
    }
    if (base_target && ds->dim() != base_target->dim()) {
      report.warnings.push_back(
          {"DimensionMismatch", w, "whitelist dataset '" + w + "' has a different dim; skipped"});
      continue;
    }
    candidates.push_back(w);
  }

  if (config.pinned_source) {
    auto ds = registry.find(*config.pinned_source);
    if (!ds) {
      error("UnknownSourceDataset", *config.pinned_source,
            "pinned_source '" + *config.pinned_source + "' is not registered");
    } else if (base_target && (ds->class_names() != base_target->class_names() ||
                               ds->dim() != base_target->dim())) {
      error("ClassMismatch", *config.pinned_source,
            "pinned_source '" + *config.pinned_source + "' is incompatible with the target");
    }
  } else if (candidates.empty()) {
    error("EmptyWhitelist", "whitelist",
          "no whitelist dataset resolves and no pinned_source is set");
  }

  if (report.errors.empty()) report.plan = ValidatedPlan{config, std::move(candidates)};
  return report;
}

}  // namespace learn
