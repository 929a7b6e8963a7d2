#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "learn/dataset_store.hpp"
#include "learn/domain_selector.hpp"
#include "learn/engine.hpp"
#include "learn/report.hpp"
#include "learn/synthetic.hpp"

namespace learn::cli {

namespace {

namespace fs = std::filesystem;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return kExitConfig;
    case ErrorCategory::data: return kExitData;
    case ErrorCategory::runtime: return kExitRuntime;
  }
  return kExitRuntime;
}

void print_warnings(const std::vector<Diagnostic>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w.code << ": " << w.message << '\n';
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

struct ConfigArgs {
  std::string task_file;
  std::string algorithm = "centroid";
  std::uint64_t seed = 0;
  std::string query_strategy = "random";
  std::string pinned_source;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a, bool require_algorithm) {
  cmd->add_option("--task", a.task_file, "Task JSON file")->required();
  auto* alg = cmd->add_option("--algorithm", a.algorithm, "Learner: centroid, mme, consistency");
  if (require_algorithm) alg->required();
  cmd->add_option("--seed", a.seed, "Master seed (64-bit unsigned)");
  cmd->add_option("--query-strategy", a.query_strategy, "Label-budget query: random, entropy, margin");
  cmd->add_option("--pinned-source", a.pinned_source, "Use this source dataset instead of selecting one");
  std::string keys;
  for (const auto& k : override_keys()) keys += "\n  " + k;
  cmd->add_option("--set", a.overrides, "Override key=value (repeatable). Keys:" + keys);
}

ExperimentConfig build_config(const ConfigArgs& a) {
  ExperimentConfig config;
  config.task = load_task_spec(a.task_file);
  config.algorithm = parse_algorithm(a.algorithm);
  config.master_seed = a.seed;
  config.query_strategy = parse_query_strategy(a.query_strategy);
  if (!a.pinned_source.empty()) config.pinned_source = a.pinned_source;
  check_config_invariants(config);
  OverrideSet overrides;
  for (const auto& tok : a.overrides) overrides.add_token(tok);
  return apply_overrides(config, overrides);
}

int cmd_run(const ConfigArgs& a, const std::string& data_dir, const std::string& output_dir,
            const std::string& output_root, bool frozen, std::ostream& out, std::ostream& err) {
  const auto config = build_config(a);
  const auto registry = load_registry(data_dir);
  RunContext ctx;
  ctx.config = config;
  ctx.registry = &registry;
  ctx.clock = frozen ? frozen_clock() : steady_clock_ms();
  ctx.results_path = output_dir.empty()
                         ? default_results_path(output_root, config.task.results_file,
                                                std::chrono::system_clock::now())
                         : (fs::path(output_dir) / config.task.results_file).string();
  Diagnostics diag;
  const auto path = run_experiment(ctx, &diag);
  print_warnings(diag.entries(), err);
  out << path << '\n';
  return kExitOk;
}

int cmd_validate(const ConfigArgs& a, const std::string& data_dir, std::ostream& out, std::ostream& err) {
  const auto config = build_config(a);
  if (data_dir.empty()) {
    out << "ok: " << config.task.name << " (" << config.task.stages.size() << " stages, parse only)\n";
    return kExitOk;
  }
  const auto registry = load_registry(data_dir);
  auto report = validate_plan(config, registry);
  print_warnings(report.warnings, err);
  if (!report.ok()) {
    const auto& e = report.errors.front();
    throw_config(e.code, e.message);
  }
  out << "ok: " << config.task.name << " (" << config.task.stages.size() << " stages, "
      << report.plan->source_candidates.size() << " source candidates)\n";
  return kExitOk;
}

struct SynthArgs {
  std::string out_dir;
  std::string preset;
  double severity = 1.0;
  std::size_t classes = 5;
  std::size_t dim = 16;
  std::size_t train = 100;
  std::size_t test = 50;
  double separation = 4.0;
  std::uint64_t seed = 0;
  std::vector<std::string> domains;
};

// name[:angles_deg[:shift[:noise]]], angles separated by '/'.
DomainTransform parse_domain(const std::string& text, const SynthSpec& spec) {
  const auto parts = split(text, ':');
  if (parts.empty() || parts.size() > 4 || parts[0].empty()) {
    throw_config("InvalidSpec", "domain '" + text + "' is not name[:angles_deg[:shift[:noise]]]");
  }
  auto number = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw_config("InvalidSpec", "domain '" + text + "': '" + s + "' is not a number");
    }
  };
  DomainTransform d;
  d.name = parts[0];
  if (parts.size() > 1 && !parts[1].empty()) {
    for (const auto& a : split(parts[1], '/')) d.rotation_angles.push_back(number(a) * std::numbers::pi / 180.0);
  }
  if (parts.size() > 2 && !parts[2].empty()) {
    const double shift = number(parts[2]);
    if (shift != 0.0) d.translation = shift * synthetic_shift_direction(spec);
  }
  d.noise_scale = parts.size() > 3 && !parts[3].empty() ? number(parts[3]) : 1.0;
  return d;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthSpec spec;
  if (a.preset == "benchmark") {
    spec = standard_benchmark_spec(a.seed, a.severity);
  } else if (!a.preset.empty()) {
    throw_config("InvalidSpec", "unknown preset '" + a.preset + "' (valid: benchmark)");
  } else {
    spec.classes = a.classes;
    spec.dim = a.dim;
    spec.per_class_train = a.train;
    spec.per_class_test = a.test;
    spec.class_separation = a.separation;
    spec.seed = a.seed;
    for (const auto& d : a.domains) spec.domains.push_back(parse_domain(d, spec));
  }
  const auto datasets = generate_synthetic_domains(spec);
  for (const auto& ds : datasets) write_feature_dataset(ds, a.out_dir);
  out << a.out_dir << '\n';
  return kExitOk;
}

int cmd_select_source(const std::string& target, const std::string& data_dir, const std::string& whitelist,
                      std::ostream& out) {
  const auto registry = load_registry(data_dir);
  const auto& ds = registry.at(target);
  const auto names = whitelist.empty() ? registry.names() : split(whitelist, ',');
  out << similarity_report_csv(select_source(ds, registry, names));
  return kExitOk;
}

int cmd_report(const std::string& results, const std::string& format_text, std::string out_path,
               std::ostream& out) {
  const auto format = parse_report_format(format_text);
  const auto text = render_report(read_results_file(results), format);
  if (out_path.empty()) out_path = results + (format == ReportFormat::csv ? ".csv" : ".svg");
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw_data("IoError", "cannot write '" + out_path + "'");
  f << text;
  if (!f) throw_data("IoError", "failed writing '" + out_path + "'");
  out << out_path << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"learn: multi-stage, domain-adaptive incremental n-shot experiment harness"};
  app.require_subcommand(1);

  ConfigArgs run_args;
  std::string run_data, run_output_dir, run_output_root = "outputs";
  bool frozen = false;
  auto* run_cmd = app.add_subcommand("run", "Run a task end to end and write a results file");
  add_config_options(run_cmd, run_args, true);
  run_cmd->add_option("--data", run_data, "Directory of dataset manifests")->required();
  run_cmd->add_option("--output-dir", run_output_dir, "Write results directly under this directory");
  run_cmd->add_option("--output-root", run_output_root,
                      "Root for the default <root>/<date>/<time>/ layout (default: outputs)");
  run_cmd->add_flag("--frozen-clock", frozen, "Report elapsed_ms = 0 so reruns are byte-identical");

  ConfigArgs val_args;
  std::string val_data;
  auto* val_cmd = app.add_subcommand("validate", "Parse a task and check it against the datasets");
  add_config_options(val_cmd, val_args, false);
  val_cmd->add_option("--data", val_data, "Directory of dataset manifests (omit to parse only)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic domain-shifted feature datasets");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--preset", synth.preset, "'benchmark': the standard 3-domain benchmark");
  synth_cmd->add_option("--severity", synth.severity, "Shift severity for --preset benchmark");
  synth_cmd->add_option("--classes", synth.classes, "Number of classes C");
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension d");
  synth_cmd->add_option("--train", synth.train, "Train samples per class");
  synth_cmd->add_option("--test", synth.test, "Test samples per class");
  synth_cmd->add_option("--separation", synth.separation, "Pairwise distance of class means");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--domain", synth.domains,
                        "name[:angles_deg[:shift[:noise]]] (repeatable; angles separated by '/')");

  std::string sel_target, sel_data, sel_whitelist;
  auto* sel_cmd = app.add_subcommand("select-source", "Rank source datasets by distance to a target");
  sel_cmd->add_option("--target", sel_target, "Target dataset name")->required();
  sel_cmd->add_option("--data", sel_data, "Directory of dataset manifests")->required();
  sel_cmd->add_option("--whitelist", sel_whitelist, "Comma-separated candidates (default: all)");

  std::string rep_results, rep_format = "csv", rep_out;
  auto* rep_cmd = app.add_subcommand("report", "Render a results file as CSV or SVG");
  rep_cmd->add_option("--results", rep_results, "Results file (JSON lines)")->required();
  rep_cmd->add_option("--format", rep_format, "csv or svg");
  rep_cmd->add_option("--out", rep_out, "Output file (default: <results>.<format>)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_args, run_data, run_output_dir, run_output_root, frozen, out, err);
    if (*val_cmd) return cmd_validate(val_args, val_data, out, err);
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*sel_cmd) return cmd_select_source(sel_target, sel_data, sel_whitelist, out);
    if (*rep_cmd) return cmd_report(rep_results, rep_format, rep_out, out);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.detail() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace learn::cli
