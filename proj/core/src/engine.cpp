#include "learn/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "learn/active_query.hpp"
#include "learn/domain_selector.hpp"

namespace learn {

namespace fs = std::filesystem;

Clock steady_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
}

Clock frozen_clock() {
  return [] { return std::int64_t{0}; };
}

Evaluation evaluate(const LearnerState& state, const std::vector<Sample>& test_set) {
  if (test_set.empty()) throw_data("EmptyTestSet", "cannot evaluate on an empty test set");
  Evaluation ev;
  ev.per_sample.reserve(test_set.size());
  std::size_t correct = 0;
  for (const auto& s : test_set) {
    const auto pred = learner_predict(state, s.features());
    if (pred.argmax == LabelOracle::label(s)) ++correct;

    std::vector<ClassIndex> order(static_cast<std::size_t>(pred.probabilities.size()));
    std::iota(order.begin(), order.end(), ClassIndex{0});
    std::stable_sort(order.begin(), order.end(), [&](ClassIndex a, ClassIndex b) {
      return pred.probabilities[static_cast<Eigen::Index>(a)] > pred.probabilities[static_cast<Eigen::Index>(b)];
    });
    // The argmax comes from raw scores; keep it first even if probabilities tie.
    std::stable_partition(order.begin(), order.end(), [&](ClassIndex c) { return c == pred.argmax; });
    order.resize(std::min<std::size_t>(order.size(), 5));
    SamplePrediction sp{s.id(), order, {}};
    for (auto c : order) sp.top_scores.push_back(pred.probabilities[static_cast<Eigen::Index>(c)]);
    ev.per_sample.push_back(std::move(sp));
  }
  ev.top1_accuracy = static_cast<double>(correct) / static_cast<double>(test_set.size());
  return ev;
}

namespace {

std::string stage_label(std::size_t stage_index) { return "stage" + std::to_string(stage_index); }
std::string ckpt_label(std::size_t index) { return "ckpt" + std::to_string(index); }

std::vector<std::string> plan_candidates(const RunContext& ctx) {
  auto report = validate_plan(ctx.config, *ctx.registry);
  if (!report.ok()) {
    const auto& e = report.errors.front();
    throw_config(e.code, e.message);
  }
  return report.plan->source_candidates;
}

}  // namespace

StageOutcome run_stage(const RunContext& ctx, std::size_t stage_index,
                       const std::optional<LearnerState>& inherited,
                       const std::optional<std::string>& inherited_source,
                       const std::function<void(const ResultsRecord&)>& sink, Diagnostics* diag,
                       const CheckpointObserver* observer) {
  if (ctx.registry == nullptr) throw_runtime("MissingRegistry", "run context has no dataset registry");
  const auto& config = ctx.config;
  if (stage_index >= config.task.stages.size()) throw_runtime("InvalidStage", "stage index out of range");
  const auto& stage = config.task.stages[stage_index];
  const bool is_base = stage.kind == StageKind::base;
  if (is_base == inherited.has_value()) {
    throw_runtime("InvalidStage", is_base ? "base stage cannot inherit a model"
                                          : "adapt stage needs an inherited model");
  }

  const auto& target = ctx.registry->at(stage.dataset);
  const std::size_t C = target.class_count();
  const auto stage_tag = stage_label(stage_index);
  const auto digest = config_digest(config);

  StageOutcome out;
  if (is_base) {
    if (config.pinned_source) {
      out.source_dataset = *config.pinned_source;
    } else {
      const auto candidates = plan_candidates(ctx);
      out.source_dataset = select_source(target, *ctx.registry, candidates).chosen;
    }
    const auto& source = ctx.registry->at(out.source_dataset);
    auto rng = derive_stream(config.master_seed, {stage_tag, "source_fit"});
    const auto source_labeled = fully_labeled_pool(source);
    out.state = learner_fit_source(config.algorithm, config.algorithm_params, C, source_labeled, rng, diag);
  } else {
    out.state = *inherited;
    out.source_dataset = inherited_source.value_or("");
  }

  const auto schedule = build_schedule(stage.seed_budgets, stage.label_budgets, C,
                                       target.train_pool().size(), diag);
  LabeledState labeled;
  for (const auto& ckpt : schedule) {
    const auto t0 = ctx.clock();
    const auto tag = ckpt_label(ckpt.index);
    const auto req = next_acquisition(ckpt, labeled, C);

    std::vector<std::string> ids;
    if (req.kind == AcquisitionRequest::Kind::stratified_per_class) {
      auto rng = derive_stream(config.master_seed, {stage_tag, tag, "seed"});
      ids = stratified_seed_query(target, labeled, req.per_class_delta, rng, diag);
    } else if (req.total_delta > 0) {
      auto rng = derive_stream(config.master_seed, {stage_tag, tag, "query"});
      QueryContext qctx;
      qctx.rng = &rng;
      const auto unlabeled = unlabeled_examples(target, labeled);
      for (const auto& u : unlabeled) qctx.unlabeled_ids.push_back(u.id);
      if (config.query_strategy != QueryStrategy::random) {
        std::map<std::string, Eigen::VectorXd> preds;
        for (const auto& u : unlabeled) preds.emplace(u.id, learner_predict(out.state, u.features).probabilities);
        qctx.predictions = std::move(preds);
      }
      ids = run_query(config.query_strategy, qctx, req.total_delta);
    }

    labeled = acquire_labels(labeled, ids, target);
    if (!ids.empty()) {
      auto rng = derive_stream(config.master_seed, {stage_tag, tag, "train"});
      const auto lab = labeled_examples(target, labeled);
      const auto unl = unlabeled_examples(target, labeled);
      out.state = learner_update(out.state, config.algorithm_params, lab, unl, rng, diag);
    }
    if (observer && observer->on_checkpoint) {
      observer->on_checkpoint(stage_index, ckpt, ids, labeled, out.state);
    }

    auto ev = evaluate(out.state, target.test_set());
    ResultsRecord rec;
    rec.task = config.task.name;
    rec.algorithm = std::string(to_string(config.algorithm));
    rec.stage_index = stage_index;
    rec.stage_kind = stage.kind;
    rec.checkpoint_index = ckpt.index;
    rec.checkpoint_kind = ckpt.kind;
    rec.cumulative_target = ckpt.cumulative_target;
    rec.labeled_count = labeled.size();
    rec.pool_size = target.train_pool().size();
    rec.source_dataset = out.source_dataset;
    rec.per_sample = std::move(ev.per_sample);
    rec.top1_accuracy = ev.top1_accuracy;
    rec.elapsed_ms = ctx.clock() - t0;
    rec.config_digest = digest;
    if (sink) sink(rec);
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string run_experiment(const RunContext& ctx, Diagnostics* diag, const CheckpointObserver* observer) {
  if (ctx.registry == nullptr) throw_runtime("MissingRegistry", "run context has no dataset registry");
  if (ctx.results_path.empty()) throw_runtime("IoError", "results path is empty");
  auto report = validate_plan(ctx.config, *ctx.registry);
  if (diag) {
    for (const auto& w : report.warnings) diag->warn(w.code, w.subject, w.message);
  }
  if (!report.ok()) {
    const auto& e = report.errors.front();
    throw_config(e.code, e.message);
  }

  const fs::path final_path(ctx.results_path);
  if (final_path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(final_path.parent_path(), ec);
    if (ec) throw_data("IoError", "cannot create '" + final_path.parent_path().string() + "': " + ec.message());
  }
  const fs::path partial = final_path.string() + ".partial";
  {
    std::ofstream cfg(final_path.string() + ".config.json", std::ios::binary | std::ios::trunc);
    if (!cfg) throw_data("IoError", "cannot write config next to '" + final_path.string() + "'");
    cfg << config_to_json(ctx.config) << '\n';
  }
  std::ofstream out(partial, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("IoError", "cannot write '" + partial.string() + "'");
  auto sink = [&](const ResultsRecord& r) {
    out << record_to_json_line(r) << '\n';
    out.flush();
    if (!out) throw_data("IoError", "failed writing '" + partial.string() + "'");
  };

  std::optional<LearnerState> carried;
  std::optional<std::string> source;
  for (std::size_t i = 0; i < ctx.config.task.stages.size(); ++i) {
    auto outcome = run_stage(ctx, i, carried, source, sink, diag, observer);
    carried = std::move(outcome.state);
    source = std::move(outcome.source_dataset);
  }
  out.close();
  std::error_code ec;
  fs::rename(partial, final_path, ec);
  if (ec) throw_data("IoError", "cannot move results into place: " + ec.message());
  return final_path.string();
}

std::string default_results_path(const std::string& root, const std::string& results_file,
                                 std::chrono::system_clock::time_point start) {
  const std::time_t t = std::chrono::system_clock::to_time_t(start);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char date[16], time[16];
  std::strftime(date, sizeof date, "%Y-%m-%d", &tm);
  std::strftime(time, sizeof time, "%H-%M-%S", &tm);
  return (fs::path(root) / date / time / results_file).string();
}

}  // namespace learn
