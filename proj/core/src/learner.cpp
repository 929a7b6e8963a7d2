#include "learn/learner.hpp"

namespace learn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

CentroidModel centroid_update(const CentroidModel& previous, const CentroidOptions& options,
                              std::span<const LabeledExample> labeled, RngStream& rng) {
  if (labeled.empty()) return previous;
  auto fitted = centroid_fit_fixed(labeled, previous.class_count(), previous.temperature);
  if (centroid_tune_feasible(labeled, previous.class_count())) {
    fitted.temperature = centroid_tune(labeled, previous.class_count(), options, rng);
  }
  return fill_absent_classes(std::move(fitted), previous);
}

}  // namespace

CentroidOptions centroid_options(const AlgorithmParams& params) {
  return {params.temperature_grid, params.default_temperature,
          static_cast<std::size_t>(params.episodes)};
}

MmeOptions mme_options(const AlgorithmParams& params) {
  return {static_cast<std::size_t>(params.feature_dim), params.temperature, params.lambda,
          params.learning_rate, static_cast<std::size_t>(params.iterations)};
}

Algorithm algorithm_of(const LearnerState& state) {
  return std::visit(overloaded{[](const CentroidModel&) { return Algorithm::centroid; },
                               [](const MmeModel&) { return Algorithm::mme; },
                               [](const ConsistencyState&) { return Algorithm::consistency; }},
                    state);
}

LearnerState learner_fit_source(Algorithm algorithm, const AlgorithmParams& params,
                                std::size_t class_count, std::span<const LabeledExample> source,
                                RngStream& rng, Diagnostics* diag) {
  switch (algorithm) {
    case Algorithm::centroid:
      return centroid_fit(source, class_count, centroid_options(params), rng);
    case Algorithm::mme:
      return mme_init(source, class_count, mme_options(params), diag);
    case Algorithm::consistency: {
      ConsistencyState st;
      st.base = centroid_fit(source, class_count, centroid_options(params), rng);
      st.mask_count = static_cast<std::size_t>(params.mask_count);
      st.mask_fraction = params.mask_fraction;
      st.rounds = static_cast<std::size_t>(params.rounds);
      return st;
    }
  }
  throw_runtime("InvalidParameter", "unknown algorithm");
}

LearnerState learner_update(const LearnerState& previous, const AlgorithmParams& params,
                            std::span<const LabeledExample> labeled,
                            std::span<const UnlabeledExample> unlabeled, RngStream& rng,
                            Diagnostics*) {
  return std::visit(
      overloaded{
          [&](const CentroidModel& m) -> LearnerState {
            return centroid_update(m, centroid_options(params), labeled, rng);
          },
          [&](const MmeModel& m) -> LearnerState {
            if (labeled.empty() && unlabeled.empty()) return m;
            return mme_train(mme_activate_prototypes(m, labeled), labeled, unlabeled);
          },
          [&](const ConsistencyState& s) -> LearnerState {
            if (labeled.empty()) return s;
            ConsistencyState next = s;
            next.base = centroid_update(s.base, centroid_options(params), labeled, rng);
            next.pseudo_labels.clear();
            return consistency_self_train(next, labeled, unlabeled);
          }},
      previous);
}

Prediction learner_predict(const LearnerState& state, const Eigen::VectorXd& features) {
  return std::visit(overloaded{[&](const CentroidModel& m) { return centroid_predict(m, features); },
                               [&](const MmeModel& m) { return mme_predict(m, features); },
                               [&](const ConsistencyState& s) { return centroid_predict(s.base, features); }},
                    state);
}

}  // namespace learn
