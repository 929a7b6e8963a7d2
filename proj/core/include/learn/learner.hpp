#pragma once

#include <span>
#include <variant>

#include "learn/centroid.hpp"
#include "learn/consistency.hpp"
#include "learn/mme.hpp"
#include "learn/protocol_config.hpp"

namespace learn {

using LearnerState = std::variant<CentroidModel, MmeModel, ConsistencyState>;

CentroidOptions centroid_options(const AlgorithmParams& params);
MmeOptions mme_options(const AlgorithmParams& params);

Algorithm algorithm_of(const LearnerState& state);

// Initial model from a fully labeled source pool.
LearnerState learner_fit_source(Algorithm algorithm, const AlgorithmParams& params,
                                std::size_t class_count, std::span<const LabeledExample> source,
                                RngStream& rng, Diagnostics* diag = nullptr);

// Continues training from `previous` with the target labels acquired so far.
//   centroid:    refit on target labels; classes without target labels keep
//                their previous centroid; the temperature is re-tuned when
//                feasible and otherwise carried over.
//   mme:         activates prototypes for newly labeled classes, then runs
//                `iterations` alternating minimax steps.
//   consistency: centroid update as above, then self-training on `unlabeled`.
LearnerState learner_update(const LearnerState& previous, const AlgorithmParams& params,
                            std::span<const LabeledExample> labeled,
                            std::span<const UnlabeledExample> unlabeled, RngStream& rng,
                            Diagnostics* diag = nullptr);

Prediction learner_predict(const LearnerState& state, const Eigen::VectorXd& features);

}  // namespace learn
