#pragma once

#include <span>

#include <Eigen/Core>

#include "learn/dataset_store.hpp"
#include "learn/prediction.hpp"

namespace learn {

// Minimax-entropy adaptation on a linear feature map.
//
// For an input x the model computes h = A x, f = h / |h|, and class scores
// z_k = (w_k / |w_k|) . f / T. Prototype rows with zero norm are inactive:
// they get probability 0 and no gradient.
//
// Training alternates two full-batch steps per iteration:
//   W <- W - eta * grad_W (CE - lambda * H)   (prototypes maximize entropy)
//   A <- A - eta * grad_A (CE + lambda * H)   (features minimize entropy)
// where CE is the mean cross-entropy over labeled samples and H the mean
// prediction entropy over unlabeled samples.
struct MmeModel {
  Eigen::MatrixXd feature_map;  // A, d' x d
  Eigen::MatrixXd prototypes;   // W, C x d'
  double temperature = 0.05;
  double lambda = 0.1;
  double learning_rate = 0.01;
  std::size_t iterations = 200;

  std::size_t class_count() const noexcept { return static_cast<std::size_t>(prototypes.rows()); }
};

struct MmeOptions {
  std::size_t feature_dim = 0;  // 0: use the input dimension
  double temperature = 0.05;
  double lambda = 0.1;
  double learning_rate = 0.01;
  std::size_t iterations = 200;
};

// A = leading principal directions of the source features (orthonormal rows,
// sign fixed so each row's largest-magnitude entry is positive); W rows =
// normalized mean mapped direction per class, zero for classes absent from
// the source. When fewer than d' directions carry variance, d' shrinks and a
// RankDeficient warning is emitted. Throws NoLabels.
MmeModel mme_init(std::span<const LabeledExample> source, std::size_t class_count,
                  const MmeOptions& options, Diagnostics* diag = nullptr);

struct MmeLosses {
  double cross_entropy = 0.0;
  double entropy = 0.0;
};

// Throws EmptyBatch for an empty batch.
double mme_cross_entropy(const MmeModel& model, std::span<const LabeledExample> labeled);
double mme_entropy(const MmeModel& model, std::span<const UnlabeledExample> unlabeled);
MmeLosses mme_losses(const MmeModel& model, std::span<const LabeledExample> labeled,
                     std::span<const UnlabeledExample> unlabeled);

struct MmeGradients {
  Eigen::MatrixXd ce_feature_map;
  Eigen::MatrixXd ce_prototypes;
  Eigen::MatrixXd entropy_feature_map;
  Eigen::MatrixXd entropy_prototypes;
};

// Analytic gradients of CE and H. An empty batch contributes zeros.
MmeGradients mme_gradients(const MmeModel& model, std::span<const LabeledExample> labeled,
                           std::span<const UnlabeledExample> unlabeled);

// The two halves of one alternating update, exposed so each direction can be
// checked in isolation. Both throw NonFiniteGradient.
MmeModel mme_classifier_step(const MmeModel& model, std::span<const LabeledExample> labeled,
                             std::span<const UnlabeledExample> unlabeled);
MmeModel mme_feature_step(const MmeModel& model, std::span<const LabeledExample> labeled,
                          std::span<const UnlabeledExample> unlabeled);

// Classifier step followed by a feature step at the updated prototypes.
MmeModel mme_step(const MmeModel& model, std::span<const LabeledExample> labeled,
                  std::span<const UnlabeledExample> unlabeled);

// `iterations` consecutive mme_step calls.
MmeModel mme_train(const MmeModel& model, std::span<const LabeledExample> labeled,
                   std::span<const UnlabeledExample> unlabeled);

// Gives every inactive prototype row whose class has labeled examples the
// normalized mean mapped direction of those examples.
MmeModel mme_activate_prototypes(const MmeModel& model, std::span<const LabeledExample> labeled);

// Throws ZeroVector when A x vanishes.
Prediction mme_predict(const MmeModel& model, const Eigen::VectorXd& features);

}  // namespace learn
