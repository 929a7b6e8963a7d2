#include "learn/mme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "learn/centroid.hpp"

namespace learn {

namespace {

constexpr double kInactiveRowNorm = 1e-12;

struct Forward {
  Eigen::VectorXd h;
  double h_norm = 0.0;
  Eigen::VectorXd f;
  Eigen::VectorXd log_p;  // -inf on inactive rows
  Eigen::VectorXd p;
};

struct Prototypes {
  Eigen::MatrixXd unit;  // normalized rows (zero when inactive)
  Eigen::VectorXd norms;
  std::vector<bool> active;
};

Prototypes normalize_prototypes(const Eigen::MatrixXd& W) {
  Prototypes out;
  out.unit = Eigen::MatrixXd::Zero(W.rows(), W.cols());
  out.norms = W.rowwise().norm();
  out.active.assign(static_cast<std::size_t>(W.rows()), false);
  for (Eigen::Index k = 0; k < W.rows(); ++k) {
    if (out.norms[k] > kInactiveRowNorm) {
      out.unit.row(k) = W.row(k) / out.norms[k];
      out.active[static_cast<std::size_t>(k)] = true;
    }
  }
  return out;
}

Forward forward(const MmeModel& model, const Prototypes& protos, const Eigen::VectorXd& x) {
  Forward fw;
  fw.h = model.feature_map * x;
  fw.h_norm = fw.h.norm();
  if (!std::isfinite(fw.h_norm)) throw_runtime("NonFiniteGradient", "mapped feature vector is not finite");
  if (!(fw.h_norm >= kZeroVectorNorm)) throw_runtime("ZeroVector", "mapped feature vector vanishes");
  fw.f = fw.h / fw.h_norm;
  const Eigen::VectorXd z = (protos.unit * fw.f) / model.temperature;
  if (!z.allFinite()) throw_runtime("NonFiniteGradient", "scores are not finite");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (protos.active[static_cast<std::size_t>(k)]) best = std::max(best, z[k]);
  }
  if (!std::isfinite(best)) throw_runtime("EmptyModel", "no active prototype");
  double total = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (protos.active[static_cast<std::size_t>(k)]) total += std::exp(z[k] - best);
  }
  const double lse = best + std::log(total);
  fw.log_p = Eigen::VectorXd::Constant(z.size(), -std::numeric_limits<double>::infinity());
  fw.p = Eigen::VectorXd::Zero(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (!protos.active[static_cast<std::size_t>(k)]) continue;
    fw.log_p[k] = z[k] - lse;
    fw.p[k] = std::exp(fw.log_p[k]);
  }
  return fw;
}

double entropy_of(const Forward& fw) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < fw.p.size(); ++k) {
    if (fw.p[k] > 0.0) h -= fw.p[k] * fw.log_p[k];
  }
  return h;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw_runtime("NonFiniteGradient", std::string(what) + " has non-finite entries");
}

}  // namespace

MmeModel mme_init(std::span<const LabeledExample> source, std::size_t class_count,
                  const MmeOptions& options, Diagnostics* diag) {
  if (source.empty()) throw_runtime("NoLabels", "mme_init needs labeled source samples");
  const Eigen::Index d = source.front().features.size();
  auto target_dim = static_cast<Eigen::Index>(options.feature_dim == 0 ? d : options.feature_dim);
  if (target_dim > d) {
    warn(diag, "RankDeficient", "feature_dim",
         "feature_dim " + std::to_string(target_dim) + " exceeds input dim " + std::to_string(d));
    target_dim = d;
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& ex : source) mean += ex.features;
  mean /= static_cast<double>(source.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& ex : source) {
    const Eigen::VectorXd c = ex.features - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(std::max<std::size_t>(source.size() - 1, 1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::Index usable = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) usable += values[i] > 1e-10 * scale ? 1 : 0;
  if (values.cwiseAbs().maxCoeff() == 0.0) usable = 0;
  if (usable < target_dim) {
    warn(diag, "RankDeficient", "feature_dim",
         "only " + std::to_string(usable) + " principal directions carry variance; feature_dim reduced from " +
             std::to_string(target_dim));
    target_dim = std::max<Eigen::Index>(usable, 1);
  }

  MmeModel model;
  model.feature_map.resize(target_dim, d);
  for (Eigen::Index r = 0; r < target_dim; ++r) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - r);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    model.feature_map.row(r) = v.transpose();
  }
  model.prototypes = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(class_count), target_dim);
  model.temperature = options.temperature;
  model.lambda = options.lambda;
  model.learning_rate = options.learning_rate;
  model.iterations = options.iterations;
  return mme_activate_prototypes(model, source);
}

MmeModel mme_activate_prototypes(const MmeModel& model, std::span<const LabeledExample> labeled) {
  MmeModel out = model;
  const auto C = static_cast<Eigen::Index>(model.class_count());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(C, model.feature_map.rows());
  std::vector<std::size_t> counts(static_cast<std::size_t>(C), 0);
  for (const auto& ex : labeled) {
    if (ex.label >= static_cast<std::size_t>(C)) throw_runtime("UnknownLabel", "label out of range");
    const Eigen::VectorXd h = model.feature_map * ex.features;
    const double n = h.norm();
    if (n < kZeroVectorNorm) continue;
    sums.row(static_cast<Eigen::Index>(ex.label)) += (h / n).transpose();
    ++counts[ex.label];
  }
  for (Eigen::Index k = 0; k < C; ++k) {
    if (out.prototypes.row(k).norm() > kInactiveRowNorm || counts[static_cast<std::size_t>(k)] == 0) continue;
    const double n = sums.row(k).norm();
    if (n > kDegenerateCentroidNorm) out.prototypes.row(k) = sums.row(k) / n;
  }
  return out;
}

double mme_cross_entropy(const MmeModel& model, std::span<const LabeledExample> labeled) {
  if (labeled.empty()) throw_runtime("EmptyBatch", "cross-entropy needs a labeled batch");
  const auto protos = normalize_prototypes(model.prototypes);
  double total = 0.0;
  for (const auto& ex : labeled) {
    const auto fw = forward(model, protos, ex.features);
    if (!protos.active[ex.label]) throw_runtime("InactiveClass", "labeled class has no prototype");
    total -= fw.log_p[static_cast<Eigen::Index>(ex.label)];
  }
  return total / static_cast<double>(labeled.size());
}

double mme_entropy(const MmeModel& model, std::span<const UnlabeledExample> unlabeled) {
  if (unlabeled.empty()) throw_runtime("EmptyBatch", "entropy needs an unlabeled batch");
  const auto protos = normalize_prototypes(model.prototypes);
  double total = 0.0;
  for (const auto& ex : unlabeled) total += entropy_of(forward(model, protos, ex.features));
  return total / static_cast<double>(unlabeled.size());
}

MmeLosses mme_losses(const MmeModel& model, std::span<const LabeledExample> labeled,
                     std::span<const UnlabeledExample> unlabeled) {
  return {mme_cross_entropy(model, labeled), mme_entropy(model, unlabeled)};
}

namespace {

struct Batch {
  Eigen::MatrixXd x;              // d x n
  std::vector<ClassIndex> labels;  // empty for unlabeled batches
};

Batch to_batch(std::span<const LabeledExample> labeled) {
  Batch b;
  if (labeled.empty()) return b;
  b.x.resize(labeled.front().features.size(), static_cast<Eigen::Index>(labeled.size()));
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    b.x.col(static_cast<Eigen::Index>(i)) = labeled[i].features;
    b.labels.push_back(labeled[i].label);
  }
  return b;
}

Batch to_batch(std::span<const UnlabeledExample> unlabeled) {
  Batch b;
  if (unlabeled.empty()) return b;
  b.x.resize(unlabeled.front().features.size(), static_cast<Eigen::Index>(unlabeled.size()));
  for (std::size_t i = 0; i < unlabeled.size(); ++i) b.x.col(static_cast<Eigen::Index>(i)) = unlabeled[i].features;
  return b;
}

struct BatchForward {
  Eigen::MatrixXd f;       // d' x n, unit columns
  Eigen::VectorXd h_norm;  // n
  Eigen::MatrixXd log_p;   // C x n, -inf on inactive rows
  Eigen::MatrixXd p;       // C x n
};

BatchForward batch_forward(const MmeModel& model, const Prototypes& protos, const Eigen::MatrixXd& x) {
  BatchForward fw;
  const Eigen::MatrixXd h = model.feature_map * x;
  fw.h_norm = h.colwise().norm().transpose();
  if ((fw.h_norm.array() < kZeroVectorNorm).any()) throw_runtime("ZeroVector", "mapped feature vector vanishes");
  fw.f = h * fw.h_norm.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd z = (protos.unit * fw.f) / model.temperature;
  if (!z.allFinite()) throw_runtime("NonFiniteGradient", "scores are not finite");
  const auto C = z.rows();
  const auto n = z.cols();
  fw.log_p = Eigen::MatrixXd::Constant(C, n, -std::numeric_limits<double>::infinity());
  fw.p = Eigen::MatrixXd::Zero(C, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < C; ++k) {
      if (protos.active[static_cast<std::size_t>(k)]) best = std::max(best, z(k, i));
    }
    if (!std::isfinite(best)) throw_runtime("EmptyModel", "no active prototype");
    double total = 0.0;
    for (Eigen::Index k = 0; k < C; ++k) {
      if (protos.active[static_cast<std::size_t>(k)]) total += std::exp(z(k, i) - best);
    }
    const double lse = best + std::log(total);
    for (Eigen::Index k = 0; k < C; ++k) {
      if (!protos.active[static_cast<std::size_t>(k)]) continue;
      fw.log_p(k, i) = z(k, i) - lse;
      fw.p(k, i) = std::exp(fw.log_p(k, i));
    }
  }
  return fw;
}

// Back-propagates dL/dz (C x n, already mean-scaled) into dA and dW.
void batch_backward(const MmeModel& model, const Prototypes& protos, const BatchForward& fw,
                    const Eigen::MatrixXd& x, const Eigen::MatrixXd& dz, Eigen::MatrixXd& dA,
                    Eigen::MatrixXd& dW) {
  const Eigen::MatrixXd dz_t = dz / model.temperature;
  const Eigen::MatrixXd d_what = dz_t * fw.f.transpose();  // C x d'
  for (Eigen::Index k = 0; k < d_what.rows(); ++k) {
    if (!protos.active[static_cast<std::size_t>(k)]) continue;
    const auto w_hat = protos.unit.row(k);
    dW.row(k) += (d_what.row(k) - w_hat * w_hat.dot(d_what.row(k))) / protos.norms[k];
  }
  const Eigen::MatrixXd df = protos.unit.transpose() * dz_t;  // d' x n
  const Eigen::RowVectorXd radial = (fw.f.array() * df.array()).colwise().sum();
  const Eigen::MatrixXd dh = (df - fw.f * radial.asDiagonal()) * fw.h_norm.cwiseInverse().asDiagonal();
  dA.noalias() += dh * x.transpose();
}

MmeGradients batch_gradients(const MmeModel& model, const Batch& labeled, const Batch& unlabeled) {
  const auto protos = normalize_prototypes(model.prototypes);
  MmeGradients g;
  g.ce_feature_map = Eigen::MatrixXd::Zero(model.feature_map.rows(), model.feature_map.cols());
  g.ce_prototypes = Eigen::MatrixXd::Zero(model.prototypes.rows(), model.prototypes.cols());
  g.entropy_feature_map = g.ce_feature_map;
  g.entropy_prototypes = g.ce_prototypes;

  if (labeled.x.cols() > 0) {
    const auto fw = batch_forward(model, protos, labeled.x);
    Eigen::MatrixXd dz = fw.p;
    for (Eigen::Index i = 0; i < dz.cols(); ++i) {
      const auto y = labeled.labels[static_cast<std::size_t>(i)];
      if (!protos.active[y]) throw_runtime("InactiveClass", "labeled class has no prototype");
      dz(static_cast<Eigen::Index>(y), i) -= 1.0;
    }
    dz /= static_cast<double>(dz.cols());
    batch_backward(model, protos, fw, labeled.x, dz, g.ce_feature_map, g.ce_prototypes);
  }
  if (unlabeled.x.cols() > 0) {
    const auto fw = batch_forward(model, protos, unlabeled.x);
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(fw.p.rows(), fw.p.cols());
    for (Eigen::Index i = 0; i < dz.cols(); ++i) {
      double h = 0.0;
      for (Eigen::Index k = 0; k < dz.rows(); ++k) {
        if (fw.p(k, i) > 0.0) h -= fw.p(k, i) * fw.log_p(k, i);
      }
      for (Eigen::Index k = 0; k < dz.rows(); ++k) {
        if (fw.p(k, i) > 0.0) dz(k, i) = -fw.p(k, i) * (fw.log_p(k, i) + h);
      }
    }
    dz /= static_cast<double>(dz.cols());
    batch_backward(model, protos, fw, unlabeled.x, dz, g.entropy_feature_map, g.entropy_prototypes);
  }
  return g;
}

MmeModel classifier_step(const MmeModel& model, const Batch& labeled, const Batch& unlabeled) {
  const auto g = batch_gradients(model, labeled, unlabeled);
  const Eigen::MatrixXd step = g.ce_prototypes - model.lambda * g.entropy_prototypes;
  check_finite(step, "prototype gradient");
  MmeModel out = model;
  out.prototypes -= model.learning_rate * step;
  return out;
}

MmeModel feature_step(const MmeModel& model, const Batch& labeled, const Batch& unlabeled) {
  const auto g = batch_gradients(model, labeled, unlabeled);
  const Eigen::MatrixXd step = g.ce_feature_map + model.lambda * g.entropy_feature_map;
  check_finite(step, "feature-map gradient");
  MmeModel out = model;
  out.feature_map -= model.learning_rate * step;
  return out;
}

MmeModel alternating_step(const MmeModel& model, const Batch& labeled, const Batch& unlabeled) {
  if (model.learning_rate == 0.0) return model;
  return feature_step(classifier_step(model, labeled, unlabeled), labeled, unlabeled);
}

}  // namespace

MmeGradients mme_gradients(const MmeModel& model, std::span<const LabeledExample> labeled,
                           std::span<const UnlabeledExample> unlabeled) {
  return batch_gradients(model, to_batch(labeled), to_batch(unlabeled));
}

MmeModel mme_classifier_step(const MmeModel& model, std::span<const LabeledExample> labeled,
                             std::span<const UnlabeledExample> unlabeled) {
  return classifier_step(model, to_batch(labeled), to_batch(unlabeled));
}

MmeModel mme_feature_step(const MmeModel& model, std::span<const LabeledExample> labeled,
                          std::span<const UnlabeledExample> unlabeled) {
  return feature_step(model, to_batch(labeled), to_batch(unlabeled));
}

MmeModel mme_step(const MmeModel& model, std::span<const LabeledExample> labeled,
                  std::span<const UnlabeledExample> unlabeled) {
  return alternating_step(model, to_batch(labeled), to_batch(unlabeled));
}

MmeModel mme_train(const MmeModel& model, std::span<const LabeledExample> labeled,
                   std::span<const UnlabeledExample> unlabeled) {
  const auto lb = to_batch(labeled);
  const auto ub = to_batch(unlabeled);
  MmeModel out = model;
  for (std::size_t i = 0; i < model.iterations; ++i) out = alternating_step(out, lb, ub);
  return out;
}

Prediction mme_predict(const MmeModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.feature_map.cols()) {
    throw_runtime("DimensionMismatch", "feature length does not match the feature map");
  }
  const auto protos = normalize_prototypes(model.prototypes);
  const auto fw = forward(model, protos, features);
  const Eigen::VectorXd scores = (protos.unit * fw.f) / model.temperature;
  return softmax_prediction(scores, protos.active);
}

}  // namespace learn
