#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "learn/mme.hpp"

using namespace learn;
using namespace learn::testing;

namespace {

// Softmax over cosine scores, written out from the definition.
std::vector<double> reference_probs(const MmeModel& m, const Eigen::VectorXd& x) {
  const Eigen::VectorXd h = m.feature_map * x;
  std::vector<double> z;
  double hn = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) hn += h[i] * h[i];
  hn = std::sqrt(hn);
  for (Eigen::Index k = 0; k < m.prototypes.rows(); ++k) {
    double dot = 0.0, wn = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      dot += m.prototypes(k, i) * h[i];
      wn += m.prototypes(k, i) * m.prototypes(k, i);
    }
    z.push_back(dot / (std::sqrt(wn) * hn) / m.temperature);
  }
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double total = 0.0;
  for (double& v : z) total += (v = std::exp(v - mx));
  for (double& v : z) v /= total;
  return z;
}

}  // namespace

TEST_CASE("init on isotropic data is orthonormal") {
  RngStream rng(1);
  const auto src = random_labeled(rng, 3, 5, 400);
  MmeOptions opt;
  Diagnostics diag;
  const auto m = mme_init(src, 3, opt, &diag);
  CHECK(diag.empty());
  REQUIRE(m.feature_map.rows() == 5);
  CHECK((m.feature_map * m.feature_map.transpose() - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-6);
  CHECK(m.prototypes.rows() == 3);
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(m.prototypes.row(k).norm() == doctest::Approx(1.0));
  CHECK(m.temperature == opt.temperature);

  const auto again = mme_init(src, 3, opt);
  CHECK(again.feature_map == m.feature_map);
  CHECK(again.prototypes == m.prototypes);
}

TEST_CASE("init reduces the feature dimension on rank-deficient data") {
  RngStream rng(2);
  std::vector<LabeledExample> src;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    x[0] = rng.normal();
    x[2] = rng.normal();
    src.push_back({"s", x, static_cast<ClassIndex>(i % 2)});
  }
  Diagnostics diag;
  const auto m = mme_init(src, 2, MmeOptions{}, &diag);
  CHECK(diag.count("RankDeficient") == 1);
  CHECK(m.feature_map.rows() == 2);
}

TEST_CASE("single-class source leaves other prototypes inactive") {
  RngStream rng(3);
  auto src = random_labeled(rng, 1, 3, 20);
  const auto m = mme_init(src, 3, MmeOptions{});
  CHECK(m.prototypes.row(0).norm() == doctest::Approx(1.0));
  CHECK(m.prototypes.row(1).norm() == 0.0);
  CHECK(m.prototypes.row(2).norm() == 0.0);
  const auto p = mme_predict(m, src[0].features);
  CHECK(p.argmax == 0);
  CHECK(p.probabilities[0] == 1.0);

  // Training never touches inactive rows.
  const auto unl = random_unlabeled(rng, 3, 10);
  auto trained = m;
  trained.iterations = 5;
  trained = mme_train(trained, src, unl);
  CHECK(trained.prototypes.row(1).norm() == 0.0);
  const auto g = mme_gradients(m, src, unl);
  CHECK(g.ce_prototypes.row(2).norm() == 0.0);
  CHECK(g.entropy_prototypes.row(2).norm() == 0.0);
}

TEST_CASE("loss edge values") {
  MmeModel m;
  m.feature_map = Eigen::MatrixXd::Identity(3, 3);
  m.prototypes = Eigen::MatrixXd::Ones(4, 3);
  const std::vector<UnlabeledExample> u{{"u", Eigen::Vector3d(1, 2, 3)}};
  CHECK(mme_entropy(m, u) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  m.prototypes = Eigen::MatrixXd::Identity(3, 3);
  m.temperature = 1e-3;
  const std::vector<LabeledExample> l{{"l", Eigen::Vector3d(0, 2, 0), 1}};
  CHECK(mme_cross_entropy(m, l) == 0.0);

  CHECK(error_code([&] { mme_cross_entropy(m, {}); }) == "EmptyBatch");
  CHECK(error_code([&] { mme_entropy(m, {}); }) == "EmptyBatch");
}

TEST_CASE("losses match a direct evaluation") {
  RngStream rng(4);
  for (int t = 0; t < 30; ++t) {
    const auto C = random_between(rng, 2, 5);
    const auto d = random_between(rng, 2, 7);
    const auto m = random_mme_model(rng, C, d, random_between(rng, 1, d), 0.05 + rng.uniform01());
    const auto lab = random_labeled(rng, C, d, random_between(rng, 1, 8));
    const auto unl = random_unlabeled(rng, d, random_between(rng, 1, 8));
    double ce = 0.0, h = 0.0;
    for (const auto& ex : lab) ce -= std::log(reference_probs(m, ex.features)[ex.label]) / static_cast<double>(lab.size());
    for (const auto& ex : unl) {
      for (double p : reference_probs(m, ex.features)) h -= p > 0 ? p * std::log(p) / static_cast<double>(unl.size()) : 0.0;
    }
    const auto losses = mme_losses(m, lab, unl);
    CHECK(losses.cross_entropy == doctest::Approx(ce).epsilon(1e-12));
    CHECK(losses.entropy == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central differences") {
  RngStream rng(5);
  const double step = 1e-5;
  for (int t = 0; t < 10; ++t) {
    const auto C = random_between(rng, 2, 4);
    const auto d = random_between(rng, 2, 8);
    const auto model = random_mme_model(rng, C, d, random_between(rng, 1, 4), 0.05 + rng.uniform01());
    const auto lab = random_labeled(rng, C, d, 5);
    const auto unl = random_unlabeled(rng, d, 5);
    const auto g = mme_gradients(model, lab, unl);
    auto check = [&](Eigen::MatrixXd MmeModel::*field, const Eigen::MatrixXd& analytic, bool entropy) {
      MmeModel m = model;
      Eigen::MatrixXd numeric(analytic.rows(), analytic.cols());
      for (Eigen::Index i = 0; i < numeric.rows(); ++i) {
        for (Eigen::Index j = 0; j < numeric.cols(); ++j) {
          const double saved = (m.*field)(i, j);
          (m.*field)(i, j) = saved + step;
          const double up = entropy ? mme_entropy(m, unl) : mme_cross_entropy(m, lab);
          (m.*field)(i, j) = saved - step;
          const double down = entropy ? mme_entropy(m, unl) : mme_cross_entropy(m, lab);
          (m.*field)(i, j) = saved;
          numeric(i, j) = (up - down) / (2 * step);
        }
      }
      // Absolute floor for saturated cases where both gradients vanish.
      CHECK((analytic - numeric).norm() <= 1e-4 * std::max(analytic.norm(), numeric.norm()) + 1e-9);
    };
    check(&MmeModel::feature_map, g.ce_feature_map, false);
    check(&MmeModel::prototypes, g.ce_prototypes, false);
    check(&MmeModel::feature_map, g.entropy_feature_map, true);
    check(&MmeModel::prototypes, g.entropy_prototypes, true);
  }
}

TEST_CASE("step semantics") {
  RngStream rng(6);
  auto model = random_mme_model(rng, 3, 5, 4, 0.2);
  const auto lab = random_labeled(rng, 3, 5, 10);
  const auto unl = random_unlabeled(rng, 5, 10);

  SUBCASE("zero learning rate is the identity") {
    model.learning_rate = 0.0;
    const auto out = mme_step(model, lab, unl);
    CHECK(out.feature_map == model.feature_map);
    CHECK(out.prototypes == model.prototypes);
  }

  SUBCASE("zero lambda is plain descent on cross-entropy") {
    model.lambda = 0.0;
    model.learning_rate = 1e-3;
    CHECK(mme_cross_entropy(mme_step(model, lab, unl), lab) <= mme_cross_entropy(model, lab));
  }

  SUBCASE("classifier ascends and features descend on entropy") {
    model.learning_rate = 1e-3;
    model.lambda = 1.0;
    const double h0 = mme_entropy(model, unl);
    CHECK(mme_entropy(mme_classifier_step(model, {}, unl), unl) >= h0 - 1e-9);
    CHECK(mme_entropy(mme_feature_step(model, {}, unl), unl) <= h0 + 1e-9);
  }

  SUBCASE("training is deterministic and lowers cross-entropy") {
    model.iterations = 50;
    model.learning_rate = 0.01;
    const auto a = mme_train(model, lab, unl);
    const auto b = mme_train(model, lab, unl);
    CHECK(a.feature_map == b.feature_map);
    CHECK(a.prototypes == b.prototypes);
    CHECK(mme_cross_entropy(a, lab) < mme_cross_entropy(model, lab));
  }

  SUBCASE("non-finite gradients abort") {
    auto bad = model;
    bad.feature_map(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK(error_code([&] { mme_step(bad, lab, unl); }) == "NonFiniteGradient");
    CHECK(error_code([&] { mme_cross_entropy(bad, lab); }) == "NonFiniteGradient");
  }
}

TEST_CASE("activation fills only inactive prototype rows") {
  MmeModel m;
  m.feature_map = Eigen::MatrixXd::Identity(2, 2);
  m.prototypes = Eigen::MatrixXd::Zero(3, 2);
  m.prototypes.row(0) << 0.0, 5.0;
  const std::vector<LabeledExample> lab{{"a", Eigen::Vector2d(3, 0), 0}, {"b", Eigen::Vector2d(2, 2), 1}};
  const auto out = mme_activate_prototypes(m, lab);
  CHECK(out.prototypes.row(0) == m.prototypes.row(0));
  CHECK(out.prototypes(1, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(out.prototypes.row(2).norm() == 0.0);
}
