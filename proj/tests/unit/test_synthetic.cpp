#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "learn/synthetic.hpp"

using namespace learn;
using namespace learn::testing;

namespace {

SynthSpec two_domain_spec(DomainTransform b, std::size_t per_class = 20) {
  SynthSpec s;
  s.classes = 4;
  s.dim = 6;
  s.per_class_train = per_class;
  s.per_class_test = 5;
  s.seed = 12;
  s.domains = {{"a", {}, Eigen::VectorXd(), 1.0}, std::move(b)};
  return s;
}

Eigen::MatrixXd class_means_of(const DatasetHandle& h) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h.class_count()),
                                            static_cast<Eigen::Index>(h.dim()));
  std::vector<double> n(h.class_count(), 0.0);
  for (const auto& s : h.train_pool()) {
    m.row(static_cast<Eigen::Index>(LabelOracle::label(s))) += s.features().transpose();
    n[LabelOracle::label(s)] += 1.0;
  }
  for (std::size_t k = 0; k < n.size(); ++k) m.row(static_cast<Eigen::Index>(k)) /= n[k];
  return m;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  const auto spec = standard_benchmark_spec(3);
  const auto a = generate_synthetic_domains(spec);
  const auto b = generate_synthetic_domains(spec);
  REQUIRE(a.size() == 3);
  for (std::size_t d = 0; d < a.size(); ++d) {
    REQUIRE(a[d].train_pool().size() == 500);
    REQUIRE(a[d].test_set().size() == 250);
    for (std::size_t i = 0; i < a[d].train_pool().size(); ++i) {
      CHECK(a[d].train_pool()[i].features() == b[d].train_pool()[i].features());
    }
  }
  const auto other = generate_synthetic_domains(standard_benchmark_spec(4));
  CHECK(other[0].train_pool()[0].features() != a[0].train_pool()[0].features());
}

TEST_CASE("identical transforms give identical datasets up to the tag") {
  const auto ds = generate_synthetic_domains(two_domain_spec({"b", {}, Eigen::VectorXd(), 1.0}));
  CHECK(ds[0].domain_tag() == "a");
  CHECK(ds[1].domain_tag() == "b");
  for (std::size_t i = 0; i < ds[0].train_pool().size(); ++i) {
    CHECK(ds[0].train_pool()[i].id() == ds[1].train_pool()[i].id());
    CHECK(ds[0].train_pool()[i].features() == ds[1].train_pool()[i].features());
  }
  const auto bench = generate_synthetic_domains(standard_benchmark_spec(5, 0.0));
  for (std::size_t i = 0; i < bench[0].test_set().size(); ++i) {
    CHECK(bench[0].test_set()[i].features() == bench[1].test_set()[i].features());
  }
}

TEST_CASE("noise-free rotated domain carries rotated means") {
  auto spec = two_domain_spec({"b", {std::numbers::pi / 4}, Eigen::VectorXd(), 0.0});
  spec.domains[0].noise_scale = 0.0;
  const auto ds = generate_synthetic_domains(spec);
  const Eigen::MatrixXd R = domain_rotation(spec, spec.domains[1]);
  const Eigen::MatrixXd ma = class_means_of(ds[0]);
  const Eigen::MatrixXd mb = class_means_of(ds[1]);
  CHECK((mb - ma * R.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((ma - synthetic_class_means(spec)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rotations are proper orthogonal") {
  auto spec = two_domain_spec({"b", {0.3, -1.2, 2.0}, Eigen::VectorXd(), 1.0});
  const Eigen::MatrixXd R = domain_rotation(spec, spec.domains[1]);
  CHECK((R.transpose() * R - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
  CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((domain_rotation(spec, spec.domains[0]) - Eigen::MatrixXd::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("class means are equidistant at the requested separation") {
  SynthSpec spec = standard_benchmark_spec(1);
  const Eigen::MatrixXd mu = synthetic_class_means(spec);
  for (Eigen::Index a = 0; a < mu.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < mu.rows(); ++b) {
      CHECK((mu.row(a) - mu.row(b)).norm() == doctest::Approx(spec.class_separation).epsilon(1e-12));
    }
  }
}

TEST_CASE("empirical class means converge to transformed means") {
  Eigen::VectorXd shift = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const double noise = 1.5;
  auto spec = two_domain_spec({"b", {0.7, 0.4}, shift, noise}, 2000);
  const auto ds = generate_synthetic_domains(spec);
  const Eigen::MatrixXd R = domain_rotation(spec, spec.domains[1]);
  const Eigen::MatrixXd expected = (synthetic_class_means(spec) * R.transpose()).rowwise() + shift.transpose();
  const double bound = 5.0 * noise / std::sqrt(2000.0);
  CHECK((class_means_of(ds[1]) - expected).cwiseAbs().maxCoeff() < bound);
}

TEST_CASE("invalid specs") {
  auto bad = [](auto mutate) {
    auto spec = two_domain_spec({"b", {}, Eigen::VectorXd(), 1.0});
    mutate(spec);
    return error_code([&] { generate_synthetic_domains(spec); });
  };
  CHECK(bad([](SynthSpec& s) { s.classes = 1; }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.dim = 1; }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.per_class_train = 0; }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.domains.clear(); }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.domains[1].name = "a"; }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.domains[1].noise_scale = -1; }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.domains[1].translation = Eigen::VectorXd::Ones(3); }) == "InvalidSpec");
  CHECK(bad([](SynthSpec& s) { s.class_separation = 0; }) == "InvalidSpec");
}
