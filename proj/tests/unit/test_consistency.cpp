#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "learn/consistency.hpp"

using namespace learn;
using namespace learn::testing;

namespace {

using Masks = std::vector<std::vector<std::size_t>>;

CentroidModel axis_model(std::size_t d, std::size_t classes) {
  CentroidModel m;
  m.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < classes; ++k) m.centroids(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  m.present.assign(classes, true);
  m.temperature = 10.0;
  return m;
}

}  // namespace

TEST_CASE("mask examples") {
  const std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
  CHECK(consistency_masks(order, 2, 0.5) == Masks{{3, 5}, {0}});
  CHECK(consistency_masks(order, 1, 0.5) == Masks{{3, 0, 5}});
  CHECK(consistency_masks(order, 5, 0.5) == Masks{{3}, {0}, {5}, {}, {}});
  CHECK(consistency_masks(order, 2, 0.01) == Masks{{3}, {}});
  CHECK(error_code([&] { consistency_masks(order, 0, 0.5); }) == "InvalidParameter");
  CHECK(error_code([&] { consistency_masks(order, 2, 1.0); }) == "InvalidParameter");
}

TEST_CASE("masks partition the top-k set") {
  RngStream rng(1);
  for (int t = 0; t < 500; ++t) {
    const auto d = random_between(rng, 1, 20);
    const auto m = random_between(rng, 1, 8);
    const double p = 0.001 + 0.998 * rng.uniform01();
    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < d; ++i) order[i] = i;
    rng.shuffle(order);
    const auto masks = consistency_masks(order, m, p);
    REQUIRE(masks.size() == m);
    const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(p * static_cast<double>(d) - 1e-9)), 1, d);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& mask : masks) {
      total += mask.size();
      seen.insert(mask.begin(), mask.end());
    }
    CHECK(total == k);
    CHECK(seen == std::set<std::size_t>(order.begin(), order.begin() + static_cast<long>(k)));
  }
}

TEST_CASE("importance ranking orders by magnitude with stable ties") {
  CHECK(importance_ranking(Eigen::Vector4d(0.5, -2.0, 2.0, 0.1)) == std::vector<std::size_t>{1, 2, 0, 3});
}

TEST_CASE("selection") {
  ConsistencyState state;
  state.base = axis_model(3, 2);

  SUBCASE("empty pool") { CHECK(consistency_select(state, {}).empty()); }

  SUBCASE("masking an irrelevant coordinate keeps every sample") {
    state.mask_fraction = 0.1;
    RngStream rng(2);
    std::vector<UnlabeledExample> unl;
    for (int i = 0; i < 40; ++i) {
      Eigen::Vector3d x(0.05 * rng.normal(), 0.05 * rng.normal(), 10.0 * (i % 2 ? 1 : -1));
      x[i % 4 < 2 ? 0 : 1] += 1.0;
      unl.push_back({"u" + std::to_string(i), x});
    }
    const auto sel = consistency_select(state, unl);
    CHECK(sel.size() == unl.size());
    for (const auto& ex : unl) {
      CHECK(sel.at(ex.id) == centroid_predict(state.base, ex.features).argmax);
    }
  }

  SUBCASE("a flipping sample is excluded") {
    const std::vector<UnlabeledExample> unl{{"flip", Eigen::Vector3d(1.0, 0.9, 0.0)},
                                            {"keep", Eigen::Vector3d(1.0, 0.1, 2.0)}};
    state.mask_count = 1;
    state.mask_fraction = 0.2;
    const auto sel = consistency_select(state, unl);
    CHECK_FALSE(sel.contains("flip"));
    CHECK(sel.contains("keep"));
  }
}

TEST_CASE("self-training") {
  const std::vector<LabeledExample> lab{{"a", Eigen::Vector3d(1, 0.1, 0), 0}, {"b", Eigen::Vector3d(0.1, 1, 0), 1}};
  const auto fitted = centroid_fit_fixed(lab, 2, 10.0);

  SUBCASE("empty selection leaves the plain fit") {
    ConsistencyState state;
    state.base = fitted;
    state.mask_count = 1;
    state.mask_fraction = 0.2;
    const std::vector<UnlabeledExample> unl{{"f1", Eigen::Vector3d(1.0, 0.95, 0.0)}, {"f2", Eigen::Vector3d(0.9, 1.0, 0.0)}};
    REQUIRE(consistency_select(state, unl).empty());
    const auto out = consistency_self_train(state, lab, unl);
    CHECK(out.base.centroids == fitted.centroids);
    CHECK(out.base.present == fitted.present);
    CHECK(out.pseudo_labels.empty());
  }

  SUBCASE("deterministic and uses pseudo-labels") {
    RngStream rng(3);
    std::vector<UnlabeledExample> unl;
    for (int i = 0; i < 30; ++i) {
      Eigen::Vector3d x(0.1 * rng.normal(), 0.1 * rng.normal(), 0.3 * rng.normal());
      x[i % 2] += 1.0;
      unl.push_back({"u" + std::to_string(i), x});
    }
    ConsistencyState state;
    state.base = fitted;
    const auto a = consistency_self_train(state, lab, unl);
    const auto b = consistency_self_train(state, lab, unl);
    CHECK(a.pseudo_labels == b.pseudo_labels);
    CHECK(a.base.centroids == b.base.centroids);
    CHECK_FALSE(a.pseudo_labels.empty());
    CHECK(a.base.temperature == fitted.temperature);
    CHECK(error_code([&] { consistency_self_train(state, {}, unl); }) == "NoLabels");
  }
}
