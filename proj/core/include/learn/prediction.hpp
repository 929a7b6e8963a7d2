#pragma once

#include <Eigen/Core>

#include "learn/dataset_store.hpp"

namespace learn {

struct Prediction {
  Eigen::VectorXd probabilities;
  ClassIndex argmax = 0;  // ties resolve to the lowest class index
};

// Softmax over the entries where `active` is true (inactive entries get
// probability 0). The argmax is taken on the raw scores, lowest index first.
Prediction softmax_prediction(const Eigen::VectorXd& scores, const std::vector<bool>& active);

}  // namespace learn
