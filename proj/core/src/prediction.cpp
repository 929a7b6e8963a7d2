#include "learn/prediction.hpp"

#include <cmath>
#include <limits>

#include "learn/error.hpp"

namespace learn {

Prediction softmax_prediction(const Eigen::VectorXd& scores, const std::vector<bool>& active) {
  Prediction p;
  p.probabilities = Eigen::VectorXd::Zero(scores.size());
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index k = 0; k < scores.size(); ++k) {
    if (!active[static_cast<std::size_t>(k)]) continue;
    if (!any || scores[k] > best) {
      best = scores[k];
      p.argmax = static_cast<ClassIndex>(k);
      any = true;
    }
  }
  if (!any) throw_runtime("EmptyModel", "no class has a usable prototype");
  double total = 0.0;
  for (Eigen::Index k = 0; k < scores.size(); ++k) {
    if (!active[static_cast<std::size_t>(k)]) continue;
    p.probabilities[k] = std::exp(scores[k] - best);
    total += p.probabilities[k];
  }
  p.probabilities /= total;
  return p;
}

}  // namespace learn
