#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "learn/dataset_store.hpp"

namespace learn {

struct DomainTransform {
  std::string name;
  // One angle (radians) per rotation plane. Plane j is the same random
  // 2-plane for every domain of a spec.
  std::vector<double> rotation_angles;
  // Empty means no translation; otherwise length d.
  Eigen::VectorXd translation;
  double noise_scale = 1.0;
};

struct SynthSpec {
  std::size_t classes = 5;
  std::size_t dim = 16;
  std::size_t per_class_train = 100;
  std::size_t per_class_test = 50;
  std::vector<DomainTransform> domains;
  double class_separation = 4.0;
  std::uint64_t seed = 0;
};

// Throws InvalidSpec.
void check_synth_spec(const SynthSpec& spec);

// Base class means sit at exactly `class_separation` pairwise distance when
// classes <= dim (random orthonormal directions scaled by separation/sqrt(2)).
// Every domain reuses the same standard-normal base draws z, so sample i of
// class k in domain D is R_D (mu_k + sigma_D z_i) + t_D.
std::vector<DatasetHandle> generate_synthetic_domains(const SynthSpec& spec);

// The rotation matrix a domain applies; exposed for tests.
Eigen::MatrixXd domain_rotation(const SynthSpec& spec, const DomainTransform& domain);
// The base class means before any domain transform (rows = classes).
Eigen::MatrixXd synthetic_class_means(const SynthSpec& spec);

// Unit translation direction shared by all domains of a spec (used by the
// CLI to turn a scalar shift magnitude into a vector).
Eigen::VectorXd synthetic_shift_direction(const SynthSpec& spec);

// Standard desk-scale benchmark: C=5, d=16, 100 train / 50 test per class,
// domains "source" (identity), "target_base" and "target_adapt" at the given
// shift severity (0 = none, 1 = mid, 2 = high).
SynthSpec standard_benchmark_spec(std::uint64_t seed, double severity = 1.0);

}  // namespace learn
