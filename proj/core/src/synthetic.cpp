#include "learn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "learn/random.hpp"

namespace learn {

namespace {

Eigen::VectorXd gaussian_vector(RngStream& rng, std::size_t d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

std::size_t max_planes(const SynthSpec& spec) {
  std::size_t n = 0;
  for (const auto& d : spec.domains) n = std::max(n, d.rotation_angles.size());
  return n;
}

// Orthonormal (u, v) pairs, one per rotation plane.
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> rotation_planes(const SynthSpec& spec) {
  auto rng = derive_stream(spec.seed, {"synth", "planes"});
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> planes;
  for (std::size_t j = 0; j < max_planes(spec); ++j) {
    Eigen::VectorXd u = gaussian_vector(rng, spec.dim).normalized();
    Eigen::VectorXd v = gaussian_vector(rng, spec.dim);
    v -= u.dot(v) * u;
    v.normalize();
    planes.emplace_back(std::move(u), std::move(v));
  }
  return planes;
}

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

}  // namespace

void check_synth_spec(const SynthSpec& spec) {
  auto invalid = [](const std::string& why) { throw_config("InvalidSpec", why); };
  if (spec.classes < 2) invalid("classes must be >= 2");
  if (spec.dim < 2) invalid("dim must be >= 2");
  if (spec.per_class_train < 1) invalid("per_class_train must be >= 1");
  if (spec.per_class_test < 1) invalid("per_class_test must be >= 1");
  if (spec.domains.empty()) invalid("at least one domain is required");
  if (!(spec.class_separation > 0.0) || !std::isfinite(spec.class_separation)) {
    invalid("class_separation must be positive");
  }
  std::vector<std::string> names;
  for (const auto& d : spec.domains) {
    if (d.name.empty()) invalid("domain names must be non-empty");
    if (std::find(names.begin(), names.end(), d.name) != names.end()) {
      invalid("duplicate domain name '" + d.name + "'");
    }
    names.push_back(d.name);
    if (!(d.noise_scale >= 0.0) || !std::isfinite(d.noise_scale)) {
      invalid("domain '" + d.name + "' noise_scale must be >= 0");
    }
    if (d.translation.size() != 0 && static_cast<std::size_t>(d.translation.size()) != spec.dim) {
      invalid("domain '" + d.name + "' translation must have length dim");
    }
    for (double a : d.rotation_angles) {
      if (!std::isfinite(a)) invalid("domain '" + d.name + "' has a non-finite rotation angle");
    }
  }
}

Eigen::MatrixXd synthetic_class_means(const SynthSpec& spec) {
  check_synth_spec(spec);
  auto rng = derive_stream(spec.seed, {"synth", "means"});
  const auto C = static_cast<Eigen::Index>(spec.classes);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  const double radius = spec.class_separation / std::sqrt(2.0);
  Eigen::MatrixXd means(C, d);
  for (Eigen::Index k = 0; k < C; ++k) {
    Eigen::VectorXd v = gaussian_vector(rng, spec.dim);
    if (k < d) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd q = means.row(j).transpose() / radius;
        v -= q.dot(v) * q;
      }
    }
    means.row(k) = radius * v.normalized().transpose();
  }
  return means;
}

Eigen::MatrixXd domain_rotation(const SynthSpec& spec, const DomainTransform& domain) {
  const auto d = static_cast<Eigen::Index>(spec.dim);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(d, d);
  const auto planes = rotation_planes(spec);
  for (std::size_t j = 0; j < domain.rotation_angles.size(); ++j) {
    const auto& [u, v] = planes[j];
    const double theta = domain.rotation_angles[j];
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(d, d) +
                           std::sin(theta) * (v * u.transpose() - u * v.transpose()) +
                           (std::cos(theta) - 1.0) * (u * u.transpose() + v * v.transpose());
    R = step * R;
  }
  return R;
}

Eigen::VectorXd synthetic_shift_direction(const SynthSpec& spec) {
  auto rng = derive_stream(spec.seed, {"synth", "shift"});
  return gaussian_vector(rng, spec.dim).normalized();
}

std::vector<DatasetHandle> generate_synthetic_domains(const SynthSpec& spec) {
  check_synth_spec(spec);
  const Eigen::MatrixXd means = synthetic_class_means(spec);
  const std::size_t C = spec.classes;

  struct BaseDraw {
    ClassIndex label;
    Eigen::VectorXd z;
  };
  auto draw_split = [&](const char* split, std::size_t per_class) {
    auto rng = derive_stream(spec.seed, {"synth", split});
    std::vector<BaseDraw> draws;
    draws.reserve(per_class * C);
    for (std::size_t i = 0; i < per_class; ++i) {
      for (ClassIndex k = 0; k < C; ++k) draws.push_back({k, gaussian_vector(rng, spec.dim)});
    }
    return draws;
  };
  const auto train_draws = draw_split("train", spec.per_class_train);
  const auto test_draws = draw_split("test", spec.per_class_test);

  std::vector<std::string> class_names;
  for (std::size_t k = 0; k < C; ++k) class_names.push_back("c" + std::to_string(k));

  std::vector<DatasetHandle> out;
  for (const auto& domain : spec.domains) {
    const Eigen::MatrixXd R = domain_rotation(spec, domain);
    const Eigen::VectorXd t = domain.translation.size() == 0
                                  ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dim))
                                  : domain.translation;
    auto realize = [&](const std::vector<BaseDraw>& draws, const char* prefix) {
      std::vector<Sample> samples;
      samples.reserve(draws.size());
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(draws[i].label);
        Eigen::VectorXd x = R * (means.row(k).transpose() + domain.noise_scale * draws[i].z) + t;
        samples.emplace_back(make_id(prefix, i), std::move(x), draws[i].label);
      }
      return samples;
    };
    out.emplace_back(domain.name, domain.name, spec.dim, class_names, realize(train_draws, "tr"),
                     realize(test_draws, "te"));
  }
  return out;
}

SynthSpec standard_benchmark_spec(std::uint64_t seed, double severity) {
  SynthSpec spec;
  spec.classes = 5;
  spec.dim = 16;
  spec.per_class_train = 100;
  spec.per_class_test = 50;
  spec.class_separation = 4.0;
  spec.seed = seed;
  const Eigen::VectorXd dir = synthetic_shift_direction(spec);

  DomainTransform source{"source", {}, Eigen::VectorXd(), 1.0};
  DomainTransform base{"target_base", {}, severity * 0.75 * dir, 1.0};
  DomainTransform adapt{"target_adapt", {}, -severity * 0.75 * dir, 1.0};
  for (double a : {0.9, 0.8, 1.0, 0.7, 0.9, 0.8}) base.rotation_angles.push_back(severity * a);
  for (double a : {-0.8, 1.0, 0.7, 0.9, -0.9, 0.8}) adapt.rotation_angles.push_back(severity * a);
  spec.domains = {source, base, adapt};
  return spec;
}

}  // namespace learn
