#include "learn/random.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "learn/error.hpp"

namespace learn {

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) {
  return fnv1a64(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()), basis);
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::span<const std::string> labels) {
  if (labels.empty()) throw_runtime("InvalidStream", "stream labels must be nonempty");
  std::array<unsigned char, 8> le{};
  for (std::size_t i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>((master_seed >> (8 * i)) & 0xffU);
  std::uint64_t h = fnv1a64(le);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) h = fnv1a64("/", h);
    h = fnv1a64(labels[i], h);
  }
  return h;
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw_runtime("InvalidRange", "uniform_index requires n > 0");
  // Largest multiple of n that fits; draws at or above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

RngStream derive_stream(std::uint64_t master_seed, std::span<const std::string> labels) {
  return RngStream(stream_seed(master_seed, labels));
}

RngStream derive_stream(std::uint64_t master_seed, std::initializer_list<std::string> labels) {
  const std::vector<std::string> v(labels);
  return derive_stream(master_seed, std::span<const std::string>(v));
}

}  // namespace learn
