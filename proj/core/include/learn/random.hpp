#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace learn {

// 64-bit FNV-1a. Offset basis 0xcbf29ce484222325, prime 0x100000001b3.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Seed for a named stream: FNV-1a over the 8 little-endian bytes of
// `master_seed` followed by the labels joined with '/'.
//   stream_seed(42, {"stage0", "ckpt1"}) == 0x702d578fcfac0bf7
std::uint64_t stream_seed(std::uint64_t master_seed, std::span<const std::string> labels);

// Deterministic random stream. The engine (mt19937_64) is fully specified by
// the standard; distributions are implemented here rather than taken from
// <random> because the standard leaves their algorithms to the vendor.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  // Uniform integer on [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal via Box-Muller (one cached spare).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

RngStream derive_stream(std::uint64_t master_seed, std::span<const std::string> labels);
RngStream derive_stream(std::uint64_t master_seed, std::initializer_list<std::string> labels);

}  // namespace learn
