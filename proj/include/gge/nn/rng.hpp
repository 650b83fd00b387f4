#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace gge::nn {

// Mixes a label into a seed. Streams derived this way are independent of the
// order in which other streams are consumed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Counter-based generator: draw k is a pure function of (key, k).
///
/// Distribution transforms are implemented here rather than taken from
/// <random> so that draws are identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t key) noexcept : key_(key) {}

  Rng split(std::string_view label) const noexcept { return Rng(derive_seed(key_, label)); }
  Rng split(std::uint64_t index) const noexcept { return Rng(derive_seed(key_, index)); }

  std::uint64_t next_u64() noexcept;
  // [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; consumes two draws per call.
  double normal() noexcept;
  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gge::nn
