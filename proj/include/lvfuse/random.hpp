#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace lvfuse {

/// Counter-based generator: draw i of stream (seed, name) is
/// splitmix64_mix(key + (i + 1) * 0x9E3779B97F4A7C15) where
/// key = splitmix64_mix(seed) ^ fnv1a64(name). Any draw can be recomputed
/// from (seed, name, i) alone, so streams are independent of call order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream) noexcept
      : key_(mix(seed) ^ fnv1a(stream)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  std::uint64_t at(std::uint64_t index) const noexcept {
    return mix(key_ + (index + 1) * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next() noexcept { return at(counter_++); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return r % bound;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lvfuse
