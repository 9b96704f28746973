#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace mixcenter {

/// Deterministic 64-bit engine. All conversions to doubles and integers are
/// done here rather than through <random> distributions, whose output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  bool coin() { return (next() >> 63) != 0; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Seed of a named substream: splitmix64 over (master, hash(name), index).
std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                             std::uint64_t index = 0);

inline Rng substream(std::uint64_t master, std::string_view name,
                     std::uint64_t index = 0) {
  return Rng(substream_seed(master, name, index));
}

/// Seed used when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20240601;

}  // namespace mixcenter
