#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace albird {

/// Seeded PRNG used throughout the harness. The engine is std::mt19937_64,
/// whose output sequence is fixed by the standard; the derived draws below
/// avoid std distributions so results do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// FNV-1a over the bytes of a name, for folding identifiers into seeds.
std::uint64_t hash_name(std::string_view name) noexcept;

/// Order-sensitive mix of seed components (splitmix64 finalizer chain).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept;

}  // namespace albird
