#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mtmlca {

/// Seeded generator with platform-independent draws.
///
/// The standard distributions are implementation-defined, so uniform reals
/// and bounded integers are derived here directly from the 64-bit engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Generator keyed by (root, keys...). Distinct key tuples give
  /// statistically independent streams.
  static Rng substream(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(root, keys));
  }
  static std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// k distinct values from [0, n), in draw order.
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mtmlca
