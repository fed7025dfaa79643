#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace bbo {

/// Seeded random stream used by every stochastic component.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// implements its own transforms instead of the <random> distributions, whose
/// algorithms are implementation-defined. Two streams built from the same seed
/// therefore produce bit-identical draws on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in the closed range [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);

  /// Standard normal draw (Marsaglia polar method, second value cached).
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// splitmix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// 64-bit FNV-1a over the bytes of `text`, continuing from `h`.
std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Stable seed derivation: combines a parent seed with a tag and an index.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0);

}  // namespace bbo
