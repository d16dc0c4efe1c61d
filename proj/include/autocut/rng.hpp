#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace autocut {

/// Seeded generator used for every random decision in the pipeline.
///
/// The engine is std::mt19937_64; the distributions are written out here
/// instead of using <random>'s, whose output is implementation-defined, so
/// corpora and synthetic streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform integer in [lo, hi], inclusive.
  std::size_t uniform_int(std::size_t lo, std::size_t hi) { return lo + uniform_index(hi - lo + 1); }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal deviate (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent child seed; used to give every clip, stream or
/// iteration its own generator without sequencing dependencies.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace autocut
