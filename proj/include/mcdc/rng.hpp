#pragma once

#include <cstdint>
#include <cstddef>

namespace mcdc {

/// Deterministic random number generator (xoshiro256++ seeded via
/// splitmix64).  The same seed produces the same stream on every platform,
/// which the simulation studies and the CLI rely on for reproducible output.
///
/// `split(k)` derives an independent generator keyed by (seed, k) without
/// touching this generator's state, so work items can be randomized
/// identically whether they run serially or across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for work item `stream`; a pure function of
  /// (constructor seed, stream).
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  /// Uniform index in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal deviate (Box-Muller).  `normal_pair` yields both halves
  /// of the pair from two uniforms; `normal` returns just the first.
  void normal_pair(double& z0, double& z1);
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t s_[4] = {};
};

}  // namespace mcdc
