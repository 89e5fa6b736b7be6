#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace psc {

/// SplitMix64 finalizer. Used to decorrelate user seeds and derive sub-seeds.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream seed from a parent seed and a path of
/// indices, e.g. derive_seed(seed, {kPointStream, i}).
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path);

/// Deterministic generator. Output depends only on the seed: the engine is
/// mt19937_64 (fully specified by the standard) and the variate transforms
/// are written out here rather than taken from <random> distributions, whose
/// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Box-Muller, both variates used).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace psc
