#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace prcut {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seeded generator with platform-independent derived distributions.
///
/// std::*_distribution output is implementation-defined, so uniform and
/// normal draws are built directly on the mt19937_64 bit stream to keep runs
/// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one cached spare).
  double normal();

  /// Unbiased integer in [0, n).
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Draws uniform subsets of {0..n-1} without replacement. Keeps a persistent
/// permutation and partially reshuffles it per draw (O(count) per call).
class SubsetSampler {
 public:
  explicit SubsetSampler(std::size_t n);

  std::vector<std::size_t> draw(std::size_t count, Rng& rng);

 private:
  std::vector<std::size_t> perm_;
};

}  // namespace prcut
