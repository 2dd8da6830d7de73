#include "prcut/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "prcut/error.hpp"

namespace prcut {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ValidationError("Rng::index: empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % range);
}

SubsetSampler::SubsetSampler(std::size_t n) : perm_(n) {
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
}

std::vector<std::size_t> SubsetSampler::draw(std::size_t count, Rng& rng) {
  if (count > perm_.size()) {
    throw ValidationError("SubsetSampler: requested " + std::to_string(count) +
                          " of " + std::to_string(perm_.size()) + " items");
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.index(perm_.size() - i);
    std::swap(perm_[i], perm_[j]);
  }
  return {perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(count)};
}

}  // namespace prcut
