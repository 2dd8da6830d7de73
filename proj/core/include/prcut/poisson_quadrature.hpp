#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace prcut {

/// Default ceiling on quadrature order for direct callers.
inline constexpr int kMaxQuadratureOrder = 256;

/// Gauss-Legendre rule on [0, 1]. With c nodes it integrates every
/// polynomial of degree <= 2c - 1 exactly.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const noexcept { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) sum += weights[q] * f(nodes[q]);
    return sum;
  }
};

/// Newton iteration on the Legendre recurrence, mapped by t = (r + 1) / 2,
/// s = w / 2. Throws when order < 1 or order > max_order.
QuadratureRule gauss_legendre_unit(int order, int max_order = kMaxQuadratureOrder);

/// Memoized gauss_legendre_unit; safe for concurrent callers.
std::shared_ptr<const QuadratureRule> cached_gauss_legendre_unit(
    int order, int max_order = kMaxQuadratureOrder);

/// Smallest c with 2c >= m + 1: enough nodes for a degree-m product.
constexpr int exact_order(std::size_t m) noexcept {
  return static_cast<int>(m / 2 + 1);
}

/// Success probabilities of independent Bernoulli variables whose sum is a
/// Poisson-binomial variable Z.
class BernoulliProfile {
 public:
  BernoulliProfile() = default;
  /// Throws unless every entry lies in [0, 1].
  explicit BernoulliProfile(std::vector<double> alpha);

  std::span<const double> alpha() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return alpha_.size(); }
  /// (1/m) sum alpha_i; 0 for the empty profile.
  double mean() const noexcept;

 private:
  std::vector<double> alpha_;
};

/// Accumulates prod (1 - x_i) as a log-sum plus a count of exact-zero
/// factors, so long products neither underflow nor lose small factors.
class LogProduct {
 public:
  void multiply_one_minus(double x) {
    if (x >= 1.0) {
      ++zeros_;
    } else {
      log_sum_ += std::log1p(-x);
    }
  }
  void divide_one_minus(double x) {
    if (x >= 1.0) {
      --zeros_;
    } else {
      log_sum_ -= std::log1p(-x);
    }
  }
  double log_sum() const noexcept { return log_sum_; }
  int zeros() const noexcept { return zeros_; }
  double value(double power = 1.0) const {
    return zeros_ > 0 ? 0.0 : std::exp(power * log_sum_);
  }

 private:
  double log_sum_ = 0.0;
  int zeros_ = 0;
};

/// P(Z = i) for i = 0..m by O(m^2) convolution.
std::vector<double> pb_pmf(const BernoulliProfile& profile);

enum class InverseMomentMethod { quadrature, pmf, inclusion_exclusion };

/// Largest profile accepted by the subset-enumeration method.
inline constexpr std::size_t kInclusionExclusionMaxSize = 12;

/// E[1 / (1 + Z)] by one of three independent routes:
///  - quadrature: integral of prod (1 - alpha_i t) over [0, 1] with the
///    exact-order Gauss-Legendre rule, products in log space;
///  - pmf: sum_i P(Z = i) / (1 + i);
///  - inclusion_exclusion: sum over subsets I of (-1)^|I| prod_I alpha / (1 + |I|),
///    restricted to m <= 12.
double pb_inv1p_expect(const BernoulliProfile& profile,
                       InverseMomentMethod method = InverseMomentMethod::quadrature);

/// 1 / ((m + 1) * mean(alpha)); +infinity when the mean is 0. Requires m >= 1.
double integral_upper_bound(const BernoulliProfile& profile);

struct BatchBoundEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of E_S[ integral_0^1 prod_{s in S} (1 - alpha_s t)^(1/gamma) dt ]
/// where S keeps each index independently with probability gamma. This
/// dominates the full-profile integral. Each inner integral is adaptive
/// Gauss-Kronrod to 1e-10 relative.
BatchBoundEstimate batch_power_bound(const BernoulliProfile& profile,
                                     double inclusion_prob, std::size_t samples,
                                     std::uint64_t seed);

}  // namespace prcut
