#include "prcut/poisson_quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "prcut/error.hpp"
#include "prcut/random.hpp"

namespace prcut {

namespace {

// P_order(z) and P'_order(z) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int order, double z) {
  double p0 = 1.0;
  double p1 = z;
  for (int j = 2; j <= order; ++j) {
    const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  if (order == 0) return {1.0, 0.0};
  const double dp = order * (z * p1 - p0) / (z * z - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule gauss_legendre_unit(int order, int max_order) {
  if (order < 1) throw ValidationError("quadrature order must be >= 1");
  if (order > max_order) {
    throw ValidationError("quadrature order " + std::to_string(order) +
                          " exceeds configured maximum " + std::to_string(max_order));
  }
  const auto c = static_cast<std::size_t>(order);
  QuadratureRule rule;
  rule.nodes.resize(c);
  rule.weights.resize(c);
  const std::size_t half = (c + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(c) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, d] = legendre_with_derivative(order, z);
      dp = d;
      const double step = p / d;
      z -= step;
      if (std::abs(step) <= 1e-15) break;
    }
    dp = legendre_with_derivative(order, z).second;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    // z is the positive root; the mirror image sits at the low end of [0,1].
    rule.nodes[i] = 0.5 - 0.5 * z;
    rule.nodes[c - 1 - i] = 0.5 + 0.5 * z;
    rule.weights[i] = 0.5 * w;
    rule.weights[c - 1 - i] = 0.5 * w;
  }
  if (c % 2 == 1) rule.nodes[c / 2] = 0.5;
  return rule;
}

std::shared_ptr<const QuadratureRule> cached_gauss_legendre_unit(int order, int max_order) {
  static std::shared_mutex mutex;
  static std::map<int, std::shared_ptr<const QuadratureRule>> cache;
  if (order < 1 || order > max_order) {
    gauss_legendre_unit(order, max_order);  // throws the range error
  }
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const QuadratureRule>(gauss_legendre_unit(order, max_order));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.emplace(order, std::move(rule));
  return it->second;
}

BernoulliProfile::BernoulliProfile(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    if (!(alpha_[i] >= 0.0 && alpha_[i] <= 1.0)) {
      throw ValidationError("Bernoulli parameter " + std::to_string(i) +
                            " outside [0, 1]");
    }
  }
}

double BernoulliProfile::mean() const noexcept {
  if (alpha_.empty()) return 0.0;
  double sum = 0.0;
  for (double a : alpha_) sum += a;
  return sum / static_cast<double>(alpha_.size());
}

std::vector<double> pb_pmf(const BernoulliProfile& profile) {
  const auto alpha = profile.alpha();
  std::vector<double> pmf(alpha.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    for (std::size_t z = i + 1; z > 0; --z) {
      pmf[z] = pmf[z] * (1.0 - a) + pmf[z - 1] * a;
    }
    pmf[0] *= 1.0 - a;
  }
  return pmf;
}

double pb_inv1p_expect(const BernoulliProfile& profile, InverseMomentMethod method) {
  const auto alpha = profile.alpha();
  const std::size_t m = alpha.size();
  switch (method) {
    case InverseMomentMethod::quadrature: {
      const auto rule = cached_gauss_legendre_unit(exact_order(m));
      return rule->integrate([&](double t) {
        LogProduct prod;
        for (double a : alpha) prod.multiply_one_minus(a * t);
        return prod.value();
      });
    }
    case InverseMomentMethod::pmf: {
      const auto pmf = pb_pmf(profile);
      double sum = 0.0;
      for (std::size_t i = 0; i < pmf.size(); ++i) {
        sum += pmf[i] / (1.0 + static_cast<double>(i));
      }
      return sum;
    }
    case InverseMomentMethod::inclusion_exclusion: {
      if (m > kInclusionExclusionMaxSize) {
        throw ValidationError("inclusion-exclusion limited to m <= 12 (got " +
                              std::to_string(m) + ")");
      }
      double sum = 0.0;
      const std::uint32_t subsets = 1u << m;
      for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        double prod = 1.0;
        int size = 0;
        for (std::size_t i = 0; i < m; ++i) {
          if (mask & (1u << i)) {
            prod *= alpha[i];
            ++size;
          }
        }
        sum += (size % 2 == 0 ? prod : -prod) / (1.0 + size);
      }
      return sum;
    }
  }
  throw ValidationError("unknown inverse-moment method");
}

double integral_upper_bound(const BernoulliProfile& profile) {
  if (profile.size() == 0) throw ValidationError("integral_upper_bound needs m >= 1");
  const double mean = profile.mean();
  if (mean == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / ((static_cast<double>(profile.size()) + 1.0) * mean);
}

BatchBoundEstimate batch_power_bound(const BernoulliProfile& profile,
                                     double inclusion_prob, std::size_t samples,
                                     std::uint64_t seed) {
  if (!(inclusion_prob > 0.0 && inclusion_prob < 1.0)) {
    throw ValidationError("batch inclusion probability must lie in (0, 1)");
  }
  if (samples < 1) throw ValidationError("batch_power_bound needs samples >= 1");

  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto alpha = profile.alpha();
  const double power = 1.0 / inclusion_prob;
  Rng rng(seed);
  std::vector<double> kept;
  kept.reserve(alpha.size());

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    kept.clear();
    for (double a : alpha) {
      if (rng.bernoulli(inclusion_prob)) kept.push_back(a);
    }
    const auto integrand = [&](double t) {
      LogProduct prod;
      for (double a : kept) prod.multiply_one_minus(a * t);
      return prod.value(power);
    };
    const double value =
        kept.empty() ? 1.0 : Integrator::integrate(integrand, 0.0, 1.0, 20, 1e-10);
    // Welford running moments.
    const double delta = value - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (value - mean);
  }
  BatchBoundEstimate est;
  est.mean = mean;
  est.samples = samples;
  est.std_error = samples > 1
                      ? std::sqrt(m2 / static_cast<double>(samples - 1) /
                                  static_cast<double>(samples))
                      : 0.0;
  return est;
}

}  // namespace prcut
