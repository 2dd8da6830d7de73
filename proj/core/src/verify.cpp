#include "prcut/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>

#include "prcut/graph.hpp"
#include "prcut/metrics.hpp"
#include "prcut/neural_model.hpp"
#include "prcut/objective.hpp"
#include "prcut/poisson_quadrature.hpp"
#include "prcut/random.hpp"

namespace prcut {

namespace {

class Tally {
 public:
  Tally(std::string name, std::string description, double tolerance) {
    r_.name = std::move(name);
    r_.description = std::move(description);
    r_.tolerance = tolerance;
    start_ = std::chrono::steady_clock::now();
  }
  // Records one case whose error must not exceed the tolerance.
  void error(double e) {
    ++r_.cases;
    if (!(e <= r_.tolerance)) ++r_.failures;
    if (!(e <= r_.max_error)) r_.max_error = e;
  }
  SuiteResult finish() {
    r_.passed = r_.failures == 0 && r_.cases > 0;
    r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return r_;
  }

 private:
  SuiteResult r_;
  std::chrono::steady_clock::time_point start_;
};


double matrix_rel_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-12);
  return (a - b).norm() / scale;
}

Matrix random_stochastic(Rng& rng, Eigen::Index n, Eigen::Index k, double spread = 1.5) {
  Matrix p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < k; ++l) p(i, l) = std::exp(spread * rng.normal());
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Matrix random_symmetric_weights(Rng& rng, Eigen::Index n, double density) {
  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) w(i, j) = w(j, i) = rng.uniform(0.1, 2.0);
    }
  }
  return w;
}

std::vector<double> random_profile(Rng& rng, std::size_t m) {
  std::vector<double> a(m);
  for (auto& v : a) {
    const double u = rng.uniform();
    // Mix interior values with exact 0 / 1 endpoints.
    v = u < 0.05 ? 0.0 : (u < 0.1 ? 1.0 : rng.uniform());
  }
  return a;
}

}  // namespace

SuiteResult verify_quadrature_exactness(std::uint64_t seed) {
  Tally t("quadrature-exactness", "Gauss-Legendre c nodes integrate degree <= 2c-1 exactly", 1e-12);
  Rng rng(seed);
  for (int c = 1; c <= 32; ++c) {
    const QuadratureRule rule = gauss_legendre_unit(c);
    for (int trial = 0; trial < 8; ++trial) {
      const int degree = trial == 0 ? 2 * c - 1 : static_cast<int>(rng.index(2 * c));
      std::vector<double> coeff(static_cast<std::size_t>(degree) + 1);
      double exact = 0.0;
      for (int d = 0; d <= degree; ++d) {
        coeff[static_cast<std::size_t>(d)] = rng.uniform(-1.0, 1.0);
        exact += coeff[static_cast<std::size_t>(d)] / (d + 1);
      }
      const double approx = rule.integrate([&](double x) {
        double acc = 0.0;
        for (int d = degree; d >= 0; --d) acc = acc * x + coeff[static_cast<std::size_t>(d)];
        return acc;
      });
      t.error(std::abs(approx - exact));
    }
  }
  return t.finish();
}

SuiteResult verify_inverse_moment_oracles(std::uint64_t seed) {
  Tally t("inverse-moment-oracles",
          "E[1/(1+Z)] by quadrature, pmf and inclusion-exclusion agree pairwise", 1e-9);
  Rng rng(seed);
  for (int trial = 0; trial < 500; ++trial) {
    const BernoulliProfile profile(random_profile(rng, rng.index(13)));
    const double q = pb_inv1p_expect(profile, InverseMomentMethod::quadrature);
    const double p = pb_inv1p_expect(profile, InverseMomentMethod::pmf);
    const double ie = pb_inv1p_expect(profile, InverseMomentMethod::inclusion_exclusion);
    t.error(std::max({std::abs(q - p), std::abs(q - ie), std::abs(p - ie)}));
  }
  return t.finish();
}

SuiteResult verify_integral_bound(std::uint64_t seed) {
  Tally t("integral-bound", "integral of prod(1 - a t) <= 1/((m+1) mean(a))", 1e-12);
  Rng rng(seed);
  for (int trial = 0; trial < 1000; ++trial) {
    const BernoulliProfile profile(random_profile(rng, 1 + rng.index(200)));
    const double value = pb_inv1p_expect(profile);
    const double bound = integral_upper_bound(profile);
    t.error(std::max(0.0, value - bound));
  }
  return t.finish();
}

SuiteResult verify_rcut_bound(std::uint64_t seed) {
  Tally t("rcut-bound", "expected ratio cut <= e^2 / (2n) * L_rc", 1e-12);
  Rng rng(seed);
  const double e2 = std::exp(2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(10));
    const auto k = static_cast<Eigen::Index>(2 + rng.index(2));
    const Matrix w = random_symmetric_weights(rng, n, 0.6);
    const Matrix p = random_stochastic(rng, n, k);
    const double exact = exact_expected_rcut(SparseSimilarity::from_dense(w), AssignmentMatrix(p));
    const Vector pbar = p.colwise().mean().transpose();
    const double bound = e2 / (2.0 * static_cast<double>(n)) * lrc_loss(w, p, p, pbar, false);
    t.error(std::max(0.0, exact - bound) / std::max(1.0, bound));
  }
  return t.finish();
}

SuiteResult verify_batch_bound(std::uint64_t seed) {
  // The error here is the violation measured in Monte-Carlo standard errors.
  Tally t("batch-bound", "subset power integral dominates the full integral (3 SE)", 3.0);
  Rng rng(seed);
  for (int trial = 0; trial < 50; ++trial) {
    const BernoulliProfile profile(random_profile(rng, 1 + rng.index(24)));
    const double incl = rng.uniform(0.2, 0.9);
    const BatchBoundEstimate est =
        batch_power_bound(profile, incl, 2000, derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const double full = pb_inv1p_expect(profile);
    const double gap = full - est.mean;
    if (gap <= 0.0) {
      t.error(0.0);
    } else {
      t.error(est.std_error > 0.0 ? gap / est.std_error : (gap > 1e-12 ? INFINITY : 0.0));
    }
  }
  return t.finish();
}

namespace {

// E[cut(C) / |C|] for one cluster with independent memberships, by summing
// over all 2^n membership patterns (the empty pattern contributes 0).
double enumerate_expected_cut_ratio(const Matrix& w, const std::vector<double>& p) {
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    double prob = 1.0;
    int size = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool in = (mask >> i) & 1u;
      prob *= in ? p[i] : 1.0 - p[i];
      size += in ? 1 : 0;
    }
    if (prob == 0.0) continue;
    double cut = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!((mask >> i) & 1u)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!((mask >> j) & 1u)) cut += w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    total += prob * cut / size;
  }
  return total;
}

}  // namespace

SuiteResult verify_expected_rcut_enumeration(std::uint64_t seed) {
  Tally t("expected-rcut-enumeration",
          "quadrature expected ratio cut equals 2^n enumeration; one-hot gives sum cut/|C|", 1e-9);
  Rng rng(seed);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(8));
    const Matrix w = random_symmetric_weights(rng, n, 0.7);
    std::vector<double> p = random_profile(rng, static_cast<std::size_t>(n));
    const SparseSimilarity graph = SparseSimilarity::from_dense(w);
    const double quad = expected_ratio_cut_column(graph, p);
    const double brute = enumerate_expected_cut_ratio(w, p);
    t.error(std::abs(quad - brute) / std::max(1.0, std::abs(brute)));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(10));
    const int k = 2 + static_cast<int>(rng.index(2));
    const Matrix w = random_symmetric_weights(rng, n, 0.7);
    Partition part;
    part.k = k;
    part.labels.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < part.labels.size(); ++i) {
      part.labels[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i)
                                                       : static_cast<int>(rng.index(k));
    }
    Matrix onehot = Matrix::Zero(n, k);
    std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      onehot(i, part.labels[static_cast<std::size_t>(i)]) = 1.0;
      sizes[static_cast<std::size_t>(part.labels[static_cast<std::size_t>(i)])] += 1.0;
    }
    double direct = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const int ci = part.labels[static_cast<std::size_t>(i)];
        if (ci != part.labels[static_cast<std::size_t>(j)]) {
          direct += w(i, j) / sizes[static_cast<std::size_t>(ci)];
        }
      }
    }
    const double quad =
        exact_expected_rcut(SparseSimilarity::from_dense(w), AssignmentMatrix(onehot));
    t.error(std::abs(quad - direct) / std::max(1.0, direct));
  }
  return t.finish();
}

SuiteResult verify_lrc_gradient(std::uint64_t seed) {
  Tally t("lrc-gradient", "batch objective gradient vs central differences (relative)", 1e-6);
  Rng rng(seed);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const auto bl = static_cast<Eigen::Index>(2 + rng.index(6));
    const auto br = static_cast<Eigen::Index>(2 + rng.index(6));
    const auto k = static_cast<Eigen::Index>(2 + rng.index(3));
    Matrix w(bl, br);
    for (Eigen::Index i = 0; i < bl; ++i) {
      for (Eigen::Index j = 0; j < br; ++j) w(i, j) = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 2.0);
    }
    const Matrix pl = random_stochastic(rng, bl, k);
    const Matrix pr = random_stochastic(rng, br, k);
    Vector pbar(k);
    for (Eigen::Index l = 0; l < k; ++l) pbar[l] = rng.uniform(0.1, 0.9);
    const double n_eff = static_cast<double>(bl + br);
    const bool normalize = (trial % 2) == 1;
    const LrcGradient g = lrc_grad(w, pl, pr, pbar, n_eff, GradientMode::analytic, normalize);

    auto fd = [&](bool left) {
      const Matrix& base = left ? pl : pr;
      Matrix out(base.rows(), base.cols());
      for (Eigen::Index i = 0; i < base.rows(); ++i) {
        for (Eigen::Index l = 0; l < k; ++l) {
          Matrix plus = base, minus = base;
          plus(i, l) += h;
          minus(i, l) -= h;
          Vector pb_plus = pbar, pb_minus = pbar;
          pb_plus[l] += h / n_eff;
          pb_minus[l] -= h / n_eff;
          const double fp = left ? lrc_loss(w, plus, pr, pb_plus, normalize)
                                 : lrc_loss(w, pl, plus, pb_plus, normalize);
          const double fm = left ? lrc_loss(w, minus, pr, pb_minus, normalize)
                                 : lrc_loss(w, pl, minus, pb_minus, normalize);
          out(i, l) = (fp - fm) / (2.0 * h);
        }
      }
      return out;
    };
    t.error(std::max(matrix_rel_error(g.left, fd(true)), matrix_rel_error(g.right, fd(false))));
  }
  return t.finish();
}

SuiteResult verify_offline_gradient(std::uint64_t seed) {
  Tally t("offline-gradient", "full-graph objective gradient vs central differences", 1e-6);
  Rng rng(seed);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(10));
    const auto k = static_cast<Eigen::Index>(2 + rng.index(3));
    const SparseSimilarity graph = SparseSimilarity::from_dense(random_symmetric_weights(rng, n, 0.5));
    const Matrix p = random_stochastic(rng, n, k);
    const Matrix g = offline_lrc_grad(graph, p);
    Matrix fd(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index l = 0; l < k; ++l) {
        Matrix plus = p, minus = p;
        plus(i, l) += h;
        minus(i, l) -= h;
        fd(i, l) = (offline_lrc_loss(graph, plus) - offline_lrc_loss(graph, minus)) / (2.0 * h);
      }
    }
    t.error(matrix_rel_error(g, fd));
  }
  return t.finish();
}

SuiteResult verify_network_gradient(std::uint64_t seed) {
  Tally t("network-gradient", "MLP backward vs central differences for every layer layout", 1e-5);
  Rng rng(seed);
  const std::vector<MlpSpec> layouts = {
      MlpSpec::linear(5, 3, true),       MlpSpec::linear(5, 3, false),
      MlpSpec::mlp(5, 7, 1, 3, true),    MlpSpec::mlp(5, 6, 2, 4, true),
      MlpSpec::mlp(4, 6, 3, 2, false),
  };
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const MlpSpec& spec = layouts[static_cast<std::size_t>(trial) % layouts.size()];
    MlpModel model = init_mlp(spec, derive_seed(seed, static_cast<std::uint64_t>(trial)));
    for (auto& layer : model.params.layers) {
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = 0.3 * rng.normal();
      if (layer.weight_norm) {
        for (Eigen::Index r = 0; r < layer.scale.size(); ++r) layer.scale[r] *= rng.uniform(0.5, 1.5);
      }
    }
    Matrix x(4, spec.input_dim());
    Matrix dp(4, spec.output_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < dp.size(); ++i) dp.data()[i] = rng.normal();

    ForwardCache cache;
    forward(model, x, &cache);
    const MlpParameters grads = backward(model, cache, dp);
    auto objective = [&](const MlpModel& m) { return forward(m, x).cwiseProduct(dp).sum(); };

    auto param_blocks = model.params.blocks();
    const auto grad_blocks = grads.blocks();
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < param_blocks.size(); ++b) {
      for (std::size_t idx = 0; idx < param_blocks[b].size(); ++idx) {
        double& theta = param_blocks[b][idx];
        const double saved = theta;
        theta = saved + h;
        const double fp = objective(model);
        theta = saved - h;
        const double fm = objective(model);
        theta = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double diff = grad_blocks[b][idx] - fd;
        num += diff * diff;
        den += fd * fd;
      }
    }
    t.error(std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
  }
  return t.finish();
}

SuiteResult verify_hungarian(std::uint64_t seed) {
  Tally t("hungarian-accuracy", "assignment-based accuracy equals brute-force permutation max", 1e-12);
  Rng rng(seed);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.index(6));
    const std::size_t n = 1 + rng.index(60);
    std::vector<int> y(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
      c[i] = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    }
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += (perm[static_cast<std::size_t>(c[i])] == y[i]);
      best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double brute = static_cast<double>(best) / static_cast<double>(n);
    t.error(std::abs(unsupervised_accuracy(y, c, k) - brute));
  }
  return t.finish();
}

std::vector<SuiteResult> run_verification(std::uint64_t seed) {
  using Suite = SuiteResult (*)(std::uint64_t);
  const Suite suites[] = {
      verify_quadrature_exactness, verify_inverse_moment_oracles, verify_integral_bound,
      verify_rcut_bound,           verify_batch_bound,            verify_expected_rcut_enumeration,
      verify_lrc_gradient,         verify_offline_gradient,       verify_network_gradient,
      verify_hungarian,
  };
  std::vector<SuiteResult> out;
  std::uint64_t stream = 0;
  for (Suite s : suites) out.push_back(s(derive_seed(seed, stream++)));
  return out;
}

std::string format_verification(const std::vector<SuiteResult>& results) {
  std::string out;
  std::size_t passed = 0;
  char line[320];
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    std::snprintf(line, sizeof line, "%-4s %-28s cases=%-5zu max_err=%.3e tol=%.1e (%.2fs)  %s\n",
                  r.passed ? "PASS" : "FAIL", r.name.c_str(), r.cases, r.max_error, r.tolerance,
                  r.seconds, r.description.c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "%zu/%zu suites passed\n", passed, results.size());
  out += line;
  return out;
}

}  // namespace prcut
