#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "prcut/error.hpp"
#include "prcut/graph.hpp"
#include "prcut/objective.hpp"
#include "support/oracles.hpp"

using namespace prcut;

namespace {

SparseSimilarity triangle() {
  return SparseSimilarity::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
}

Matrix triangle_dense() { return Matrix::Ones(3, 3) - Matrix::Identity(3, 3); }

}  // namespace

TEST(ExpectedRatioCut, TriangleHalfProbabilities) {
  const std::vector<double> p{0.5, 0.5, 0.5};
  EXPECT_NEAR(expected_ratio_cut_column(triangle(), p), 1.125, 1e-15);
  Matrix one(3, 1);
  one << 1, 1, 1;
  // A single column of ones is a valid k=1 assignment with zero expected cut.
  EXPECT_NEAR(exact_expected_rcut(triangle(), AssignmentMatrix(one)), 0.0, 1e-15);
}

TEST(ExpectedRatioCut, DeterministicColumn) {
  const std::vector<double> p{1.0, 1.0, 0.0};
  EXPECT_NEAR(expected_ratio_cut_column(triangle(), p), 1.0, 1e-15);
}

TEST(ExpectedRatioCut, ZeroWeightsGiveZero) {
  const auto empty = SparseSimilarity::from_edges(5, {});
  std::mt19937_64 gen(1);
  const Matrix p = oracle::random_stochastic(gen, 5, 3);
  EXPECT_EQ(exact_expected_rcut(empty, AssignmentMatrix(p)), 0.0);
}

TEST(ExpectedRatioCut, RequiresThreeVertices) {
  const auto g = SparseSimilarity::from_edges(2, {{0, 1, 1.0}});
  EXPECT_THROW(expected_ratio_cut_column(g, std::vector<double>{0.5, 0.5}), ValidationError);
}

TEST(ExpectedRatioCut, MatchesEnumeration) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 8);
    const Matrix w = oracle::random_symmetric(gen, n, 0.7);
    const auto p = oracle::random_probs(gen, n);
    const double quad = expected_ratio_cut_column(SparseSimilarity::from_dense(w), p);
    EXPECT_NEAR(quad, oracle::expected_cut_ratio(w, p), 1e-9 * std::max(1.0, quad));
  }
}

TEST(ExpectedRatioCut, OneHotIsTwiceRatioCut) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 10);
    const int k = 2 + static_cast<int>(gen() % 2);
    const Matrix w = oracle::random_symmetric(gen, n, 0.6);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Matrix onehot = Matrix::Zero(n, k);
    for (int i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(gen() % k);
      onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    }
    const auto g = SparseSimilarity::from_dense(w);
    const double expected = exact_expected_rcut(g, AssignmentMatrix(onehot));
    EXPECT_NEAR(expected, 2.0 * ratio_cut(g, Partition{labels, k}), 1e-12);
  }
}

TEST(ExpectedRatioCut, BoundedByScaledLoss) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 10);
    const int k = 1 + static_cast<int>(gen() % 3);
    const Matrix w = oracle::random_symmetric(gen, n, 0.6);
    const Matrix p = oracle::random_stochastic(gen, n, k);
    const Vector pbar = p.colwise().mean().transpose();
    const double exact = exact_expected_rcut(SparseSimilarity::from_dense(w), AssignmentMatrix(p));
    const double bound = std::exp(2.0) / (2.0 * n) * lrc_loss(w, p, p, pbar, false);
    EXPECT_LE(exact, bound + 1e-9);
  }
}

TEST(AssignmentMatrix, Validation) {
  Matrix bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  EXPECT_THROW(AssignmentMatrix{bad}, ValidationError);
  bad << 1.2, -0.2, 0.5, 0.5;
  EXPECT_THROW(AssignmentMatrix{bad}, ValidationError);
  Matrix ok(2, 2);
  ok << 0.25, 0.75, 1.0, 0.0;
  const AssignmentMatrix a(ok);
  EXPECT_NEAR(a.column_means()[0], 0.625, 1e-15);
}

TEST(LrcLoss, TriangleExample) {
  const Matrix p = Matrix::Constant(3, 2, 0.5);
  const Vector pbar = Vector::Constant(2, 0.5);
  EXPECT_NEAR(lrc_loss(triangle_dense(), p, p, pbar, false), 12.0, 1e-14);
  EXPECT_NEAR(lrc_loss(triangle_dense(), p, p, pbar, true), 2.0, 1e-14);
}

TEST(LrcLoss, ComponentsAsClustersGiveZero) {
  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = 1.0;
  w(2, 3) = w(3, 2) = 2.0;
  Matrix p(4, 2);
  p << 1, 0, 1, 0, 0, 1, 0, 1;
  EXPECT_EQ(lrc_loss(w, p, p, Vector::Constant(2, 0.5), false), 0.0);
}

TEST(LrcLoss, MatchesDirectDoubleSum) {
  std::mt19937_64 gen(4);
  const Matrix w = Matrix::Random(5, 6).cwiseAbs();
  const Matrix pl = oracle::random_stochastic(gen, 5, 3);
  const Matrix pr = oracle::random_stochastic(gen, 6, 3);
  Vector pbar(3);
  pbar << 0.2, 0.3, 0.5;
  double direct = 0.0;
  for (int l = 0; l < 3; ++l) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 6; ++j) {
        s += w(i, j) * (pl(i, l) + pr(j, l) - 2.0 * pl(i, l) * pr(j, l));
      }
    }
    direct += s / pbar[l];
  }
  EXPECT_NEAR(lrc_loss(w, pl, pr, pbar, false), direct, 1e-12);
  EXPECT_NEAR(lrc_loss(w, pl, pr, pbar, true), direct / w.sum(), 1e-12);
}

TEST(LrcLoss, InvariantUnderBatchPermutation) {
  std::mt19937_64 gen(6);
  const Matrix w = Matrix::Random(6, 6).cwiseAbs();
  const Matrix pl = oracle::random_stochastic(gen, 6, 2);
  const Matrix pr = oracle::random_stochastic(gen, 6, 2);
  const Vector pbar = Vector::Constant(2, 0.5);
  Eigen::PermutationMatrix<Eigen::Dynamic> a(6), b(6);
  a.setIdentity();
  b.setIdentity();
  std::shuffle(a.indices().data(), a.indices().data() + 6, gen);
  std::shuffle(b.indices().data(), b.indices().data() + 6, gen);
  const Matrix w2 = a * w * b.transpose();
  EXPECT_NEAR(lrc_loss(w, pl, pr, pbar, true), lrc_loss(w2, a * pl, b * pr, pbar, true), 1e-13);
}

TEST(LrcLoss, CollapseFloor) {
  const Matrix p = Matrix::Constant(3, 2, 0.5);
  Vector pbar(2);
  pbar << 1.0 - 1e-7, 1e-7;
  try {
    lrc_loss(triangle_dense(), p, p, pbar, false);
    FAIL() << "expected a collapse error";
  } catch (const CollapseError& e) {
    EXPECT_EQ(e.cluster(), 1u);
  }
  EXPECT_THROW(lrc_grad(triangle_dense(), p, p, pbar, 3.0), CollapseError);
}

TEST(LrcGrad, MatchesFiniteDifferences) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 30; ++trial) {
    const int b = 8, k = 3;
    Matrix w = Matrix::Random(b, b).cwiseAbs();
    const Matrix pl = oracle::random_stochastic(gen, b, k);
    const Matrix pr = oracle::random_stochastic(gen, b, k);
    Vector pbar(k);
    for (int l = 0; l < k; ++l) pbar[l] = u(gen);
    const double n_eff = 2.0 * b;
    for (bool normalize : {false, true}) {
      const LrcGradient g = lrc_grad(w, pl, pr, pbar, n_eff, GradientMode::analytic, normalize);
      // pbar moves with P at rate 1/n_eff per entry of the matching column.
      const Matrix fd_left = oracle::numeric_gradient(
          [&](const Matrix& x) {
            const Vector shift = (x - pl).colwise().sum().transpose() / n_eff;
            return lrc_loss(w, x, pr, pbar + shift, normalize);
          },
          pl);
      const Matrix fd_right = oracle::numeric_gradient(
          [&](const Matrix& x) {
            const Vector shift = (x - pr).colwise().sum().transpose() / n_eff;
            return lrc_loss(w, pl, x, pbar + shift, normalize);
          },
          pr);
      EXPECT_LT(oracle::relative_error(g.left, fd_left), 1e-6);
      EXPECT_LT(oracle::relative_error(g.right, fd_right), 1e-6);
    }
  }
}

TEST(LrcGrad, ZeroWeightsGiveZeroGradient) {
  std::mt19937_64 gen(3);
  const Matrix p = oracle::random_stochastic(gen, 4, 2);
  for (auto mode : {GradientMode::analytic, GradientMode::row_local}) {
    const auto g = lrc_grad(Matrix::Zero(4, 4), p, p, Vector::Constant(2, 0.5), 4.0, mode);
    EXPECT_EQ(g.left.norm(), 0.0);
    EXPECT_EQ(g.right.norm(), 0.0);
  }
}

TEST(LrcGrad, CycleWithUniformAssignmentsHasIdenticalRows) {
  const int n = 7;
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, (i + 1) % n) = w((i + 1) % n, i) = 1.0;
  const Matrix p = Matrix::Constant(n, 3, 1.0 / 3.0);
  for (auto mode : {GradientMode::analytic, GradientMode::row_local}) {
    const auto g = lrc_grad(w, p, p, Vector::Constant(3, 1.0 / 3.0), n, mode);
    for (int i = 1; i < n; ++i) {
      EXPECT_NEAR((g.left.row(i) - g.left.row(0)).norm(), 0.0, 1e-13);
      EXPECT_NEAR((g.right.row(i) - g.right.row(0)).norm(), 0.0, 1e-13);
    }
  }
}

TEST(LrcGrad, RowLocalModeUsesRowLocalCorrection) {
  std::mt19937_64 gen(12);
  const Matrix w = Matrix::Random(4, 5).cwiseAbs();
  const Matrix pl = oracle::random_stochastic(gen, 4, 2);
  const Matrix pr = oracle::random_stochastic(gen, 5, 2);
  Vector pbar(2);
  pbar << 0.4, 0.6;
  const double n_eff = 9.0;
  const auto g = lrc_grad(w, pl, pr, pbar, n_eff, GradientMode::row_local);
  for (int i = 0; i < 4; ++i) {
    for (int l = 0; l < 2; ++l) {
      double expected = 0.0;
      for (int j = 0; j < 5; ++j) {
        const double pair = pl(i, l) + pr(j, l) - 2.0 * pl(i, l) * pr(j, l);
        expected += w(i, j) * ((1.0 - 2.0 * pr(j, l)) * pbar[l] - pair / n_eff);
      }
      expected /= pbar[l] * pbar[l];
      EXPECT_NEAR(g.left(i, l), expected, 1e-12);
    }
  }
}

TEST(GradientMode, Parsing) {
  EXPECT_EQ(parse_gradient_mode("analytic"), GradientMode::analytic);
  EXPECT_EQ(parse_gradient_mode("row-local"), GradientMode::row_local);
  EXPECT_EQ(to_string(GradientMode::row_local), "row-local");
  EXPECT_THROW(parse_gradient_mode("exact"), ValidationError);
}

TEST(OfflineGrad, MatchesFiniteDifferences) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 15, k = 3;
    const auto g = SparseSimilarity::from_dense(oracle::random_symmetric(gen, n, 0.4));
    const Matrix p = oracle::random_stochastic(gen, n, k);
    const Matrix fd = oracle::numeric_gradient(
        [&](const Matrix& x) { return offline_lrc_loss(g, x); }, p);
    EXPECT_LT(oracle::relative_error(offline_lrc_grad(g, p), fd), 1e-6);
  }
}

TEST(OfflineGrad, LinearInWeightsAndSymmetricOnCycle) {
  std::mt19937_64 gen(16);
  const Matrix w = oracle::random_symmetric(gen, 8, 0.5);
  const Matrix p = oracle::random_stochastic(gen, 8, 2);
  const Matrix g1 = offline_lrc_grad(SparseSimilarity::from_dense(w), p);
  const Matrix g3 = offline_lrc_grad(SparseSimilarity::from_dense(3.0 * w), p);
  EXPECT_LT((g3 - 3.0 * g1).norm(), 1e-12 * g3.norm());

  Matrix cyc = Matrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) cyc(i, (i + 1) % 6) = cyc((i + 1) % 6, i) = 1.0;
  const Matrix gu = offline_lrc_grad(SparseSimilarity::from_dense(cyc), Matrix::Constant(6, 2, 0.5));
  for (int i = 1; i < 6; ++i) EXPECT_NEAR((gu.row(i) - gu.row(0)).norm(), 0.0, 1e-13);

  Matrix dead = p;
  dead.col(0).setZero();
  dead.col(1).setOnes();
  EXPECT_THROW(offline_lrc_grad(SparseSimilarity::from_dense(w), dead), ValidationError);
}

TEST(KlRegularizer, Examples) {
  EXPECT_NEAR(kl_regularizer(Vector::Constant(4, 0.25), 4).value, 0.0, 1e-15);
  Vector one(2);
  one << 1.0, 0.0;
  const KlTerm t = kl_regularizer(one, 2);
  EXPECT_NEAR(t.value, std::log(2.0), 1e-15);
  EXPECT_NEAR(t.grad[0], std::log(2.0) + 1.0, 1e-15);
  EXPECT_NEAR(t.grad[1], std::log(2.0 * 1e-12) + 1.0, 1e-12);
}

TEST(KlRegularizer, NonnegativeAndGradientMatchesDerivative) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 8);
    const Matrix p = oracle::random_stochastic(gen, 1, k);
    const Vector q = p.row(0).transpose();
    const KlTerm t = kl_regularizer(q, k);
    EXPECT_GE(t.value, -1e-15);
    for (int l = 0; l < k; ++l) {
      // Derivative of sum q log(k q) with respect to q_l, unnormalized.
      const double h = 1e-7;
      auto f = [&](double d) {
        double v = 0.0;
        for (int m = 0; m < k; ++m) {
          const double x = q[m] + (m == l ? d : 0.0);
          v += x * std::log(k * x);
        }
        return v;
      };
      EXPECT_NEAR(t.grad[l], (f(h) - f(-h)) / (2 * h), 1e-6);
    }
  }
}

TEST(KlRegularizer, Validation) {
  EXPECT_THROW(kl_regularizer(Vector::Zero(3), 3), ValidationError);
  EXPECT_THROW(kl_regularizer(Vector::Constant(3, 1.0 / 3), 2), ValidationError);
}

TEST(ClusterMass, UpdateExamples) {
  ClusterMassState s = ClusterMassState::uniform(2, 0.8);
  Vector batch(2);
  batch << 0.9, 0.1;
  const auto next = update_pbar(s, batch);
  EXPECT_EQ(next.step, 1);
  EXPECT_NEAR(next.pbar[0], 0.82, 1e-15);
  EXPECT_NEAR(next.pbar[1], 0.18, 1e-15);

  const auto fixed = update_pbar(next, next.pbar);
  EXPECT_NEAR((fixed.pbar - next.pbar).norm(), 0.0, 1e-16);

  ClusterMassState clamp = ClusterMassState::uniform(2, 2.0);
  EXPECT_EQ(update_pbar(clamp, batch).pbar, batch);
}

TEST(ClusterMass, StaysOnTheSimplex) {
  std::mt19937_64 gen(13);
  ClusterMassState s = ClusterMassState::uniform(5, 0.8);
  for (int t = 0; t < 1000; ++t) {
    const Matrix p = oracle::random_stochastic(gen, 7, 5);
    s = update_pbar(s, p.colwise().mean().transpose());
    EXPECT_NEAR(s.pbar.sum(), 1.0, 1e-9);
    EXPECT_GE(s.pbar.minCoeff(), 0.0);
    EXPECT_LE(s.pbar.maxCoeff(), 1.0);
  }
}

TEST(LossBreakdown, JsonLine) {
  LossBreakdown r;
  r.step = 3;
  r.lrc = 0.5;
  r.kl = 0.25;
  r.total = 25.5;
  r.w_norm = 10.0;
  r.pbar = {0.5, 0.5};
  const std::string line = r.to_json_line();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["step"], 3);
  EXPECT_EQ(j["pbar"].size(), 2u);
  EXPECT_EQ(line.substr(0, 9), "{\"step\":3");
}
