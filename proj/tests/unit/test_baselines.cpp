#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <random>

#include "prcut/baselines.hpp"
#include "prcut/data.hpp"
#include "prcut/error.hpp"
#include "prcut/metrics.hpp"
#include "support/oracles.hpp"

using namespace prcut;

namespace {

SparseSimilarity path3() {
  return SparseSimilarity::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
}

SparseSimilarity cliques(int count, int size) {
  std::vector<Edge> edges;
  for (int c = 0; c < count; ++c) {
    for (int a = 0; a < size; ++a) {
      for (int b = a + 1; b < size; ++b) {
        edges.push_back({static_cast<std::size_t>(c * size + a),
                         static_cast<std::size_t>(c * size + b), 1.0});
      }
    }
  }
  return SparseSimilarity::from_edges(static_cast<std::size_t>(count * size), edges);
}

}  // namespace

TEST(SymmetricEigen, PathLaplacianSpectrum) {
  const auto eig = symmetric_eigen(path3().laplacian());
  EXPECT_NEAR(eig.values[0], 0.0, 1e-12);
  EXPECT_NEAR(eig.values[1], 1.0, 1e-12);
  EXPECT_NEAR(eig.values[2], 3.0, 1e-12);
}

TEST(SymmetricEigen, AgreesWithReferenceSolver) {
  std::mt19937_64 gen(11);
  for (int n : {1, 2, 5, 17, 60}) {
    const Matrix a = oracle::random_symmetric(gen, n, 1.0, -1.0, 1.0);
    const auto mine = symmetric_eigen(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    EXPECT_LT((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10) << n;
    const Matrix id = Matrix::Identity(n, n);
    EXPECT_LT((mine.vectors.transpose() * mine.vectors - id).norm(), 1e-10);
    EXPECT_LT((a * mine.vectors - mine.vectors * mine.values.asDiagonal()).norm(), 1e-9);
  }
}

TEST(SymmetricEigen, RejectsNonSquare) {
  EXPECT_THROW(symmetric_eigen(Matrix::Zero(2, 3)), ValidationError);
}

TEST(SmallestEigvecs, ComponentsGiveZeroMultiplicity) {
  const auto graph = cliques(3, 5);
  const auto eig = smallest_eigvecs(graph, 3);
  ASSERT_EQ(eig.values.size(), 3);
  EXPECT_NEAR(eig.values[0], 0.0, 1e-10);
  EXPECT_NEAR(eig.values[1], 0.0, 1e-10);
  EXPECT_NEAR(eig.values[2], 5.0, 1e-10);
}

TEST(SmallestEigvecs, SkipsConstantVector) {
  const auto eig = smallest_eigvecs(path3(), 2);
  EXPECT_NEAR(eig.values[0], 1.0, 1e-12);
  EXPECT_NEAR(eig.values[1], 3.0, 1e-12);
  EXPECT_NEAR(std::abs(eig.vectors(0, 0)), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(eig.vectors(1, 0), 0.0, 1e-12);
}

TEST(SmallestEigvecs, SizeLimits) {
  EXPECT_THROW(smallest_eigvecs(path3(), 3), ValidationError);
  EXPECT_THROW(smallest_eigvecs(path3(), 0), ValidationError);
  EXPECT_THROW(smallest_eigvecs(cliques(2, 4), 1, 7), ValidationError);
}

TEST(Spectral, SeparatesTwoCliques) {
  const auto graph = cliques(2, 6);
  const auto res = spectral_clustering(graph, 2, 5, 1);
  std::vector<int> truth;
  for (int c = 0; c < 2; ++c) truth.insert(truth.end(), 6, c);
  EXPECT_DOUBLE_EQ(unsupervised_accuracy(truth, res.partition.labels, 2), 1.0);
  EXPECT_NEAR(ratio_cut(graph, res.partition), 0.0, 1e-15);
}

TEST(SmallestEigvecs, NullSpaceExcludesConstant) {
  const auto eig = smallest_eigvecs(cliques(3, 4), 2);
  const Vector ones = Vector::Ones(12);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(eig.values[j], 0.0, 1e-12);
    EXPECT_NEAR(eig.vectors.col(j).dot(ones), 0.0, 1e-10);
  }
}

TEST(Spectral, PermutationInvariant) {
  SyntheticSpec spec;
  spec.n = 90;
  spec.classes = 3;
  spec.seed = 2;
  const auto data = make_synthetic(spec);
  std::vector<Eigen::Index> order(90);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(1);
  std::shuffle(order.begin(), order.end(), gen);
  Matrix shuffled(90, data.features.cols());
  for (int i = 0; i < 90; ++i) shuffled.row(i) = data.features.row(order[i]);
  const auto a = spectral_clustering(knn_graph(data.features, 8), 3, 5, 4);
  const auto b = spectral_clustering(knn_graph(shuffled, 8), 3, 5, 4);
  std::vector<int> mapped(90);
  for (int i = 0; i < 90; ++i) mapped[i] = a.partition.labels[order[i]];
  EXPECT_DOUBLE_EQ(unsupervised_accuracy(mapped, b.partition.labels, 3), 1.0);
}

TEST(Spectral, RecoversBlobs) {
  SyntheticSpec spec;
  spec.n = 300;
  spec.classes = 3;
  spec.separation = 10.0;
  spec.noise = 1.0;
  spec.seed = 5;
  const auto data = make_synthetic(spec);
  const auto graph = knn_graph(data.features, 10);
  const auto res = spectral_clustering(graph, 3, 5, 2);
  EXPECT_GE(unsupervised_accuracy(*data.labels, res.partition.labels, 3), 0.99);
}

TEST(Spectral, KEqualsNGivesSingletons) {
  const auto res = spectral_clustering(path3(), 3, 1, 0);
  EXPECT_EQ(res.partition.labels, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(res.partition.k, 3);
}

TEST(Spectral, DeterministicPerSeed) {
  const auto graph = cliques(3, 4);
  const auto a = spectral_clustering(graph, 3, 3, 9);
  const auto b = spectral_clustering(graph, 3, 3, 9);
  EXPECT_EQ(a.partition.labels, b.partition.labels);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(KMeans, SingleClusterIsCentroidAtMean) {
  Matrix x(4, 2);
  x << 0, 0, 2, 0, 0, 2, 2, 2;
  const auto res = kmeans(x, 1, 3, 0);
  EXPECT_EQ(res.partition.labels, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_NEAR(res.centroids(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(res.centroids(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(res.inertia, 8.0, 1e-12);
}

TEST(KMeans, SeparatedGroupsHaveZeroInertia) {
  Matrix x(6, 1);
  x << 0, 0, 10, 10, 20, 20;
  const auto res = kmeans(x, 3, 5, 3);
  EXPECT_NEAR(res.inertia, 0.0, 1e-15);
  EXPECT_EQ(res.partition.labels[0], res.partition.labels[1]);
  EXPECT_EQ(res.partition.labels[2], res.partition.labels[3]);
  EXPECT_NE(res.partition.labels[0], res.partition.labels[2]);
  EXPECT_NE(res.partition.labels[2], res.partition.labels[4]);
}

TEST(KMeans, DeterministicAndValidated) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  Matrix x(50, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(gen);
  const auto a = kmeans(x, 4, 4, 12);
  const auto b = kmeans(x, 4, 4, 12);
  EXPECT_EQ(a.partition.labels, b.partition.labels);
  EXPECT_EQ(a.inertia, b.inertia);
  EXPECT_THROW(kmeans(x, 0, 1, 0), ValidationError);
  EXPECT_THROW(kmeans(x, 51, 1, 0), ValidationError);
  EXPECT_THROW(kmeans(x, 2, 0, 0), ValidationError);
}

TEST(KMeans, MoreRestartsNeverWorse) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  Matrix x(80, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(gen);
  const auto one = kmeans(x, 5, 1, 7);
  const auto many = kmeans(x, 5, 8, 7);
  EXPECT_LE(many.inertia, one.inertia + 1e-12);
}
