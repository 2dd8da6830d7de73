#pragma once

#include <cstdint>

#include "prcut/graph.hpp"

namespace prcut {

/// Eigenpairs sorted by ascending eigenvalue; vectors are orthonormal columns.
struct EigenResult {
  Vector values;
  Matrix vectors;
};

/// Full decomposition of a dense symmetric matrix by Householder
/// tridiagonalization followed by implicit-shift QL iteration.
EigenResult symmetric_eigen(const Matrix& a);

inline constexpr std::size_t kDenseEigenMaxVertices = 5000;

/// Eigenpairs 2..k+1 of the unnormalized Laplacian D - W: the k smoothest
/// eigenvectors after the constant one. Requires n >= k + 1 and
/// n <= max_vertices; verifies the residual of each returned pair.
EigenResult smallest_eigvecs(const SparseSimilarity& graph, int k,
                             std::size_t max_vertices = kDenseEigenMaxVertices);

struct KMeansResult {
  Partition partition;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

/// k-means++ seeding, Lloyd iterations until the relative inertia change is
/// below 1e-8 or 300 iterations, best of `n_init` restarts by inertia.
/// A cluster that empties is reseeded at the point farthest from its centroid.
KMeansResult kmeans(const Matrix& x, int k, int n_init, std::uint64_t seed);

struct SpectralResult {
  Partition partition;
  EigenResult embedding;
  double inertia = 0.0;
};

/// Unnormalized spectral clustering: k-means on the rows of the k smoothest
/// nontrivial Laplacian eigenvectors, best of `n_init` k-means runs.
/// k == n returns singletons.
SpectralResult spectral_clustering(const SparseSimilarity& graph, int k, int n_init,
                                   std::uint64_t seed);

}  // namespace prcut
