#include "prcut/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>

#include "prcut/error.hpp"
#include "prcut/random.hpp"

namespace prcut {

namespace {

// Householder reduction of the symmetric matrix held in v to tridiagonal
// form; d gets the diagonal, e the subdiagonal (e[0] = 0) and v the
// accumulated orthogonal transform. Column-major friendly: every inner loop
// walks down a column.
void tridiagonalize(Matrix& v, Vector& d, Vector& e) {
  const Eigen::Index n = v.rows();
  double* a = v.data();
  auto at = [a, n](Eigen::Index r, Eigen::Index c) -> double& { return a[r + c * n]; };

  for (Eigen::Index j = 0; j < n; ++j) d[j] = at(n - 1, j);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (Eigen::Index j = 0; j < i; ++j) {
        d[j] = at(i - 1, j);
        at(i, j) = 0.0;
        at(j, i) = 0.0;
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e[j] = 0.0;

      for (Eigen::Index j = 0; j < i; ++j) {
        f = d[j];
        at(j, i) = f;
        g = e[j] + at(j, j) * f;
        const double* col = a + j * n;
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += col[k] * d[k];
          e[k] += col[k] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        double* col = a + j * n;
        for (Eigen::Index k = j; k <= i - 1; ++k) col[k] -= (f * e[k] + g * d[k]);
        d[j] = at(i - 1, j);
        at(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (Eigen::Index i = 0; i < n - 1; ++i) {
    at(n - 1, i) = at(i, i);
    at(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      const double* next = a + (i + 1) * n;
      for (Eigen::Index k = 0; k <= i; ++k) d[k] = next[k] / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double* col = a + j * n;
        double g = 0.0;
        for (Eigen::Index k = 0; k <= i; ++k) g += next[k] * col[k];
        for (Eigen::Index k = 0; k <= i; ++k) col[k] -= g * d[k];
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) at(k, i + 1) = 0.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d[j] = at(n - 1, j);
    at(n - 1, j) = 0.0;
  }
  at(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of v.
void tridiagonal_ql(Matrix& v, Vector& d, Vector& e) {
  const Eigen::Index n = v.rows();
  double* a = v.data();
  for (Eigen::Index i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    Eigen::Index m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60) throw NumericalError("symmetric eigensolver did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (Eigen::Index i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          double* col_i = a + i * n;
          double* col_i1 = a + (i + 1) * n;
          for (Eigen::Index k = 0; k < n; ++k) {
            h = col_i1[k];
            col_i1[k] = s * col_i[k] + c * h;
            col_i[k] = c * col_i[k] - s * h;
          }
          if (i == 0) break;
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

double squared_distance(const Matrix& x, Eigen::Index i, const Matrix& centroids, Eigen::Index c) {
  return (x.row(i) - centroids.row(c)).squaredNorm();
}

KMeansResult kmeans_once(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centroids(k, x.cols());
  // k-means++ seeding.
  centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Vector nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest[i] = squared_distance(x, i, centroids, 0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(x, i, centroids, c));
    }
  }

  KMeansResult result;
  result.partition.k = k;
  result.partition.labels.assign(static_cast<std::size_t>(n), 0);
  auto& labels = result.partition.labels;
  Vector dist(n);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= 300; ++iter) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double dc = squared_distance(x, i, centroids, c);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      labels[static_cast<std::size_t>(i)] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    result.inertia = inertia;
    result.iterations = iter;
    if (previous - inertia <= 1e-8 * std::max(inertia, std::numeric_limits<double>::min()) &&
        std::isfinite(previous)) {
      break;
    }
    previous = inertia;

    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        centroids.row(c) = x.row(far);
        dist[far] = 0.0;
      }
    }
  }
  result.centroids = centroids;
  return result;
}

}  // namespace

EigenResult symmetric_eigen(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("symmetric_eigen needs a square matrix");
  const Eigen::Index n = a.rows();
  EigenResult out;
  if (n == 0) return out;
  Matrix v = a;
  Vector d(n), e(n);
  tridiagonalize(v, d, e);
  tridiagonal_ql(v, d, e);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return d[x] < d[y]; });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values[j] = d[order[static_cast<std::size_t>(j)]];
    out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  return out;
}

EigenResult smallest_eigvecs(const SparseSimilarity& graph, int k, std::size_t max_vertices) {
  const std::size_t n = graph.size();
  if (k < 1) throw ValidationError("smallest_eigvecs needs k >= 1");
  if (n < static_cast<std::size_t>(k) + 1) throw ValidationError("smallest_eigvecs needs n >= k + 1");
  if (n > max_vertices) {
    throw ValidationError("dense eigensolver limited to n <= " + std::to_string(max_vertices));
  }
  const Matrix laplacian = graph.laplacian();
  EigenResult full = symmetric_eigen(laplacian);
  const double scale = std::max(laplacian.cwiseAbs().rowwise().sum().maxCoeff(), 1.0);

  // A disconnected graph has a multi-dimensional null space and the solver
  // returns an arbitrary basis of it. Rotate that basis so its first column
  // is the constant vector, which is then the one dropped.
  Eigen::Index zeros = 0;
  while (zeros < full.values.size() && std::abs(full.values[zeros]) <= 1e-10 * scale) ++zeros;
  if (zeros > 1) {
    const Matrix null_basis = full.vectors.leftCols(zeros);
    const Vector ones = Vector::Constant(static_cast<Eigen::Index>(n), 1.0);
    const Vector coords = null_basis.transpose() * ones;
    Eigen::HouseholderQR<Matrix> qr(coords);
    const Matrix q = qr.householderQ();
    full.vectors.leftCols(zeros) = null_basis * q;
    full.values.head(zeros).setZero();
  }

  EigenResult out;
  out.values = full.values.segment(1, k);
  out.vectors = full.vectors.middleCols(1, k);

  for (int j = 0; j < k; ++j) {
    const double residual =
        (laplacian * out.vectors.col(j) - out.values[j] * out.vectors.col(j)).norm();
    if (residual > 1e-8 * scale) {
      throw NumericalError("eigenpair residual " + std::to_string(residual) + " exceeds tolerance");
    }
  }
  return out;
}

KMeansResult kmeans(const Matrix& x, int k, int n_init, std::uint64_t seed) {
  if (k < 1) throw ValidationError("kmeans needs k >= 1");
  if (n_init < 1) throw ValidationError("kmeans needs n_init >= 1");
  if (x.rows() < k) throw ValidationError("kmeans needs at least k points");
  if (!x.allFinite()) throw ValidationError("kmeans: non-finite input");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_init; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult run = kmeans_once(x, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

SpectralResult spectral_clustering(const SparseSimilarity& graph, int k, int n_init,
                                   std::uint64_t seed) {
  const std::size_t n = graph.size();
  SpectralResult out;
  if (k >= 1 && static_cast<std::size_t>(k) == n) {
    out.partition.k = k;
    out.partition.labels.resize(n);
    std::iota(out.partition.labels.begin(), out.partition.labels.end(), 0);
    return out;
  }
  out.embedding = smallest_eigvecs(graph, k);
  KMeansResult km = kmeans(out.embedding.vectors, k, n_init, seed);
  out.partition = std::move(km.partition);
  out.inertia = km.inertia;
  return out;
}

}  // namespace prcut
