#include "prcut/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "prcut/error.hpp"

namespace prcut {

namespace {

void check_ids(std::span<const std::size_t> left_ids,
               std::span<const std::size_t> right_ids, Eigen::Index rows,
               Eigen::Index cols) {
  if (left_ids.empty() != right_ids.empty()) {
    throw ValidationError("block ids must be given for both sides or neither");
  }
  if (!left_ids.empty() &&
      (static_cast<Eigen::Index>(left_ids.size()) != rows ||
       static_cast<Eigen::Index>(right_ids.size()) != cols)) {
    throw ValidationError("block ids do not match block shape");
  }
}

void zero_collisions(Matrix& block, std::span<const std::size_t> left_ids,
                     std::span<const std::size_t> right_ids) {
  if (left_ids.empty()) return;
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      if (left_ids[static_cast<std::size_t>(i)] ==
          right_ids[static_cast<std::size_t>(j)]) {
        block(i, j) = 0.0;
      }
    }
  }
}

std::vector<std::size_t> checked_cluster_sizes(const SparseSimilarity& graph,
                                               const Partition& part) {
  part.validate();
  if (part.size() != graph.size()) {
    throw ValidationError("partition size " + std::to_string(part.size()) +
                          " does not match graph size " +
                          std::to_string(graph.size()));
  }
  auto sizes = part.cluster_sizes();
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    if (sizes[l] == 0) {
      throw ValidationError("ratio cut undefined: cluster " +
                            std::to_string(l) + " is empty");
    }
  }
  return sizes;
}

std::vector<double> per_cluster_cut(const SparseSimilarity& graph,
                                    const Partition& part) {
  std::vector<double> cut(static_cast<std::size_t>(part.k), 0.0);
  for (const Edge& e : graph.edges()) {
    const int a = part.labels[e.i];
    const int b = part.labels[e.j];
    if (a != b) {
      cut[static_cast<std::size_t>(a)] += e.w;
      cut[static_cast<std::size_t>(b)] += e.w;
    }
  }
  return cut;
}

}  // namespace

SparseSimilarity SparseSimilarity::from_edges(std::size_t n,
                                              std::vector<Edge> edges) {
  SparseSimilarity g;
  g.n_ = n;
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (Edge e : edges) {
    if (e.i >= n || e.j >= n) {
      throw ValidationError("edge (" + std::to_string(e.i) + ", " +
                            std::to_string(e.j) + ") out of range for n=" +
                            std::to_string(n));
    }
    if (e.i == e.j) {
      throw ValidationError("self loop at vertex " + std::to_string(e.i) +
                            " (W_ii must be 0)");
    }
    if (!std::isfinite(e.w) || e.w < 0.0) {
      throw ValidationError("edge weights must be finite and nonnegative");
    }
    if (e.w == 0.0) continue;
    if (e.i > e.j) std::swap(e.i, e.j);
    kept.push_back(e);
  }
  std::sort(kept.begin(), kept.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  for (std::size_t t = 1; t < kept.size(); ++t) {
    if (kept[t].i == kept[t - 1].i && kept[t].j == kept[t - 1].j) {
      throw ValidationError("duplicate edge (" + std::to_string(kept[t].i) +
                            ", " + std::to_string(kept[t].j) + ")");
    }
  }
  g.edges_ = std::move(kept);

  g.degree_ = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> count(n, 0);
  for (const Edge& e : g.edges_) {
    g.degree_[static_cast<Eigen::Index>(e.i)] += e.w;
    g.degree_[static_cast<Eigen::Index>(e.j)] += e.w;
    ++count[e.i];
    ++count[e.j];
    g.total_weight_ += 2.0 * e.w;
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + count[i];
  g.adj_.resize(g.offsets_[n]);
  g.adj_w_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted by (i, j), so each row's neighbors come out sorted once
  // lower neighbors (from edges where the row is j) are placed first.
  for (const Edge& e : g.edges_) {
    g.adj_[fill[e.j]] = e.i;
    g.adj_w_[fill[e.j]++] = e.w;
  }
  for (const Edge& e : g.edges_) {
    g.adj_[fill[e.i]] = e.j;
    g.adj_w_[fill[e.i]++] = e.w;
  }
  return g;
}

SparseSimilarity SparseSimilarity::from_dense(const Matrix& w) {
  if (w.rows() != w.cols()) throw ValidationError("dense similarity must be square");
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    if (w(i, i) != 0.0) throw ValidationError("dense similarity has nonzero diagonal");
    for (Eigen::Index j = i + 1; j < w.cols(); ++j) {
      if (w(i, j) != w(j, i)) throw ValidationError("dense similarity is not symmetric");
      if (w(i, j) != 0.0) {
        edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w(i, j)});
      }
    }
  }
  return from_edges(static_cast<std::size_t>(w.rows()), std::move(edges));
}

double SparseSimilarity::weight(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ValidationError("vertex index out of range");
  const auto first = adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto last = adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return adj_w_[static_cast<std::size_t>(it - adj_.begin())];
}

std::span<const std::size_t> SparseSimilarity::neighbors(std::size_t i) const {
  return {adj_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> SparseSimilarity::neighbor_weights(std::size_t i) const {
  return {adj_w_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

Matrix SparseSimilarity::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Matrix w = Matrix::Zero(n, n);
  for (const Edge& e : edges_) {
    w(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.w;
    w(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.w;
  }
  return w;
}

Matrix SparseSimilarity::laplacian() const {
  Matrix l = -to_dense();
  l.diagonal() += degree_;
  return l;
}

Matrix SparseSimilarity::multiply(const Matrix& x) const {
  if (x.rows() != static_cast<Eigen::Index>(n_)) {
    throw ValidationError("SparseSimilarity::multiply: row mismatch");
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (const Edge& e : edges_) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    out.row(i) += e.w * x.row(j);
    out.row(j) += e.w * x.row(i);
  }
  return out;
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::knn_adjacency: return "knn-adjacency";
    case KernelKind::exp_cosine: return "exp-cosine";
    case KernelKind::label_equality: return "label-equality";
  }
  return "unknown";
}

std::string_view to_string(Metric metric) {
  return metric == Metric::euclidean ? "euclidean" : "cosine";
}

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "knn-adjacency" || text == "knn") return KernelKind::knn_adjacency;
  if (text == "exp-cosine") return KernelKind::exp_cosine;
  if (text == "label-equality" || text == "label") return KernelKind::label_equality;
  throw ValidationError("unknown kernel kind '" + std::string(text) + "'");
}

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::euclidean;
  if (text == "cosine") return Metric::cosine;
  throw ValidationError("unknown metric '" + std::string(text) + "'");
}

void KernelConfig::validate() const {
  if (k_neighbors < 1) throw ValidationError("k_neighbors must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive and finite");
  }
}

std::vector<std::size_t> Partition::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int label : labels) {
    if (label >= 0 && label < k) ++sizes[static_cast<std::size_t>(label)];
  }
  return sizes;
}

void Partition::validate() const {
  if (k < 1) throw ValidationError("partition needs k >= 1");
  if (labels.empty()) throw ValidationError("partition is empty");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at index " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(k) + ")");
    }
  }
}

SparseSimilarity knn_graph(const Matrix& features, int k_neighbors, Metric metric) {
  const Eigen::Index n = features.rows();
  if (n == 0) throw ValidationError("knn_graph: empty input");
  if (n < 2) throw ValidationError("knn_graph: need at least 2 points");
  if (k_neighbors < 1 || k_neighbors >= n) {
    throw ValidationError("knn_graph: k_neighbors must be in [1, n)");
  }
  if (!features.allFinite()) throw ValidationError("knn_graph: non-finite features");

  Matrix points = features;
  if (metric == Metric::cosine) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = points.row(i).norm();
      if (norm == 0.0) {
        throw ValidationError("knn_graph: zero-norm row " + std::to_string(i) +
                              " under cosine metric");
      }
      points.row(i) /= norm;
    }
  }
  // Row-major copy so each distance sweep streams contiguous memory.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = points;
  const Eigen::Index p = rows.cols();

  const auto k = static_cast<std::size_t>(k_neighbors);
  std::vector<std::pair<double, std::size_t>> candidates(static_cast<std::size_t>(n) - 1);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = rows.data() + i * p;
    std::size_t c = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* xj = rows.data() + j * p;
      double d = 0.0;
      if (metric == Metric::euclidean) {
        for (Eigen::Index t = 0; t < p; ++t) {
          const double diff = xi[t] - xj[t];
          d += diff * diff;
        }
      } else {
        double dot = 0.0;
        for (Eigen::Index t = 0; t < p; ++t) dot += xi[t] * xj[t];
        d = 1.0 - dot;
      }
      candidates[c++] = {d, static_cast<std::size_t>(j)};
    }
    std::nth_element(candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     candidates.end());
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t j = candidates[t].second;
      const auto a = static_cast<std::size_t>(i);
      edges.push_back({std::min(a, j), std::max(a, j), 1.0});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) {
                            return a.i == b.i && a.j == b.j;
                          }),
              edges.end());
  return SparseSimilarity::from_edges(static_cast<std::size_t>(n), std::move(edges));
}

Matrix kernel_block(const Matrix& left, const Matrix& right, const KernelConfig& cfg,
                    std::span<const std::size_t> left_ids,
                    std::span<const std::size_t> right_ids) {
  cfg.validate();
  if (cfg.kind != KernelKind::exp_cosine) {
    throw ValidationError("kernel_block handles exp-cosine only; use label_block "
                          "or graph_block for " + std::string(to_string(cfg.kind)));
  }
  if (left.cols() != right.cols()) throw ValidationError("kernel_block: width mismatch");
  check_ids(left_ids, right_ids, left.rows(), right.rows());

  auto normalized = [](const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double norm = x.row(i).norm();
      if (norm == 0.0 || !std::isfinite(norm)) {
        throw ValidationError("kernel_block: zero-norm row " + std::to_string(i) +
                              " under cosine similarity");
      }
      out.row(i) /= norm;
    }
    return out;
  };
  const Matrix cosine = normalized(left) * normalized(right).transpose();
  Matrix block = (cosine.array() / cfg.temperature).exp().matrix();
  zero_collisions(block, left_ids, right_ids);
  return block;
}

Matrix label_block(std::span<const int> labels_left, std::span<const int> labels_right,
                   std::span<const std::size_t> left_ids,
                   std::span<const std::size_t> right_ids) {
  const auto rows = static_cast<Eigen::Index>(labels_left.size());
  const auto cols = static_cast<Eigen::Index>(labels_right.size());
  check_ids(left_ids, right_ids, rows, cols);
  Matrix block(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      block(i, j) = labels_left[static_cast<std::size_t>(i)] ==
                            labels_right[static_cast<std::size_t>(j)]
                        ? 1.0
                        : 0.0;
    }
  }
  zero_collisions(block, left_ids, right_ids);
  return block;
}

Matrix graph_block(const SparseSimilarity& graph, std::span<const std::size_t> left_ids,
                   std::span<const std::size_t> right_ids) {
  Matrix block(static_cast<Eigen::Index>(left_ids.size()),
               static_cast<Eigen::Index>(right_ids.size()));
  for (std::size_t i = 0; i < left_ids.size(); ++i) {
    for (std::size_t j = 0; j < right_ids.size(); ++j) {
      block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          graph.weight(left_ids[i], right_ids[j]);
    }
  }
  return block;
}

double ratio_cut(const SparseSimilarity& graph, const Partition& part) {
  const auto sizes = checked_cluster_sizes(graph, part);
  const auto cut = per_cluster_cut(graph, part);
  double total = 0.0;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    total += cut[l] / static_cast<double>(sizes[l]);
  }
  return 0.5 * total;
}

double ratio_cut_laplacian(const SparseSimilarity& graph, const Partition& part) {
  const auto sizes = checked_cluster_sizes(graph, part);
  const auto n = static_cast<Eigen::Index>(graph.size());
  Matrix f = Matrix::Zero(n, part.k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = part.labels[static_cast<std::size_t>(i)];
    f(i, l) = 1.0 / std::sqrt(static_cast<double>(sizes[static_cast<std::size_t>(l)]));
  }
  return 0.5 * (f.transpose() * graph.laplacian() * f).trace();
}

double cut_mass(const SparseSimilarity& graph, const Partition& part) {
  part.validate();
  if (part.size() != graph.size()) throw ValidationError("partition/graph size mismatch");
  const auto cut = per_cluster_cut(graph, part);
  return std::accumulate(cut.begin(), cut.end(), 0.0);
}

void write_graph(std::ostream& out, const SparseSimilarity& graph,
                 const GraphFileHeader& header) {
  out << graph.size() << ' ' << header.k_neighbors << ' '
      << (header.metric.empty() ? std::string("none") : header.metric) << '\n';
  char buf[64];
  for (const Edge& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    out << e.i << ' ' << e.j << ' ' << buf << '\n';
  }
}

SparseSimilarity read_graph(std::istream& in, GraphFileHeader* header) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("graph file: missing header");
  GraphFileHeader h;
  {
    std::istringstream hs(line);
    long long n = -1;
    if (!(hs >> n >> h.k_neighbors >> h.metric) || n < 0) {
      throw ValidationError("graph file: malformed header '" + line + "'");
    }
    h.n = static_cast<std::size_t>(n);
  }
  std::vector<Edge> edges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long i = -1, j = -1;
    double w = 0.0;
    std::string rest;
    if (!(ls >> i >> j >> w) || (ls >> rest) || i < 0 || j < 0) {
      throw ValidationError("graph file: malformed edge at line " + std::to_string(line_no));
    }
    if (i >= j) {
      throw ValidationError("graph file: expected i < j at line " + std::to_string(line_no));
    }
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
  }
  if (header != nullptr) *header = h;
  return SparseSimilarity::from_edges(h.n, std::move(edges));
}

void save_graph(const std::string& path, const SparseSimilarity& graph,
                const GraphFileHeader& header) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_graph(out, graph, header);
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

SparseSimilarity load_graph(const std::string& path, GraphFileHeader* header) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file '" + path + "'");
  return read_graph(in, header);
}

}  // namespace prcut
