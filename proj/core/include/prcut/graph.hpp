#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace prcut {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected weighted edge, stored once with i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Symmetric nonnegative similarity graph with zero diagonal.
///
/// Stores the upper triangle as an edge list plus a CSR adjacency (both
/// directions, neighbors sorted) for O(log deg) weight lookups.
class SparseSimilarity {
 public:
  SparseSimilarity() = default;

  /// Builds a graph from (i, j, w) triples. Pairs with i > j are reoriented;
  /// zero weights are dropped. Self loops, negative or non-finite weights,
  /// out-of-range vertices and duplicate pairs are rejected.
  static SparseSimilarity from_edges(std::size_t n, std::vector<Edge> edges);

  /// Builds a graph from a dense symmetric matrix (upper triangle is read,
  /// symmetry and zero diagonal are checked).
  static SparseSimilarity from_dense(const Matrix& w);

  std::size_t size() const noexcept { return n_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Vector& degrees() const noexcept { return degree_; }
  double degree(std::size_t i) const { return degree_[static_cast<Eigen::Index>(i)]; }

  /// ||W||_1 = sum over ordered pairs = 2 * sum of stored weights.
  double total_weight() const noexcept { return total_weight_; }

  /// W_ij (0 when absent, including i == j).
  double weight(std::size_t i, std::size_t j) const;

  std::span<const std::size_t> neighbors(std::size_t i) const;
  std::span<const double> neighbor_weights(std::size_t i) const;

  Matrix to_dense() const;
  /// Unnormalized Laplacian D - W.
  Matrix laplacian() const;

  /// W * X for an n x m dense matrix.
  Matrix multiply(const Matrix& x) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  Vector degree_;
  double total_weight_ = 0.0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> adj_;
  std::vector<double> adj_w_;
};

enum class KernelKind { knn_adjacency, exp_cosine, label_equality };
enum class Metric { euclidean, cosine };

std::string_view to_string(KernelKind kind);
std::string_view to_string(Metric metric);
KernelKind parse_kernel_kind(std::string_view text);
Metric parse_metric(std::string_view text);

struct KernelConfig {
  KernelKind kind = KernelKind::knn_adjacency;
  int k_neighbors = 100;
  double temperature = 1.0;
  Metric metric = Metric::euclidean;

  void validate() const;
};

/// Hard clustering of n vertices into k clusters.
struct Partition {
  std::vector<int> labels;
  int k = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::vector<std::size_t> cluster_sizes() const;
  /// Throws unless every id is in [0, k) and some cluster is nonempty.
  void validate() const;
};

/// Exact k-nearest-neighbor graph, symmetrized by union, unit weights.
/// Distance ties go to the smaller vertex index.
SparseSimilarity knn_graph(const Matrix& features, int k_neighbors,
                           Metric metric = Metric::euclidean);

/// exp(cos(z_i, z_j) / tau) between the rows of `left` and `right`.
///
/// When vertex ids are supplied for both sides, entries whose ids coincide
/// are zeroed (W_ii = 0 for overlapping batches). Only the exp-cosine kind is
/// handled here; label kernels go through label_block and k-NN kernels
/// through graph_block.
Matrix kernel_block(const Matrix& left, const Matrix& right,
                    const KernelConfig& cfg,
                    std::span<const std::size_t> left_ids = {},
                    std::span<const std::size_t> right_ids = {});

/// 1 where labels agree, 0 elsewhere; id collisions zeroed as above.
Matrix label_block(std::span<const int> labels_left,
                   std::span<const int> labels_right,
                   std::span<const std::size_t> left_ids = {},
                   std::span<const std::size_t> right_ids = {});

/// Sub-block W[left_ids, right_ids] of a stored graph.
Matrix graph_block(const SparseSimilarity& graph,
                   std::span<const std::size_t> left_ids,
                   std::span<const std::size_t> right_ids);

/// (1/2) sum_l cut(C_l) / |C_l|. Every cluster must be nonempty.
double ratio_cut(const SparseSimilarity& graph, const Partition& part);

/// (1/2) Tr(F^T L F) with F the ratio-assignment matrix; dense, O(n^2 k).
double ratio_cut_laplacian(const SparseSimilarity& graph, const Partition& part);

/// sum_l cut(C_l); each boundary edge counted once per side.
double cut_mass(const SparseSimilarity& graph, const Partition& part);

struct GraphFileHeader {
  std::size_t n = 0;
  int k_neighbors = 0;
  std::string metric;
};

/// Text format: header "n k_neighbors metric", then one "i j w" per edge
/// (i < j), weights with 17 significant digits.
void write_graph(std::ostream& out, const SparseSimilarity& graph,
                 const GraphFileHeader& header);
SparseSimilarity read_graph(std::istream& in, GraphFileHeader* header = nullptr);

void save_graph(const std::string& path, const SparseSimilarity& graph,
                const GraphFileHeader& header);
SparseSimilarity load_graph(const std::string& path,
                            GraphFileHeader* header = nullptr);

}  // namespace prcut
