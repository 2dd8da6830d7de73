#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prcut/graph.hpp"

namespace prcut {

/// Optimal assignment maximizing sum_r profit(r, assignment[r]) over a square
/// matrix (Kuhn-Munkres, O(k^3)).
std::vector<int> hungarian_max(const Matrix& profit);

/// max over cluster-id permutations of the fraction of matched labels.
/// All ids must lie in [0, k).
double unsupervised_accuracy(std::span<const int> truth, std::span<const int> clusters, int k);

/// I(y; c) / max(H(y), H(c)) with natural logs. 1 when both labelings are
/// constant, 0 when exactly one is.
double nmi(std::span<const int> truth, std::span<const int> clusters);

/// Adjusted Rand index from the contingency table (1 for the fully
/// degenerate case where the expected and maximal index coincide).
double ari(std::span<const int> truth, std::span<const int> clusters);

struct RcutMetric {
  double value = 0.0;
  bool dropped_empty_clusters = false;
  bool single_cluster = false;
};

/// Ratio cut of a labeling; empty clusters are dropped and flagged, a single
/// occupied cluster yields 0 with the degenerate flag.
RcutMetric rcut_metric(const SparseSimilarity& graph, std::span<const int> clusters);

struct MetricsReport {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  std::optional<double> rcut;
  std::size_t n = 0;
  int k = 0;
  std::vector<std::string> degenerate_flags;

  /// {"acc","nmi","ari","rcut","n","k","degenerate_flags"}; rcut is null
  /// when no graph was supplied.
  std::string to_json() const;
};

MetricsReport evaluate_clustering(std::span<const int> truth, std::span<const int> clusters,
                                  int k, const SparseSimilarity* graph = nullptr);

}  // namespace prcut
