#include "prcut/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "prcut/error.hpp"

namespace prcut {

namespace {

void check_lengths(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw ValidationError("labelings differ in length (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw ValidationError("labelings are empty");
}

// Dense relabeling of arbitrary ids to 0..m-1.
std::vector<int> compact(std::span<const int> ids, int* count) {
  std::map<int, int> index;
  for (int id : ids) index.emplace(id, 0);
  int next = 0;
  for (auto& [id, slot] : index) slot = next++;
  std::vector<int> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = index[ids[i]];
  *count = next;
  return out;
}

struct Contingency {
  Matrix table;
  Vector rows;
  Vector cols;
  double n = 0.0;
};

Contingency contingency(std::span<const int> truth, std::span<const int> clusters) {
  int ry = 0;
  int rc = 0;
  const auto y = compact(truth, &ry);
  const auto c = compact(clusters, &rc);
  Contingency t;
  t.table = Matrix::Zero(ry, rc);
  for (std::size_t i = 0; i < y.size(); ++i) t.table(y[i], c[i]) += 1.0;
  t.rows = t.table.rowwise().sum();
  t.cols = t.table.colwise().sum().transpose();
  t.n = static_cast<double>(y.size());
  return t;
}

double entropy(const Vector& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0.0) {
      const double p = counts[i] / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

std::vector<int> hungarian_max(const Matrix& profit) {
  if (profit.rows() != profit.cols()) throw ValidationError("hungarian_max needs a square matrix");
  const auto k = static_cast<int>(profit.rows());
  if (k == 0) return {};
  // Minimize cost = max - profit with the potentials formulation (1-indexed).
  const double top = profit.maxCoeff();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> match(k + 1, 0), way(k + 1, 0);
  for (int row = 1; row <= k; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> min_v(k + 1, inf);
    std::vector<bool> used(k + 1, false);
    do {
      used[col0] = true;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= k; ++col) {
        if (used[col]) continue;
        const double cur = (top - profit(r0 - 1, col - 1)) - u[r0] - v[col];
        if (cur < min_v[col]) {
          min_v[col] = cur;
          way[col] = col0;
        }
        if (min_v[col] < delta) {
          delta = min_v[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= k; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          min_v[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(k, -1);
  for (int col = 1; col <= k; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

double unsupervised_accuracy(std::span<const int> truth, std::span<const int> clusters, int k) {
  check_lengths(truth, clusters);
  if (k < 1) throw ValidationError("accuracy needs k >= 1");
  Matrix table = Matrix::Zero(k, k);  // rows: cluster id, cols: class id
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || clusters[i] < 0 || clusters[i] >= k) {
      throw ValidationError("label id outside [0, k) at index " + std::to_string(i));
    }
    table(clusters[i], truth[i]) += 1.0;
  }
  const auto assignment = hungarian_max(table);
  double matched = 0.0;
  for (int c = 0; c < k; ++c) matched += table(c, assignment[static_cast<std::size_t>(c)]);
  return matched / static_cast<double>(truth.size());
}

double nmi(std::span<const int> truth, std::span<const int> clusters) {
  check_lengths(truth, clusters);
  const Contingency t = contingency(truth, clusters);
  const double hy = entropy(t.rows, t.n);
  const double hc = entropy(t.cols, t.n);
  if (hy == 0.0 && hc == 0.0) return 1.0;
  if (hy == 0.0 || hc == 0.0) return 0.0;
  double mi = 0.0;
  for (Eigen::Index r = 0; r < t.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.table.cols(); ++c) {
      const double nij = t.table(r, c);
      if (nij > 0.0) mi += nij / t.n * std::log(t.n * nij / (t.rows[r] * t.cols[c]));
    }
  }
  return std::clamp(mi / std::max(hy, hc), 0.0, 1.0);
}

double ari(std::span<const int> truth, std::span<const int> clusters) {
  check_lengths(truth, clusters);
  const Contingency t = contingency(truth, clusters);
  double index = 0.0;
  for (Eigen::Index r = 0; r < t.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.table.cols(); ++c) index += choose2(t.table(r, c));
  }
  double sum_rows = 0.0;
  double sum_cols = 0.0;
  for (Eigen::Index r = 0; r < t.rows.size(); ++r) sum_rows += choose2(t.rows[r]);
  for (Eigen::Index c = 0; c < t.cols.size(); ++c) sum_cols += choose2(t.cols[c]);
  // Scaled by 2 * C(n, 2) so integer pair counts stay exact in double.
  const double pairs = choose2(t.n);
  const double numerator = 2.0 * index * pairs - 2.0 * sum_rows * sum_cols;
  const double denominator = (sum_rows + sum_cols) * pairs - 2.0 * sum_rows * sum_cols;
  if (denominator == 0.0) return 1.0;
  return numerator / denominator;
}

RcutMetric rcut_metric(const SparseSimilarity& graph, std::span<const int> clusters) {
  if (clusters.size() != graph.size()) {
    throw ValidationError("labeling length does not match graph size");
  }
  int occupied = 0;
  const auto compacted = compact(clusters, &occupied);
  int max_id = -1;
  for (int c : clusters) {
    if (c < 0) throw ValidationError("negative cluster id");
    max_id = std::max(max_id, c);
  }
  RcutMetric out;
  out.dropped_empty_clusters = occupied < max_id + 1;
  if (occupied <= 1) {
    out.single_cluster = true;
    return out;
  }
  out.value = ratio_cut(graph, Partition{compacted, occupied});
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["acc"] = acc;
  j["nmi"] = nmi;
  j["ari"] = ari;
  j["rcut"] = rcut ? nlohmann::ordered_json(*rcut) : nlohmann::ordered_json(nullptr);
  j["n"] = n;
  j["k"] = k;
  j["degenerate_flags"] = degenerate_flags;
  return j.dump(2);
}

MetricsReport evaluate_clustering(std::span<const int> truth, std::span<const int> clusters,
                                  int k, const SparseSimilarity* graph) {
  check_lengths(truth, clusters);
  MetricsReport report;
  report.n = truth.size();
  int k_eff = k;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    k_eff = std::max({k_eff, truth[i] + 1, clusters[i] + 1});
  }
  report.k = k_eff;
  report.acc = unsupervised_accuracy(truth, clusters, k_eff);
  report.nmi = prcut::nmi(truth, clusters);
  report.ari = prcut::ari(truth, clusters);
  if (graph != nullptr) {
    const RcutMetric rc = rcut_metric(*graph, clusters);
    report.rcut = rc.value;
    if (rc.dropped_empty_clusters) report.degenerate_flags.emplace_back("empty_clusters_dropped");
    if (rc.single_cluster) report.degenerate_flags.emplace_back("single_cluster");
  }
  return report;
}

}  // namespace prcut
