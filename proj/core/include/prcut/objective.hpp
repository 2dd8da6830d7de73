#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prcut/graph.hpp"

namespace prcut {

/// Floor below which a tracked cluster mass counts as collapsed.
inline constexpr double kClusterMassFloor = 1e-6;

/// Row-stochastic n x k matrix of cluster-membership probabilities.
class AssignmentMatrix {
 public:
  /// Throws unless entries lie in [0, 1] and rows sum to 1 within 1e-9.
  explicit AssignmentMatrix(Matrix probabilities);

  const Matrix& matrix() const noexcept { return p_; }
  Eigen::Index rows() const noexcept { return p_.rows(); }
  Eigen::Index clusters() const noexcept { return p_.cols(); }
  /// Column means (cluster masses).
  Vector column_means() const { return p_.colwise().mean().transpose(); }

 private:
  Matrix p_;
};

/// Online estimate of the cluster masses, updated with step size
/// beta_t = min(1, beta / t).
struct ClusterMassState {
  Vector pbar;
  std::int64_t step = 0;
  double beta = 0.8;

  /// pbar = (1/k) 1, step 0.
  static ClusterMassState uniform(int k, double beta);
};

/// One moving-average step toward `batch_mean`; returns the new state.
ClusterMassState update_pbar(const ClusterMassState& state, const Vector& batch_mean);

/// Expected ratio-cut contribution of one cluster column p (entries in [0,1]):
///   (1/2) sum_{i,j} W_ij (p_i + p_j - 2 p_i p_j) * I(p, i, j),
///   I(p, i, j) = integral_0^1 prod_{m != i,j} (1 - p_m t) dt.
/// The integral uses a Gauss-Legendre rule that is exact for the degree-(n-2)
/// product; per node the full log-product is formed once and the (i, j)
/// factors are divided out, giving O(c n + c |E|) work per column.
double expected_ratio_cut_column(const SparseSimilarity& graph, std::span<const double> p);

/// Sum of expected_ratio_cut_column over the clusters. Requires n >= 3.
/// Intended as an evaluation oracle for graphs up to a few thousand vertices.
double exact_expected_rcut(const SparseSimilarity& graph, const AssignmentMatrix& p);

/// Largest graph accepted by the exact path (quadrature order n/2 + 1).
inline constexpr std::size_t kExactRcutMaxVertices = 8192;

/// sum_l (1/pbar_l) sum_{i,j} W_ij (P_l[i,l] + P_r[j,l] - 2 P_l[i,l] P_r[j,l]),
/// divided by ||W||_1 when `normalize` is set and ||W||_1 > 0.
/// Throws CollapseError if any pbar_l is below the floor.
double lrc_loss(const Matrix& w, const Matrix& p_left, const Matrix& p_right,
                const Vector& pbar, bool normalize);

enum class GradientMode { analytic, row_local };

std::string_view to_string(GradientMode mode);
GradientMode parse_gradient_mode(std::string_view text);

struct LrcGradient {
  Matrix left;
  Matrix right;
};

/// Gradient of lrc_loss with respect to P_l and P_r.
///
/// Analytic mode is the exact derivative when pbar moves by 1/n_eff per unit
/// change of any entry of its column (the sampled-mean dependence):
///   dL/dP_l[i,l] = (1/pbar_l) sum_j W_ij (1 - 2 P_r[j,l]) - A_l / (n_eff pbar_l^2)
/// with A_l the column's pair sum. Row-local mode replaces A_l by the
/// row-local sum_j W_ij (P_l[i,l] + P_r[j,l] - 2 P_l[i,l] P_r[j,l]).
LrcGradient lrc_grad(const Matrix& w, const Matrix& p_left, const Matrix& p_right,
                     const Vector& pbar, double n_eff,
                     GradientMode mode = GradientMode::analytic, bool normalize = false);

/// Full-graph loss sum_l (1/pbar_l) sum_{i,j} W_ij (P_il + P_jl - 2 P_il P_jl)
/// with pbar_l the column mean of P.
double offline_lrc_loss(const SparseSimilarity& graph, const Matrix& p);

/// Exact gradient of offline_lrc_loss (pbar differentiated through P).
Matrix offline_lrc_grad(const SparseSimilarity& graph, const Matrix& p);

struct KlTerm {
  double value = 0.0;
  Vector grad;
};

/// KL(pbar || uniform_k) = sum_l pbar_l log(k pbar_l) and its gradient
/// log(k pbar_l) + 1. The input is renormalized; zero entries contribute 0 to
/// the value and use a 1e-12 floor inside the log of the gradient.
KlTerm kl_regularizer(const Vector& pbar_batch, int k);

/// Per-step objective record.
struct LossBreakdown {
  std::int64_t step = 0;
  double lrc = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double w_norm = 0.0;
  std::vector<double> pbar;

  /// One-line JSON: {"step","lrc","kl","total","w_norm","pbar"}.
  std::string to_json_line() const;
};

}  // namespace prcut
