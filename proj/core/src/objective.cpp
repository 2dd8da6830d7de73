#include "prcut/objective.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "prcut/error.hpp"
#include "prcut/poisson_quadrature.hpp"

namespace prcut {

namespace {

void check_block_shapes(const Matrix& w, const Matrix& p_left, const Matrix& p_right,
                        const Vector& pbar) {
  if (w.rows() != p_left.rows() || w.cols() != p_right.rows()) {
    throw ValidationError("similarity block shape does not match batch sizes");
  }
  if (p_left.cols() != p_right.cols() || p_left.cols() != pbar.size()) {
    throw ValidationError("cluster count mismatch between P_l, P_r and pbar");
  }
}

void check_floor(const Vector& pbar) {
  for (Eigen::Index l = 0; l < pbar.size(); ++l) {
    if (!(pbar[l] >= kClusterMassFloor)) {
      throw CollapseError(static_cast<std::size_t>(l), pbar[l]);
    }
  }
}

// A_l = sum_ij W_ij (P_l[i,l] + P_r[j,l] - 2 P_l[i,l] P_r[j,l]) for every l.
Vector pair_sums(const Matrix& w, const Matrix& p_left, const Matrix& p_right) {
  const Vector row_sums = w.rowwise().sum();
  const Vector col_sums = w.colwise().sum().transpose();
  const Matrix wp_right = w * p_right;  // b_l x k
  Vector a(p_left.cols());
  for (Eigen::Index l = 0; l < p_left.cols(); ++l) {
    a[l] = row_sums.dot(p_left.col(l)) + col_sums.dot(p_right.col(l)) -
           2.0 * p_left.col(l).dot(wp_right.col(l));
  }
  return a;
}

double block_scale(const Matrix& w, bool normalize) {
  if (!normalize) return 1.0;
  const double norm = w.sum();
  return norm > 0.0 ? 1.0 / norm : 1.0;
}

}  // namespace

AssignmentMatrix::AssignmentMatrix(Matrix probabilities) : p_(std::move(probabilities)) {
  if (p_.rows() == 0 || p_.cols() == 0) throw ValidationError("empty assignment matrix");
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    for (Eigen::Index l = 0; l < p_.cols(); ++l) {
      if (!(p_(i, l) >= 0.0 && p_(i, l) <= 1.0)) {
        throw ValidationError("assignment probability outside [0, 1] at row " +
                              std::to_string(i));
      }
    }
    if (std::abs(p_.row(i).sum() - 1.0) > 1e-9) {
      throw ValidationError("assignment row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

ClusterMassState ClusterMassState::uniform(int k, double beta) {
  if (k < 1) throw ValidationError("cluster count must be >= 1");
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  ClusterMassState s;
  s.pbar = Vector::Constant(k, 1.0 / k);
  s.step = 0;
  s.beta = beta;
  return s;
}

ClusterMassState update_pbar(const ClusterMassState& state, const Vector& batch_mean) {
  if (batch_mean.size() != state.pbar.size()) {
    throw ValidationError("batch mean length does not match cluster count");
  }
  ClusterMassState next = state;
  next.step = state.step + 1;
  const double beta_t = std::min(1.0, state.beta / static_cast<double>(next.step));
  next.pbar = (1.0 - beta_t) * state.pbar + beta_t * batch_mean;
  return next;
}

double expected_ratio_cut_column(const SparseSimilarity& graph, std::span<const double> p) {
  const std::size_t n = graph.size();
  if (n < 3) throw ValidationError("expected ratio-cut needs n >= 3");
  if (n > kExactRcutMaxVertices) {
    throw ValidationError("exact expected ratio-cut limited to n <= " +
                          std::to_string(kExactRcutMaxVertices));
  }
  if (p.size() != n) throw ValidationError("assignment column length does not match graph");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("assignment probability outside [0, 1]");
  }

  const int order = exact_order(n);
  const auto rule = cached_gauss_legendre_unit(order, exact_order(kExactRcutMaxVertices));
  const std::size_t c = rule->order();

  std::vector<LogProduct> full(c);
  for (std::size_t q = 0; q < c; ++q) {
    for (double v : p) full[q].multiply_one_minus(v * rule->nodes[q]);
  }

  double total = 0.0;
  for (const Edge& e : graph.edges()) {
    const double pi = p[e.i];
    const double pj = p[e.j];
    const double flip = pi + pj - 2.0 * pi * pj;
    if (flip == 0.0) continue;
    double integral = 0.0;
    for (std::size_t q = 0; q < c; ++q) {
      LogProduct rest = full[q];
      rest.divide_one_minus(pi * rule->nodes[q]);
      rest.divide_one_minus(pj * rule->nodes[q]);
      integral += rule->weights[q] * rest.value();
    }
    // Stored once per unordered pair; the ordered double sum carries a 1/2.
    total += e.w * flip * integral;
  }
  return total;
}

double exact_expected_rcut(const SparseSimilarity& graph, const AssignmentMatrix& p) {
  if (static_cast<std::size_t>(p.rows()) != graph.size()) {
    throw ValidationError("assignment rows do not match graph size");
  }
  double total = 0.0;
  std::vector<double> column(graph.size());
  for (Eigen::Index l = 0; l < p.clusters(); ++l) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      column[static_cast<std::size_t>(i)] = p.matrix()(i, l);
    }
    total += expected_ratio_cut_column(graph, column);
  }
  return total;
}

double lrc_loss(const Matrix& w, const Matrix& p_left, const Matrix& p_right,
                const Vector& pbar, bool normalize) {
  check_block_shapes(w, p_left, p_right, pbar);
  check_floor(pbar);
  const Vector a = pair_sums(w, p_left, p_right);
  return block_scale(w, normalize) * a.cwiseQuotient(pbar).sum();
}

std::string_view to_string(GradientMode mode) {
  return mode == GradientMode::analytic ? "analytic" : "row-local";
}

GradientMode parse_gradient_mode(std::string_view text) {
  if (text == "analytic") return GradientMode::analytic;
  if (text == "row-local") return GradientMode::row_local;
  throw ValidationError("unknown gradient mode '" + std::string(text) + "'");
}

LrcGradient lrc_grad(const Matrix& w, const Matrix& p_left, const Matrix& p_right,
                     const Vector& pbar, double n_eff, GradientMode mode, bool normalize) {
  check_block_shapes(w, p_left, p_right, pbar);
  check_floor(pbar);
  if (!(n_eff > 0.0)) throw ValidationError("n_eff must be positive");

  const double scale = block_scale(w, normalize);
  const Eigen::Index k = pbar.size();
  const Vector inv_pbar = pbar.cwiseInverse();
  const Vector inv_pbar2 = inv_pbar.cwiseProduct(inv_pbar);

  // sum_j W_ij (1 - 2 P_r[j,l]) and sum_i W_ij (1 - 2 P_l[i,l]).
  const Vector row_sums = w.rowwise().sum();
  const Vector col_sums = w.colwise().sum().transpose();
  const Matrix wp_right = w * p_right;
  const Matrix wtp_left = w.transpose() * p_left;
  Matrix flip_left = (-2.0 * wp_right).colwise() + row_sums;
  Matrix flip_right = (-2.0 * wtp_left).colwise() + col_sums;

  LrcGradient g;
  g.left.resize(p_left.rows(), k);
  g.right.resize(p_right.rows(), k);
  if (mode == GradientMode::analytic) {
    const Vector a = pair_sums(w, p_left, p_right);
    for (Eigen::Index l = 0; l < k; ++l) {
      const double shift = a[l] * inv_pbar2[l] / n_eff;
      g.left.col(l) = flip_left.col(l) * inv_pbar[l] - Vector::Constant(p_left.rows(), shift);
      g.right.col(l) = flip_right.col(l) * inv_pbar[l] - Vector::Constant(p_right.rows(), shift);
    }
  } else {
    // Row-local pair sums: sum_j W_ij (p_i + p_j - 2 p_i p_j) for each left row
    // i, and the column analogue for each right row j.
    for (Eigen::Index l = 0; l < k; ++l) {
      const Vector local_left = row_sums.cwiseProduct(p_left.col(l)) + wp_right.col(l) -
                                2.0 * p_left.col(l).cwiseProduct(wp_right.col(l));
      const Vector local_right = col_sums.cwiseProduct(p_right.col(l)) + wtp_left.col(l) -
                                 2.0 * p_right.col(l).cwiseProduct(wtp_left.col(l));
      g.left.col(l) = inv_pbar2[l] * (pbar[l] * flip_left.col(l) - local_left / n_eff);
      g.right.col(l) = inv_pbar2[l] * (pbar[l] * flip_right.col(l) - local_right / n_eff);
    }
  }
  g.left *= scale;
  g.right *= scale;
  return g;
}

namespace {

Vector checked_offline_means(const SparseSimilarity& graph, const Matrix& p) {
  if (static_cast<std::size_t>(p.rows()) != graph.size()) {
    throw ValidationError("assignment rows do not match graph size");
  }
  const Vector means = p.colwise().mean().transpose();
  for (Eigen::Index l = 0; l < means.size(); ++l) {
    if (means[l] == 0.0) {
      throw ValidationError("cluster " + std::to_string(l) + " has zero mean mass");
    }
  }
  return means;
}

}  // namespace

double offline_lrc_loss(const SparseSimilarity& graph, const Matrix& p) {
  const Vector means = checked_offline_means(graph, p);
  const Matrix wp = graph.multiply(p);
  const Vector& d = graph.degrees();
  double total = 0.0;
  for (Eigen::Index l = 0; l < p.cols(); ++l) {
    const double a = 2.0 * d.dot(p.col(l)) - 2.0 * p.col(l).dot(wp.col(l));
    total += a / means[l];
  }
  return total;
}

Matrix offline_lrc_grad(const SparseSimilarity& graph, const Matrix& p) {
  const Vector means = checked_offline_means(graph, p);
  const auto n = static_cast<double>(p.rows());
  const Matrix wp = graph.multiply(p);
  const Vector& d = graph.degrees();
  Matrix grad(p.rows(), p.cols());
  for (Eigen::Index l = 0; l < p.cols(); ++l) {
    const double a = 2.0 * d.dot(p.col(l)) - 2.0 * p.col(l).dot(wp.col(l));
    const double m = means[l];
    grad.col(l) = (2.0 * d - 4.0 * wp.col(l)) / m -
                  Vector::Constant(p.rows(), a / (n * m * m));
  }
  return grad;
}

KlTerm kl_regularizer(const Vector& pbar_batch, int k) {
  if (k < 1 || pbar_batch.size() != k) {
    throw ValidationError("KL regularizer: cluster count mismatch");
  }
  const double sum = pbar_batch.sum();
  if (!(sum > 0.0) || (pbar_batch.array() < 0.0).any()) {
    throw ValidationError("KL regularizer: masses must be nonnegative with positive sum");
  }
  KlTerm term;
  term.grad.resize(k);
  for (Eigen::Index l = 0; l < k; ++l) {
    const double q = pbar_batch[l] / sum;
    if (q > 0.0) term.value += q * std::log(k * q);
    term.grad[l] = std::log(k * std::max(q, 1e-12)) + 1.0;
  }
  return term;
}

std::string LossBreakdown::to_json_line() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["lrc"] = lrc;
  j["kl"] = kl;
  j["total"] = total;
  j["w_norm"] = w_norm;
  j["pbar"] = pbar;
  return j.dump();
}

}  // namespace prcut
