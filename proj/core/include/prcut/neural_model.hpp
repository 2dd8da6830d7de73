#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prcut/graph.hpp"

namespace prcut {

/// Layer widths [input, hidden..., clusters]. Hidden layers use exact GeLU,
/// the output layer a row-wise softmax.
struct MlpSpec {
  std::vector<int> layer_widths;
  bool weight_norm_first_last = true;

  /// A single linear layer followed by softmax.
  static MlpSpec linear(int input_dim, int clusters, bool weight_norm = true);
  /// `depth` hidden layers of constant width.
  static MlpSpec mlp(int input_dim, int hidden_width, int depth, int clusters,
                     bool weight_norm = true);

  int input_dim() const { return layer_widths.front(); }
  int output_dim() const { return layer_widths.back(); }
  std::size_t layer_count() const { return layer_widths.size() - 1; }
  bool layer_is_weight_normalized(std::size_t layer) const;

  /// Throws on fewer than two widths, non-positive widths or output < 2.
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Affine layer y = x W^T + b. With weight normalization, `weight` holds the
/// direction V and the effective weight is scale_r * V_r / ||V_r|| per row.
struct LinearLayer {
  Matrix weight;  // out x in
  Vector scale;   // out (weight-normalized layers only)
  Vector bias;    // out
  bool weight_norm = false;

  Matrix effective_weight() const;
};

/// Parameters, also used for same-shaped gradients and optimizer moments.
struct MlpParameters {
  std::vector<LinearLayer> layers;

  /// Contiguous parameter blocks in declaration order: for each layer the
  /// weight (direction), then scale when weight-normalized, then bias.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  std::size_t parameter_count() const;

  MlpParameters zeros_like() const;
  bool all_finite() const;
};

struct MlpModel {
  MlpSpec spec;
  MlpParameters params;
};

/// Kaiming-style uniform weights (bound sqrt(6 / fan_in)), zero biases;
/// weight-normalized scales start at the row norms so the effective weight
/// equals the sampled one. Deterministic per seed.
MlpModel init_mlp(const MlpSpec& spec, std::uint64_t seed);

struct ForwardCache {
  std::vector<Matrix> inputs;          // input to each layer
  std::vector<Matrix> pre_activations; // affine output of each layer
  Matrix output;                       // softmax probabilities
};

double gelu(double x);
double gelu_derivative(double x);

/// Row-stochastic b x k output. Throws on non-finite input or width mismatch.
Matrix forward(const MlpModel& model, const Matrix& x, ForwardCache* cache = nullptr);

/// Gradients of sum_ij dP_ij * P_ij with respect to every parameter.
MlpParameters backward(const MlpModel& model, const ForwardCache& cache, const Matrix& d_output);

}  // namespace prcut
