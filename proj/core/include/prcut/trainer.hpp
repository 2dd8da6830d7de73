#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prcut/data.hpp"
#include "prcut/graph.hpp"
#include "prcut/neural_model.hpp"
#include "prcut/objective.hpp"
#include "prcut/optimizer.hpp"

namespace prcut {

struct TrainConfig {
  int k = 10;
  std::size_t batch_size = 256;
  std::int64_t steps = 1000;
  double beta = 0.8;
  double gamma = 100.0;
  KernelConfig kernel;
  OptimizerConfig optimizer;
  /// Hidden layer widths; empty gives a single linear layer + softmax.
  std::vector<int> hidden;
  bool weight_norm = true;
  /// Multiplies the initial output-layer weights; values below 1 start the
  /// run closer to uniform assignments.
  double output_init_scale = 1.0;
  std::uint64_t seed = 0;
  /// Divide the batch objective and its gradient by sum(W_block).
  bool normalize_by_w_norm = true;
  GradientMode gradient_mode = GradientMode::analytic;
  /// Stop when the trailing-window mean total changes by less than
  /// `early_stop_tolerance` (relative) between consecutive windows.
  bool early_stop = false;
  std::int64_t early_stop_window = 200;
  double early_stop_tolerance = 1e-4;

  /// Throws ValidationError on b < 2, k < 2, beta outside (0, 1], gamma < 0,
  /// steps < 1 or an invalid kernel/optimizer setting.
  void validate() const;
  MlpSpec model_spec(int input_dim) const;
};

enum class TrainStatus { completed, early_stopped, collapsed, non_finite };

std::string_view to_string(TrainStatus status);

struct TrainHistory {
  std::vector<LossBreakdown> records;
  std::vector<double> final_pbar;
  std::vector<double> step_seconds;

  /// One JSON object per line for every executed step (no timings).
  std::string to_jsonl() const;
};

struct TrainResult {
  MlpModel model;
  TrainHistory history;
  TrainStatus status = TrainStatus::completed;
  std::string message;
};

struct TrainOptions {
  /// Starting parameters instead of a seeded initialization.
  std::optional<MlpModel> initial_model;
  /// Precomputed k-NN graph over the dataset (k-NN kernel only).
  const SparseSimilarity* graph = nullptr;
};

/// Online training loop. Each step draws independent left and right batches
/// without replacement, builds the similarity block (zeroing id collisions),
/// runs one forward pass over both, moves pbar toward the batch mean, injects
/// dL/dP plus gamma times the KL gradient through the batch mean, and takes
/// one optimizer step. Collapse or a non-finite loss/gradient stops the run
/// early with the history so far and the matching status.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const TrainOptions& options = {});

struct Prediction {
  Partition partition;
  AssignmentMatrix assignments;
};

/// Row-wise argmax of the model output; ties go to the smallest index.
Prediction predict(const MlpModel& model, const Matrix& features);

/// Argmax with ties to the smallest index.
Partition argmax_partition(const Matrix& probabilities);

}  // namespace prcut
