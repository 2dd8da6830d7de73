#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "prcut/neural_model.hpp"

namespace prcut {

enum class OptimizerKind { sgd, rmsprop, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::rmsprop;
  double lr = 1e-4;
  double weight_decay = 1e-7;
  double beta1 = 0.9;       // Adam first moment
  double beta2 = 0.999;     // Adam second moment
  double rms_alpha = 0.99;  // RMSProp smoothing
  double eps = 1e-8;

  void validate() const;
};

/// First-order optimizer with decoupled weight decay:
///   theta <- theta - lr * weight_decay * theta - lr * update(g).
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const MlpParameters& shape);

  /// Applies one update in place. Throws NumericalError on a non-finite
  /// gradient, leaving the parameters untouched.
  void step(MlpParameters& params, const MlpParameters& grads);

  std::int64_t steps() const noexcept { return steps_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::int64_t steps_ = 0;
  MlpParameters first_;
  MlpParameters second_;
};

}  // namespace prcut
