#include "prcut/optimizer.hpp"

#include <cmath>
#include <string>

#include "prcut/error.hpp"

namespace prcut {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "rmsprop") return OptimizerKind::rmsprop;
  if (text == "adam") return OptimizerKind::adam;
  throw ValidationError("unknown optimizer '" + std::string(text) + "'");
}

void OptimizerConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(rms_alpha >= 0.0 && rms_alpha < 1.0)) throw ValidationError("RMSProp alpha must lie in [0, 1)");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
}

Optimizer::Optimizer(OptimizerConfig config, const MlpParameters& shape)
    : config_(config), first_(shape.zeros_like()), second_(shape.zeros_like()) {
  config_.validate();
}

void Optimizer::step(MlpParameters& params, const MlpParameters& grads) {
  auto theta = params.blocks();
  const auto g = grads.blocks();
  auto m = first_.blocks();
  auto v = second_.blocks();
  if (theta.size() != g.size() || theta.size() != m.size()) {
    throw ValidationError("optimizer: parameter/gradient structure mismatch");
  }
  for (std::size_t b = 0; b < g.size(); ++b) {
    if (g[b].size() != theta[b].size()) throw ValidationError("optimizer: block size mismatch");
    for (double x : g[b]) {
      if (!std::isfinite(x)) throw NumericalError("non-finite gradient; aborting update");
    }
  }

  ++steps_;
  const double lr = config_.lr;
  const double decay = 1.0 - lr * config_.weight_decay;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t b = 0; b < g.size(); ++b) {
    for (std::size_t i = 0; i < g[b].size(); ++i) {
      const double grad = g[b][i];
      double& x = theta[b][i];
      switch (config_.kind) {
        case OptimizerKind::sgd:
          x = decay * x - lr * grad;
          break;
        case OptimizerKind::rmsprop: {
          double& sq = v[b][i];
          sq = config_.rms_alpha * sq + (1.0 - config_.rms_alpha) * grad * grad;
          x = decay * x - lr * grad / (std::sqrt(sq) + config_.eps);
          break;
        }
        case OptimizerKind::adam: {
          double& mo = m[b][i];
          double& sq = v[b][i];
          mo = config_.beta1 * mo + (1.0 - config_.beta1) * grad;
          sq = config_.beta2 * sq + (1.0 - config_.beta2) * grad * grad;
          const double m_hat = mo / bias1;
          const double v_hat = sq / bias2;
          x = decay * x - lr * m_hat / (std::sqrt(v_hat) + config_.eps);
          break;
        }
      }
    }
  }
}

}  // namespace prcut
