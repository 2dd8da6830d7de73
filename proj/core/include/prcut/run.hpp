#pragma once

#include <optional>
#include <string>

#include "prcut/config.hpp"
#include "prcut/metrics.hpp"
#include "prcut/trainer.hpp"

namespace prcut {

struct RunOutcome {
  TrainResult result;
  Partition partition;
  std::optional<MetricsReport> metrics;
};

/// Loads the data, trains and writes into cfg.output_dir:
///   resolved_config.json  every setting with defaults expanded
///   history.jsonl         one loss record per executed step
///   model.ckpt            final parameters
///   assignments.csv       predicted cluster per row (if enabled)
///   metrics.json          clustering metrics (labeled data, if enabled)
///   status.json           run status and message
///   timing.json           per-step wall clock
/// Everything except timing.json depends only on the configuration.
RunOutcome run_experiment(const RunConfig& cfg);

}  // namespace prcut
