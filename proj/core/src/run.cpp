#include "prcut/run.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "prcut/checkpoint.hpp"
#include "prcut/error.hpp"

namespace prcut {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg) {
  cfg.validate();
  cfg.check_files();
  const Dataset data = load_dataset(cfg.data);

  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  save_run_config((dir / "resolved_config.json").string(), cfg);

  const KernelConfig& kernel = cfg.train.kernel;
  std::optional<SparseSimilarity> train_graph;
  if (kernel.kind == KernelKind::knn_adjacency) {
    train_graph = knn_graph(data.features, kernel.k_neighbors, kernel.metric);
  }

  RunOutcome outcome;
  TrainOptions options;
  options.graph = train_graph ? &*train_graph : nullptr;
  outcome.result = train(data, cfg.train, options);
  const TrainResult& result = outcome.result;

  write_text(dir / "history.jsonl", result.history.to_jsonl());
  save_checkpoint((dir / "model.ckpt").string(),
                  Checkpoint{result.model, cfg.train.seed,
                             static_cast<std::int64_t>(result.history.records.size())});

  outcome.partition = predict(result.model, data.features).partition;
  if (cfg.write_assignments) {
    std::string text = "cluster\n";
    for (int c : outcome.partition.labels) text += std::to_string(c) + '\n';
    write_text(dir / "assignments.csv", text);
  }

  if (cfg.metrics.enabled && data.labels) {
    std::optional<SparseSimilarity> metric_graph;
    const SparseSimilarity* graph = nullptr;
    if (cfg.metrics.rcut) {
      if (train_graph && kernel.k_neighbors == cfg.metrics.rcut_k_neighbors &&
          kernel.metric == cfg.metrics.rcut_metric) {
        graph = &*train_graph;
      } else {
        metric_graph =
            knn_graph(data.features, cfg.metrics.rcut_k_neighbors, cfg.metrics.rcut_metric);
        graph = &*metric_graph;
      }
    }
    const int k = std::max(cfg.train.k, data.label_classes());
    outcome.metrics = evaluate_clustering(*data.labels, outcome.partition.labels, k, graph);
    write_text(dir / "metrics.json", outcome.metrics->to_json() + "\n");
  }

  nlohmann::ordered_json status;
  status["status"] = to_string(result.status);
  status["message"] = result.message;
  status["steps"] = result.history.records.size();
  status["final_pbar"] = result.history.final_pbar;
  write_text(dir / "status.json", status.dump(2) + "\n");

  nlohmann::ordered_json timing;
  timing["step_seconds"] = result.history.step_seconds;
  write_text(dir / "timing.json", timing.dump() + "\n");
  return outcome;
}

}  // namespace prcut
