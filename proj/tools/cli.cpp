#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "prcut/baselines.hpp"
#include "prcut/checkpoint.hpp"
#include "prcut/config.hpp"
#include "prcut/data.hpp"
#include "prcut/error.hpp"
#include "prcut/graph.hpp"
#include "prcut/metrics.hpp"
#include "prcut/run.hpp"
#include "prcut/trainer.hpp"
#include "prcut/verify.hpp"

namespace prcut {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

// Dataset selection shared by the subcommands that read features.
struct InputArgs {
  std::string path;
  std::string format = "csv";
  std::string labels_path;
  bool no_labels = false;

  void add_to(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--input,-i", path, "feature file (csv, embeddings or IDX images)");
    if (required) opt->required();
    app->add_option("--format", format, "csv | embeddings | idx")
        ->check(CLI::IsMember({"csv", "embeddings", "idx"}));
    app->add_option("--labels", labels_path, "IDX label file");
    app->add_flag("--no-labels", no_labels, "csv input has no label column");
  }

  Dataset load() const {
    DataSource src;
    src.kind = parse_data_source_kind(format);
    src.path = path;
    src.labels_path = labels_path;
    src.has_labels = !no_labels;
    RunConfig probe;
    probe.data = src;
    probe.check_files();
    return load_dataset(src);
  }
};

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

std::string labels_text(const std::vector<int>& labels) {
  std::string text = "cluster\n";
  for (int c : labels) text += std::to_string(c) + '\n';
  return text;
}

// One integer per line; a non-numeric first line is treated as a header.
std::vector<int> read_label_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::vector<int> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      if (row == 1) continue;
      throw ValidationError("'" + path + "' line " + std::to_string(row) + ": not an integer label");
    }
    out.push_back(v);
  }
  return out;
}

int max_label(const std::vector<int>& v) {
  int m = -1;
  for (int x : v) m = std::max(m, x);
  return m;
}

void print_metrics_if_labeled(const Dataset& data, const std::vector<int>& clusters, int k,
                              const SparseSimilarity* graph) {
  if (!data.labels) return;
  const int kk = std::max({k, data.label_classes(), max_label(clusters) + 1});
  std::cout << evaluate_clustering(*data.labels, clusters, kk, graph).to_json() << '\n';
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Probabilistic ratio-cut clustering toolkit", "prcut"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a clustering network from a run configuration");
  std::string config_path, output_dir;
  std::optional<int> o_k, o_knn_k;
  std::optional<std::size_t> o_batch;
  std::optional<std::int64_t> o_steps;
  std::optional<double> o_beta, o_gamma, o_tau, o_lr, o_wd;
  std::optional<std::uint64_t> o_seed;
  std::optional<std::string> o_kernel, o_optimizer, o_grad_mode;
  train_cmd->add_option("--config,-c", config_path, "run configuration JSON");
  train_cmd->add_option("--output,-o", output_dir, "output directory (overrides the config)");
  train_cmd->add_option("--k", o_k, "number of clusters");
  train_cmd->add_option("--batch-size", o_batch, "left/right batch size");
  train_cmd->add_option("--steps", o_steps, "optimizer steps");
  train_cmd->add_option("--beta", o_beta, "cluster-mass moving-average rate");
  train_cmd->add_option("--gamma", o_gamma, "balance regularizer weight");
  train_cmd->add_option("--seed", o_seed, "master seed");
  train_cmd->add_option("--kernel", o_kernel, "knn-adjacency | exp-cosine | label-equality");
  train_cmd->add_option("--tau", o_tau, "exp-cosine temperature");
  train_cmd->add_option("--knn-k", o_knn_k, "neighbors in the k-NN graph");
  train_cmd->add_option("--lr", o_lr, "learning rate");
  train_cmd->add_option("--weight-decay", o_wd, "decoupled weight decay");
  train_cmd->add_option("--optimizer", o_optimizer, "sgd | rmsprop | adam");
  train_cmd->add_option("--grad-mode", o_grad_mode, "analytic | row-local");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "assign clusters with a trained checkpoint");
  std::string model_path, predict_out;
  InputArgs predict_in;
  predict_cmd->add_option("--model,-m", model_path, "checkpoint file")->required();
  predict_in.add_to(predict_cmd);
  predict_cmd->add_option("--output,-o", predict_out, "write cluster ids here (default stdout)");

  // spectral
  auto* spectral_cmd = app.add_subcommand("spectral", "unnormalized spectral clustering baseline");
  InputArgs spectral_in;
  int spectral_k = 2, spectral_knn = 10, spectral_init = 5;
  std::uint64_t spectral_seed = 0;
  std::string spectral_metric = "euclidean", spectral_graph, spectral_out;
  spectral_in.add_to(spectral_cmd, false);
  spectral_cmd->add_option("--graph", spectral_graph, "precomputed graph file (instead of --input)");
  spectral_cmd->add_option("--k", spectral_k, "number of clusters")->required();
  spectral_cmd->add_option("--knn-k", spectral_knn, "neighbors in the k-NN graph");
  spectral_cmd->add_option("--metric", spectral_metric, "euclidean | cosine");
  spectral_cmd->add_option("--n-init", spectral_init, "k-means restarts");
  spectral_cmd->add_option("--seed", spectral_seed, "k-means seed");
  spectral_cmd->add_option("--output,-o", spectral_out, "write cluster ids here (default stdout)");

  // kmeans
  auto* kmeans_cmd = app.add_subcommand("kmeans", "k-means++ / Lloyd baseline on raw features");
  InputArgs kmeans_in;
  int kmeans_k = 2, kmeans_init = 10;
  std::uint64_t kmeans_seed = 0;
  std::string kmeans_out;
  kmeans_in.add_to(kmeans_cmd);
  kmeans_cmd->add_option("--k", kmeans_k, "number of clusters")->required();
  kmeans_cmd->add_option("--n-init", kmeans_init, "restarts");
  kmeans_cmd->add_option("--seed", kmeans_seed, "seed");
  kmeans_cmd->add_option("--output,-o", kmeans_out, "write cluster ids here (default stdout)");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "ACC / NMI / ARI (and ratio cut) of a labeling");
  std::string truth_path, pred_path, metrics_graph, metrics_out;
  InputArgs metrics_data;
  int metrics_k = 0;
  metrics_cmd->add_option("--truth", truth_path, "true labels, one per line");
  metrics_cmd->add_option("--data", metrics_data.path, "labeled dataset supplying the true labels");
  metrics_cmd->add_option("--format", metrics_data.format, "dataset format for --data")
      ->check(CLI::IsMember({"csv", "embeddings", "idx"}));
  metrics_cmd->add_option("--labels", metrics_data.labels_path, "IDX label file for --data");
  metrics_cmd->add_option("--pred", pred_path, "predicted cluster ids, one per line")->required();
  metrics_cmd->add_option("--graph", metrics_graph, "graph file for the ratio cut");
  metrics_cmd->add_option("--k", metrics_k, "cluster count (default: inferred)");
  metrics_cmd->add_option("--output,-o", metrics_out, "write the JSON report here (default stdout)");

  // knn-graph
  auto* knn_cmd = app.add_subcommand("knn-graph", "build a symmetrized k-NN graph file");
  InputArgs knn_in;
  int knn_k = 10;
  std::string knn_metric = "euclidean", knn_out;
  knn_in.add_to(knn_cmd);
  knn_cmd->add_option("--knn-k", knn_k, "neighbors per vertex");
  knn_cmd->add_option("--metric", knn_metric, "euclidean | cosine");
  knn_cmd->add_option("--output,-o", knn_out, "graph file")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the numerical self-verification suites");
  std::uint64_t verify_seed = 20240607;
  verify_cmd->add_option("--seed", verify_seed, "seed for the random instances");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  SyntheticSpec synth;
  std::string synth_kind = "blobs", synth_out, synth_format = "csv";
  synth_cmd->add_option("--kind", synth_kind, "blobs | two-moons | rings");
  synth_cmd->add_option("--n", synth.n, "number of points");
  synth_cmd->add_option("--noise", synth.noise, "Gaussian noise standard deviation");
  synth_cmd->add_option("--seed", synth.seed, "seed");
  synth_cmd->add_option("--classes", synth.classes, "blob count");
  synth_cmd->add_option("--dim", synth.dim, "blob dimension");
  synth_cmd->add_option("--separation", synth.separation, "distance between neighboring blob centers");
  synth_cmd->add_option("--format", synth_format, "csv | embeddings")
      ->check(CLI::IsMember({"csv", "embeddings"}));
  synth_cmd->add_option("--output,-o", synth_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return kExitValidation;
  }

  try {
    if (train_cmd->parsed()) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      TrainConfig& t = cfg.train;
      if (o_k) t.k = *o_k;
      if (o_batch) t.batch_size = *o_batch;
      if (o_steps) t.steps = *o_steps;
      if (o_beta) t.beta = *o_beta;
      if (o_gamma) t.gamma = *o_gamma;
      if (o_seed) t.seed = *o_seed;
      if (o_kernel) t.kernel.kind = parse_kernel_kind(*o_kernel);
      if (o_tau) t.kernel.temperature = *o_tau;
      if (o_knn_k) t.kernel.k_neighbors = *o_knn_k;
      if (o_lr) t.optimizer.lr = *o_lr;
      if (o_wd) t.optimizer.weight_decay = *o_wd;
      if (o_optimizer) t.optimizer.kind = parse_optimizer_kind(*o_optimizer);
      if (o_grad_mode) t.gradient_mode = parse_gradient_mode(*o_grad_mode);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      cfg.validate();

      const RunOutcome out = run_experiment(cfg);
      std::cout << "status: " << to_string(out.result.status) << " after "
                << out.result.history.records.size() << " steps";
      if (!out.result.message.empty()) std::cout << " (" << out.result.message << ")";
      std::cout << "\noutputs: " << cfg.output_dir << '\n';
      if (out.metrics) std::cout << out.metrics->to_json() << '\n';
      const bool ok = out.result.status == TrainStatus::completed ||
                      out.result.status == TrainStatus::early_stopped;
      return ok ? kExitOk : kExitNumerical;
    }

    if (predict_cmd->parsed()) {
      const Checkpoint ckpt = load_checkpoint(model_path);
      const Dataset data = predict_in.load();
      const Prediction pred = predict(ckpt.model, data.features);
      if (predict_out.empty()) {
        std::cout << labels_text(pred.partition.labels);
      } else {
        write_file(predict_out, labels_text(pred.partition.labels));
        print_metrics_if_labeled(data, pred.partition.labels, pred.partition.k, nullptr);
      }
      return kExitOk;
    }

    if (spectral_cmd->parsed()) {
      std::optional<Dataset> data;
      SparseSimilarity graph;
      if (!spectral_graph.empty()) {
        graph = load_graph(spectral_graph);
        if (!spectral_in.path.empty()) data = spectral_in.load();
      } else {
        if (spectral_in.path.empty()) throw ValidationError("spectral needs --input or --graph");
        data = spectral_in.load();
        graph = knn_graph(data->features, spectral_knn, parse_metric(spectral_metric));
      }
      const SpectralResult res = spectral_clustering(graph, spectral_k, spectral_init, spectral_seed);
      if (spectral_out.empty()) {
        std::cout << labels_text(res.partition.labels);
      } else {
        write_file(spectral_out, labels_text(res.partition.labels));
        if (data) print_metrics_if_labeled(*data, res.partition.labels, spectral_k, &graph);
      }
      return kExitOk;
    }

    if (kmeans_cmd->parsed()) {
      const Dataset data = kmeans_in.load();
      const KMeansResult res = kmeans(data.features, kmeans_k, kmeans_init, kmeans_seed);
      if (kmeans_out.empty()) {
        std::cout << labels_text(res.partition.labels);
      } else {
        write_file(kmeans_out, labels_text(res.partition.labels));
        print_metrics_if_labeled(data, res.partition.labels, kmeans_k, nullptr);
      }
      return kExitOk;
    }

    if (metrics_cmd->parsed()) {
      std::vector<int> truth;
      if (!truth_path.empty()) {
        truth = read_label_list(truth_path);
      } else if (!metrics_data.path.empty()) {
        const Dataset data = metrics_data.load();
        if (!data.labels) throw ValidationError("--data has no labels");
        truth = *data.labels;
      } else {
        throw ValidationError("metrics needs --truth or --data");
      }
      const std::vector<int> pred = read_label_list(pred_path);
      if (truth.size() != pred.size()) {
        throw ValidationError("truth has " + std::to_string(truth.size()) + " labels, prediction " +
                              std::to_string(pred.size()));
      }
      const int k = metrics_k > 0 ? metrics_k : std::max(max_label(truth), max_label(pred)) + 1;
      std::optional<SparseSimilarity> graph;
      if (!metrics_graph.empty()) graph = load_graph(metrics_graph);
      const std::string report =
          evaluate_clustering(truth, pred, k, graph ? &*graph : nullptr).to_json() + '\n';
      if (metrics_out.empty()) {
        std::cout << report;
      } else {
        write_file(metrics_out, report);
      }
      return kExitOk;
    }

    if (knn_cmd->parsed()) {
      const Dataset data = knn_in.load();
      const Metric metric = parse_metric(knn_metric);
      const SparseSimilarity graph = knn_graph(data.features, knn_k, metric);
      save_graph(knn_out, graph, GraphFileHeader{graph.size(), knn_k, std::string(to_string(metric))});
      std::cout << "graph: " << graph.size() << " vertices, " << graph.edges().size()
                << " edges -> " << knn_out << '\n';
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      const auto results = run_verification(verify_seed);
      std::cout << format_verification(results);
      for (const auto& r : results) {
        if (!r.passed) return kExitNumerical;
      }
      return kExitOk;
    }

    if (synth_cmd->parsed()) {
      synth.kind = parse_synthetic_kind(synth_kind);
      const Dataset data = make_synthetic(synth);
      const std::filesystem::path p(synth_out);
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
      if (synth_format == "csv") {
        save_csv(synth_out, data);
      } else {
        save_embeddings(synth_out, data);
      }
      std::cout << data.size() << " points, " << data.dim() << " dims, "
                << data.label_classes() << " classes -> " << synth_out << '\n';
      return kExitOk;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  std::cerr << app.help();
  return kExitValidation;
}

}  // namespace prcut
