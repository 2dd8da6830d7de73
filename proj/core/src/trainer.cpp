#include "prcut/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "prcut/error.hpp"
#include "prcut/random.hpp"

namespace prcut {

void TrainConfig::validate() const {
  if (k < 2) throw ValidationError("k must be >= 2");
  if (batch_size < 2) throw ValidationError("batch size must be >= 2");
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in (0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be >= 0");
  for (int w : hidden) {
    if (w < 1) throw ValidationError("hidden widths must be positive");
  }
  if (!(output_init_scale > 0.0) || !std::isfinite(output_init_scale)) {
    throw ValidationError("output_init_scale must be positive");
  }
  if (early_stop && early_stop_window < 1) throw ValidationError("early-stop window must be >= 1");
  if (!(early_stop_tolerance >= 0.0)) throw ValidationError("early-stop tolerance must be >= 0");
  kernel.validate();
  optimizer.validate();
}

MlpSpec TrainConfig::model_spec(int input_dim) const {
  MlpSpec spec;
  spec.layer_widths.push_back(input_dim);
  spec.layer_widths.insert(spec.layer_widths.end(), hidden.begin(), hidden.end());
  spec.layer_widths.push_back(k);
  spec.weight_norm_first_last = weight_norm;
  spec.validate();
  return spec;
}

std::string_view to_string(TrainStatus status) {
  switch (status) {
    case TrainStatus::completed: return "completed";
    case TrainStatus::early_stopped: return "early_stopped";
    case TrainStatus::collapsed: return "collapsed";
    case TrainStatus::non_finite: return "non_finite";
  }
  return "unknown";
}

std::string TrainHistory::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    out += r.to_json_line();
    out += '\n';
  }
  return out;
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), x.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(ids[r]));
  }
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<std::size_t>& ids) {
  std::vector<int> out(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) out[r] = labels[ids[r]];
  return out;
}

double window_mean(const std::vector<LossBreakdown>& records, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += records[i].total;
  return s / static_cast<double>(end - begin);
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  data.validate();
  const std::size_t n = data.size();
  const std::size_t b = cfg.batch_size;
  if (n < 2 * b) {
    throw ValidationError("dataset has " + std::to_string(n) + " rows; batch size " +
                          std::to_string(b) + " needs at least " + std::to_string(2 * b));
  }
  if (cfg.kernel.kind == KernelKind::label_equality && !data.labels) {
    throw ValidationError("label-equality kernel needs a labeled dataset");
  }

  SparseSimilarity own_graph;
  const SparseSimilarity* graph = options.graph;
  if (cfg.kernel.kind == KernelKind::knn_adjacency) {
    if (graph == nullptr) {
      own_graph = knn_graph(data.features, cfg.kernel.k_neighbors, cfg.kernel.metric);
      graph = &own_graph;
    } else if (graph->size() != n) {
      throw ValidationError("supplied graph size does not match the dataset");
    }
  }

  TrainResult result;
  const MlpSpec spec = cfg.model_spec(static_cast<int>(data.dim()));
  if (options.initial_model) {
    if (!(options.initial_model->spec == spec)) {
      throw ValidationError("initial model architecture does not match the configuration");
    }
    result.model = *options.initial_model;
  } else {
    result.model = init_mlp(spec, derive_seed(cfg.seed, 0));
    LinearLayer& out = result.model.params.layers.back();
    if (out.weight_norm) {
      out.scale *= cfg.output_init_scale;
    } else {
      out.weight *= cfg.output_init_scale;
    }
  }

  Optimizer optimizer(cfg.optimizer, result.model.params);
  Rng rng(derive_seed(cfg.seed, 1));
  SubsetSampler left_sampler(n);
  SubsetSampler right_sampler(n);
  ClusterMassState mass = ClusterMassState::uniform(cfg.k, cfg.beta);
  const auto bi = static_cast<Eigen::Index>(b);
  const double kl_scale = cfg.gamma / static_cast<double>(2 * b);

  Matrix x(2 * bi, data.features.cols());
  ForwardCache cache;
  auto& records = result.history.records;
  records.reserve(static_cast<std::size_t>(cfg.steps));

  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const auto start = std::chrono::steady_clock::now();
    const auto left_ids = left_sampler.draw(b, rng);
    const auto right_ids = right_sampler.draw(b, rng);

    Matrix w;
    switch (cfg.kernel.kind) {
      case KernelKind::knn_adjacency:
        w = graph_block(*graph, left_ids, right_ids);
        break;
      case KernelKind::exp_cosine:
        w = kernel_block(gather_rows(data.features, left_ids), gather_rows(data.features, right_ids),
                         cfg.kernel, left_ids, right_ids);
        break;
      case KernelKind::label_equality: {
        const auto ll = gather_labels(*data.labels, left_ids);
        const auto lr = gather_labels(*data.labels, right_ids);
        w = label_block(ll, lr, left_ids, right_ids);
        break;
      }
    }

    x.topRows(bi) = gather_rows(data.features, left_ids);
    x.bottomRows(bi) = gather_rows(data.features, right_ids);
    const Matrix p = forward(result.model, x, &cache);
    const Matrix p_left = p.topRows(bi);
    const Matrix p_right = p.bottomRows(bi);
    const Vector batch_mean = p.colwise().mean().transpose();
    mass = update_pbar(mass, batch_mean);

    double lrc = 0.0;
    LrcGradient grad;
    try {
      lrc = lrc_loss(w, p_left, p_right, mass.pbar, cfg.normalize_by_w_norm);
      grad = lrc_grad(w, p_left, p_right, mass.pbar, static_cast<double>(b), cfg.gradient_mode,
                      cfg.normalize_by_w_norm);
    } catch (const CollapseError& e) {
      result.status = TrainStatus::collapsed;
      result.message = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    const KlTerm kl = kl_regularizer(batch_mean, cfg.k);

    LossBreakdown rec;
    rec.step = step;
    rec.lrc = lrc;
    rec.kl = kl.value;
    rec.total = lrc + cfg.gamma * kl.value;
    rec.w_norm = w.sum();
    rec.pbar.assign(mass.pbar.data(), mass.pbar.data() + mass.pbar.size());
    if (!std::isfinite(rec.total)) {
      result.status = TrainStatus::non_finite;
      result.message = "step " + std::to_string(step) + ": non-finite loss";
      break;
    }

    Matrix d_p(2 * bi, cfg.k);
    d_p.topRows(bi) = grad.left;
    d_p.bottomRows(bi) = grad.right;
    d_p.rowwise() += (kl_scale * kl.grad).transpose();

    try {
      const MlpParameters grads = backward(result.model, cache, d_p);
      optimizer.step(result.model.params, grads);
    } catch (const NumericalError& e) {
      result.status = TrainStatus::non_finite;
      result.message = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    records.push_back(std::move(rec));
    result.history.step_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    if (cfg.early_stop) {
      const auto win = static_cast<std::size_t>(cfg.early_stop_window);
      const std::size_t have = records.size();
      if (have >= 2 * win) {
        const double prev = window_mean(records, have - 2 * win, have - win);
        const double cur = window_mean(records, have - win, have);
        if (std::abs(cur - prev) <= cfg.early_stop_tolerance * std::abs(prev)) {
          result.status = TrainStatus::early_stopped;
          result.message = "plateau at step " + std::to_string(step);
          break;
        }
      }
    }
  }
  result.history.final_pbar.assign(mass.pbar.data(), mass.pbar.data() + mass.pbar.size());
  return result;
}

Partition argmax_partition(const Matrix& probabilities) {
  Partition part;
  part.k = static_cast<int>(probabilities.cols());
  part.labels.resize(static_cast<std::size_t>(probabilities.rows()));
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    int best = 0;
    for (Eigen::Index l = 1; l < probabilities.cols(); ++l) {
      if (probabilities(i, l) > probabilities(i, best)) best = static_cast<int>(l);
    }
    part.labels[static_cast<std::size_t>(i)] = best;
  }
  return part;
}

Prediction predict(const MlpModel& model, const Matrix& features) {
  Matrix p = forward(model, features);
  Partition part = argmax_partition(p);
  return Prediction{std::move(part), AssignmentMatrix(std::move(p))};
}

}  // namespace prcut
