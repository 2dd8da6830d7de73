#include "prcut/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#include "prcut/error.hpp"
#include "prcut/random.hpp"

namespace prcut {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(DataSourceKind kind) {
  switch (kind) {
    case DataSourceKind::synthetic: return "synthetic";
    case DataSourceKind::csv: return "csv";
    case DataSourceKind::idx: return "idx";
    case DataSourceKind::embeddings: return "embeddings";
  }
  return "unknown";
}

DataSourceKind parse_data_source_kind(std::string_view text) {
  if (text == "synthetic") return DataSourceKind::synthetic;
  if (text == "csv") return DataSourceKind::csv;
  if (text == "idx") return DataSourceKind::idx;
  if (text == "embeddings") return DataSourceKind::embeddings;
  throw ValidationError("unknown data source '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  train.validate();
  if (data.kind == DataSourceKind::synthetic && data.synthetic.n < 10) {
    throw ValidationError("synthetic datasets need n >= 10");
  }
  if (metrics.rcut && metrics.rcut_k_neighbors < 1) {
    throw ValidationError("metrics.rcut_k_neighbors must be >= 1");
  }
  if (output_dir.empty()) throw ValidationError("output directory must not be empty");
}

void RunConfig::check_files() const {
  auto need = [](const std::string& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string(what) + " path is not set");
    if (!std::filesystem::is_regular_file(path)) {
      throw ValidationError(std::string(what) + " '" + path + "' does not exist");
    }
  };
  switch (data.kind) {
    case DataSourceKind::synthetic: break;
    case DataSourceKind::csv: need(data.path, "csv file"); break;
    case DataSourceKind::embeddings: need(data.path, "embedding file"); break;
    case DataSourceKind::idx:
      need(data.path, "IDX image file");
      need(data.labels_path, "IDX label file");
      break;
  }
}

ordered_json to_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  const SyntheticSpec& s = cfg.data.synthetic;
  ordered_json j;
  j["data"] = {
      {"source", to_string(cfg.data.kind)},
      {"path", cfg.data.path},
      {"labels_path", cfg.data.labels_path},
      {"has_labels", cfg.data.has_labels},
      {"subset", cfg.data.subset},
      {"subset_seed", cfg.data.subset_seed},
      {"synthetic",
       {{"kind", to_string(s.kind)},
        {"n", s.n},
        {"noise", s.noise},
        {"seed", s.seed},
        {"classes", s.classes},
        {"dim", s.dim},
        {"separation", s.separation}}},
  };
  j["train"] = {
      {"k", t.k},
      {"batch_size", t.batch_size},
      {"steps", t.steps},
      {"beta", t.beta},
      {"gamma", t.gamma},
      {"seed", t.seed},
      {"normalize_by_w_norm", t.normalize_by_w_norm},
      {"gradient_mode", to_string(t.gradient_mode)},
      {"kernel",
       {{"kind", to_string(t.kernel.kind)},
        {"k_neighbors", t.kernel.k_neighbors},
        {"temperature", t.kernel.temperature},
        {"metric", to_string(t.kernel.metric)}}},
      {"optimizer",
       {{"kind", to_string(t.optimizer.kind)},
        {"lr", t.optimizer.lr},
        {"weight_decay", t.optimizer.weight_decay},
        {"beta1", t.optimizer.beta1},
        {"beta2", t.optimizer.beta2},
        {"rms_alpha", t.optimizer.rms_alpha},
        {"eps", t.optimizer.eps}}},
      {"model",
       {{"hidden", t.hidden},
        {"weight_norm", t.weight_norm},
        {"output_init_scale", t.output_init_scale}}},
      {"early_stop",
       {{"enabled", t.early_stop},
        {"window", t.early_stop_window},
        {"tolerance", t.early_stop_tolerance}}},
  };
  j["metrics"] = {
      {"enabled", cfg.metrics.enabled},
      {"rcut", cfg.metrics.rcut},
      {"rcut_k_neighbors", cfg.metrics.rcut_k_neighbors},
      {"rcut_metric", to_string(cfg.metrics.rcut_metric)},
  };
  j["output"] = {
      {"directory", cfg.output_dir},
      {"write_assignments", cfg.write_assignments},
  };
  return j;
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ValidationError("config: unknown key '" + where + "." + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

template <typename Parse, typename T>
void read_enum(const json& obj, const char* key, T& out, Parse parse) {
  if (auto it = obj.find(key); it != obj.end()) out = parse(it->get<std::string>());
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  try {
    reject_unknown(j, "", {"data", "train", "metrics", "output"});
    if (auto d = j.find("data"); d != j.end()) {
      reject_unknown(*d, "data",
                     {"source", "path", "labels_path", "has_labels", "subset", "subset_seed",
                      "synthetic"});
      read_enum(*d, "source", cfg.data.kind, parse_data_source_kind);
      read(*d, "path", cfg.data.path);
      read(*d, "labels_path", cfg.data.labels_path);
      read(*d, "has_labels", cfg.data.has_labels);
      read(*d, "subset", cfg.data.subset);
      read(*d, "subset_seed", cfg.data.subset_seed);
      if (auto s = d->find("synthetic"); s != d->end()) {
        reject_unknown(*s, "data.synthetic",
                       {"kind", "n", "noise", "seed", "classes", "dim", "separation"});
        SyntheticSpec& spec = cfg.data.synthetic;
        read_enum(*s, "kind", spec.kind, parse_synthetic_kind);
        read(*s, "n", spec.n);
        read(*s, "noise", spec.noise);
        read(*s, "seed", spec.seed);
        read(*s, "classes", spec.classes);
        read(*s, "dim", spec.dim);
        read(*s, "separation", spec.separation);
      }
    }
    if (auto t = j.find("train"); t != j.end()) {
      reject_unknown(*t, "train",
                     {"k", "batch_size", "steps", "beta", "gamma", "seed", "normalize_by_w_norm",
                      "gradient_mode", "kernel", "optimizer", "model", "early_stop"});
      TrainConfig& tc = cfg.train;
      read(*t, "k", tc.k);
      read(*t, "batch_size", tc.batch_size);
      read(*t, "steps", tc.steps);
      read(*t, "beta", tc.beta);
      read(*t, "gamma", tc.gamma);
      read(*t, "seed", tc.seed);
      read(*t, "normalize_by_w_norm", tc.normalize_by_w_norm);
      read_enum(*t, "gradient_mode", tc.gradient_mode, parse_gradient_mode);
      if (auto k = t->find("kernel"); k != t->end()) {
        reject_unknown(*k, "train.kernel", {"kind", "k_neighbors", "temperature", "metric"});
        read_enum(*k, "kind", tc.kernel.kind, parse_kernel_kind);
        read(*k, "k_neighbors", tc.kernel.k_neighbors);
        read(*k, "temperature", tc.kernel.temperature);
        read_enum(*k, "metric", tc.kernel.metric, parse_metric);
      }
      if (auto o = t->find("optimizer"); o != t->end()) {
        reject_unknown(*o, "train.optimizer",
                       {"kind", "lr", "weight_decay", "beta1", "beta2", "rms_alpha", "eps"});
        read_enum(*o, "kind", tc.optimizer.kind, parse_optimizer_kind);
        read(*o, "lr", tc.optimizer.lr);
        read(*o, "weight_decay", tc.optimizer.weight_decay);
        read(*o, "beta1", tc.optimizer.beta1);
        read(*o, "beta2", tc.optimizer.beta2);
        read(*o, "rms_alpha", tc.optimizer.rms_alpha);
        read(*o, "eps", tc.optimizer.eps);
      }
      if (auto m = t->find("model"); m != t->end()) {
        reject_unknown(*m, "train.model", {"hidden", "weight_norm", "output_init_scale"});
        read(*m, "hidden", tc.hidden);
        read(*m, "weight_norm", tc.weight_norm);
        read(*m, "output_init_scale", tc.output_init_scale);
      }
      if (auto e = t->find("early_stop"); e != t->end()) {
        reject_unknown(*e, "train.early_stop", {"enabled", "window", "tolerance"});
        read(*e, "enabled", tc.early_stop);
        read(*e, "window", tc.early_stop_window);
        read(*e, "tolerance", tc.early_stop_tolerance);
      }
    }
    if (auto m = j.find("metrics"); m != j.end()) {
      reject_unknown(*m, "metrics", {"enabled", "rcut", "rcut_k_neighbors", "rcut_metric"});
      read(*m, "enabled", cfg.metrics.enabled);
      read(*m, "rcut", cfg.metrics.rcut);
      read(*m, "rcut_k_neighbors", cfg.metrics.rcut_k_neighbors);
      read_enum(*m, "rcut_metric", cfg.metrics.rcut_metric, parse_metric);
    }
    if (auto o = j.find("output"); o != j.end()) {
      reject_unknown(*o, "output", {"directory", "write_assignments"});
      read(*o, "directory", cfg.output_dir);
      read(*o, "write_assignments", cfg.write_assignments);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config file '" + path + "': " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << to_json(cfg).dump(2) << '\n';
}

Dataset load_dataset(const DataSource& source) {
  Dataset data;
  switch (source.kind) {
    case DataSourceKind::synthetic: data = make_synthetic(source.synthetic); break;
    case DataSourceKind::csv: data = load_csv(source.path, source.has_labels); break;
    case DataSourceKind::idx: data = load_idx(source.path, source.labels_path); break;
    case DataSourceKind::embeddings: data = load_embeddings(source.path); break;
  }
  if (source.subset == 0 || source.subset >= data.size()) return data;

  Rng rng(source.subset_seed);
  SubsetSampler sampler(data.size());
  auto ids = sampler.draw(source.subset, rng);
  std::sort(ids.begin(), ids.end());
  Dataset sub;
  sub.name = data.name;
  sub.source = data.source + " (subset " + std::to_string(source.subset) + ")";
  sub.features.resize(static_cast<Eigen::Index>(ids.size()), data.features.cols());
  if (data.labels) sub.labels.emplace(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    sub.features.row(static_cast<Eigen::Index>(r)) =
        data.features.row(static_cast<Eigen::Index>(ids[r]));
    if (data.labels) (*sub.labels)[r] = (*data.labels)[ids[r]];
  }
  return sub;
}

}  // namespace prcut
