#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "prcut/data.hpp"
#include "prcut/trainer.hpp"

namespace prcut {

enum class DataSourceKind { synthetic, csv, idx, embeddings };

std::string_view to_string(DataSourceKind kind);
DataSourceKind parse_data_source_kind(std::string_view text);

struct DataSource {
  DataSourceKind kind = DataSourceKind::synthetic;
  /// csv / embeddings file, or the IDX image file.
  std::string path;
  /// IDX label file.
  std::string labels_path;
  /// csv only: labels in the last column.
  bool has_labels = true;
  /// Keep a seeded random subset of this many rows (0 keeps everything).
  std::size_t subset = 0;
  std::uint64_t subset_seed = 0;
  SyntheticSpec synthetic;
};

struct MetricsConfig {
  bool enabled = true;
  /// Ratio cut of the predicted partition on a k-NN graph of the features.
  bool rcut = true;
  int rcut_k_neighbors = 10;
  Metric rcut_metric = Metric::euclidean;
};

struct RunConfig {
  DataSource data;
  TrainConfig train;
  MetricsConfig metrics;
  std::string output_dir = "prcut-run";
  bool write_assignments = true;

  void validate() const;
  /// Throws ValidationError when a referenced input file is missing.
  void check_files() const;
};

/// Every field, defaults included, in a stable key order.
nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys and type mismatches throw
/// ValidationError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

Dataset load_dataset(const DataSource& source);

}  // namespace prcut
