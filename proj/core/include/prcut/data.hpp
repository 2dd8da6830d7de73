#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prcut/error.hpp"
#include "prcut/graph.hpp"

namespace prcut {

/// n x p feature matrix with optional ground-truth labels.
struct Dataset {
  Matrix features;
  std::optional<std::vector<int>> labels;
  std::string name;
  std::string source;

  std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
  /// Number of classes implied by the labels (max id + 1), 0 without labels.
  int label_classes() const;
  /// Throws on non-finite features, label count mismatch or negative labels.
  void validate() const;
};

enum class DataErrorKind {
  io,
  bad_magic,
  truncated,
  count_mismatch,
  ragged_row,
  non_numeric,
  bad_size,
};

/// Malformed dataset input. `kind` tells the failures apart.
class DataError : public ValidationError {
 public:
  DataError(DataErrorKind kind, const std::string& what) : ValidationError(what), kind_(kind) {}
  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049

/// Uncompressed IDX image + label files (MNIST layout); pixels scaled by 1/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Rectangular numeric CSV; labels in the last column when `has_labels`.
Dataset load_csv(const std::string& path, bool has_labels);
Dataset parse_csv(std::string_view text, bool has_labels, const std::string& name = "csv");
/// Writes features (17 significant digits) and, if present, labels last.
void save_csv(const std::string& path, const Dataset& data);

/// Embedding file: "PRCEMB1\0", u32 LE n, u32 LE p, n*p LE float32 row-major,
/// optionally followed by n u32 LE labels.
Dataset load_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const Dataset& data);

enum class SyntheticKind { blobs, two_moons, rings };

std::string_view to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view text);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::blobs;
  std::size_t n = 300;
  double noise = 1.0;
  std::uint64_t seed = 0;
  /// Blobs only: class count, dimension and distance between neighboring
  /// centers (in absolute units).
  int classes = 3;
  int dim = 2;
  double separation = 10.0;
};

/// Blobs: isotropic Gaussians of std `noise`. Centers sit on the scaled
/// simplex vertices (dim >= classes) or on a circle in the first two
/// coordinates, neighboring centers `separation` apart.
/// Two moons: the standard interleaved half circles plus Gaussian noise.
/// Rings: concentric circles of radius 1 and 0.5 plus Gaussian noise.
/// Points are evenly split across classes; deterministic per seed.
Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace prcut
