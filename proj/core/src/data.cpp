#include "prcut/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "prcut/random.hpp"

namespace prcut {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  }
  return v;
}

std::uint32_t read_le32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

void write_le32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (std::size_t i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b.data(), 4);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int Dataset::label_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

void Dataset::validate() const {
  if (!features.allFinite()) throw ValidationError("dataset '" + name + "' has non-finite features");
  if (labels) {
    if (labels->size() != size()) {
      throw ValidationError("dataset '" + name + "': label count does not match rows");
    }
    for (int l : *labels) {
      if (l < 0) throw ValidationError("dataset '" + name + "': negative label");
    }
  }
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const std::string images = read_file(images_path);
  const std::string labels = read_file(labels_path);
  if (images.size() < 16) throw DataError(DataErrorKind::truncated, "IDX images header truncated");
  if (labels.size() < 8) throw DataError(DataErrorKind::truncated, "IDX labels header truncated");
  if (read_be32(images, 0) != kIdxImagesMagic) {
    throw DataError(DataErrorKind::bad_magic, "IDX images: expected magic 2051");
  }
  if (read_be32(labels, 0) != kIdxLabelsMagic) {
    throw DataError(DataErrorKind::bad_magic, "IDX labels: expected magic 2049");
  }
  const std::size_t count = read_be32(images, 4);
  const std::size_t rows = read_be32(images, 8);
  const std::size_t cols = read_be32(images, 12);
  const std::size_t label_count = read_be32(labels, 4);
  if (count != label_count) {
    throw DataError(DataErrorKind::count_mismatch,
                    "IDX image count " + std::to_string(count) + " != label count " +
                        std::to_string(label_count));
  }
  const std::size_t pixels = rows * cols;
  if (images.size() != 16 + count * pixels) {
    throw DataError(DataErrorKind::truncated, "IDX images: payload size does not match header");
  }
  if (labels.size() != 8 + count) {
    throw DataError(DataErrorKind::truncated, "IDX labels: payload size does not match header");
  }
  Dataset data;
  data.name = "idx";
  data.source = images_path;
  data.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < pixels; ++j) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<unsigned char>(images[16 + i * pixels + j]) / 255.0;
    }
  }
  std::vector<int> ids(count);
  for (std::size_t i = 0; i < count; ++i) ids[i] = static_cast<unsigned char>(labels[8 + i]);
  data.labels = std::move(ids);
  return data;
}

Dataset parse_csv(std::string_view text, bool has_labels, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> values;
    while (true) {
      const std::size_t comma = line.find(',');
      const std::string_view cell = trim(line.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError(DataErrorKind::non_numeric,
                        "CSV row " + std::to_string(line_no) + ": non-numeric cell '" +
                            std::string(cell) + "'");
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (rows.empty()) {
      width = values.size();
    } else if (values.size() != width) {
      throw DataError(DataErrorKind::ragged_row,
                      "CSV row " + std::to_string(line_no) + ": expected " +
                          std::to_string(width) + " cells, got " +
                          std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError(DataErrorKind::bad_size, "CSV '" + name + "' has no rows");
  const std::size_t feature_cols = has_labels ? width - 1 : width;
  if (feature_cols == 0) throw DataError(DataErrorKind::bad_size, "CSV has no feature columns");

  Dataset data;
  data.name = name;
  data.source = name;
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(feature_cols));
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < feature_cols; ++j) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    if (has_labels) {
      const double raw = rows[i].back();
      if (raw < 0 || raw != std::floor(raw) || raw > 1e9) {
        throw DataError(DataErrorKind::non_numeric,
                        "CSV row " + std::to_string(i + 1) + ": label must be a nonnegative integer");
      }
      labels.push_back(static_cast<int>(raw));
    }
  }
  if (has_labels) data.labels = std::move(labels);
  data.validate();
  return data;
}

Dataset load_csv(const std::string& path, bool has_labels) {
  Dataset data = parse_csv(read_file(path), has_labels, path);
  data.source = path;
  return data;
}

void save_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataErrorKind::io, "cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(data.features(i, j));
    }
    if (data.labels) out << ',' << (*data.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw DataError(DataErrorKind::io, "failed writing '" + path + "'");
}

Dataset load_embeddings(const std::string& path) {
  const std::string bytes = read_file(path);
  static constexpr char kMagic[8] = {'P', 'R', 'C', 'E', 'M', 'B', '1', '\0'};
  if (bytes.size() < 16) throw DataError(DataErrorKind::truncated, "embedding header truncated");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DataError(DataErrorKind::bad_magic, "embedding file: bad magic");
  }
  const std::uint64_t n = read_le32(bytes, 8);
  const std::uint64_t p = read_le32(bytes, 12);
  const std::uint64_t body = 16 + 4 * n * p;
  const bool with_labels = bytes.size() == body + 4 * n;
  if (bytes.size() != body && !with_labels) {
    throw DataError(DataErrorKind::bad_size,
                    "embedding file size " + std::to_string(bytes.size()) +
                        " matches neither 16 + 4np nor 16 + 4np + 4n");
  }
  Dataset data;
  data.name = "embeddings";
  data.source = path;
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < p; ++j) {
      const std::uint32_t raw = read_le32(bytes, 16 + 4 * (i * p + j));
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(std::bit_cast<float>(raw));
    }
  }
  if (with_labels && n > 0) {
    std::vector<int> labels(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint32_t raw = read_le32(bytes, body + 4 * i);
      if (raw > static_cast<std::uint32_t>(INT32_MAX)) {
        throw DataError(DataErrorKind::bad_size, "embedding label out of range");
      }
      labels[i] = static_cast<int>(raw);
    }
    data.labels = std::move(labels);
  }
  data.validate();
  return data;
}

void save_embeddings(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataErrorKind::io, "cannot open '" + path + "' for writing");
  out.write("PRCEMB1\0", 8);
  write_le32(out, static_cast<std::uint32_t>(data.features.rows()));
  write_le32(out, static_cast<std::uint32_t>(data.features.cols()));
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      write_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(data.features(i, j))));
    }
  }
  if (data.labels) {
    for (int l : *data.labels) write_le32(out, static_cast<std::uint32_t>(l));
  }
  if (!out) throw DataError(DataErrorKind::io, "failed writing '" + path + "'");
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::blobs: return "blobs";
    case SyntheticKind::two_moons: return "two-moons";
    case SyntheticKind::rings: return "rings";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(std::string_view text) {
  if (text == "blobs") return SyntheticKind::blobs;
  if (text == "two-moons" || text == "moons") return SyntheticKind::two_moons;
  if (text == "rings" || text == "circles") return SyntheticKind::rings;
  throw ValidationError("unknown synthetic kind '" + std::string(text) + "'");
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 10) throw ValidationError("synthetic datasets need n >= 10");
  if (!(spec.noise >= 0.0)) throw ValidationError("noise must be >= 0");
  Rng rng(spec.seed);
  Dataset data;
  data.name = std::string(to_string(spec.kind));
  data.source = "synthetic";
  std::vector<int> labels(spec.n);
  const auto n = static_cast<Eigen::Index>(spec.n);

  if (spec.kind == SyntheticKind::blobs) {
    if (spec.classes < 1 || spec.dim < 1) throw ValidationError("blobs need classes, dim >= 1");
    if (spec.dim < 2 && spec.classes > 2) {
      throw ValidationError("blobs with more than two classes need dim >= 2");
    }
    const int k = spec.classes;
    Matrix centers = Matrix::Zero(k, spec.dim);
    if (spec.dim >= k) {
      for (int c = 0; c < k; ++c) centers(c, c) = spec.separation / std::numbers::sqrt2;
    } else if (k == 2) {
      centers(1, 0) = spec.separation;
    } else {
      const double radius = spec.separation / (2.0 * std::sin(std::numbers::pi / k));
      for (int c = 0; c < k; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / k;
        centers(c, 0) = radius * std::cos(angle);
        centers(c, 1) = radius * std::sin(angle);
      }
    }
    data.features.resize(n, spec.dim);
    std::size_t row = 0;
    for (int c = 0; c < k; ++c) {
      const std::size_t count = spec.n / static_cast<std::size_t>(k) +
                                (static_cast<std::size_t>(c) < spec.n % static_cast<std::size_t>(k) ? 1 : 0);
      for (std::size_t t = 0; t < count; ++t, ++row) {
        for (int d = 0; d < spec.dim; ++d) {
          data.features(static_cast<Eigen::Index>(row), d) = centers(c, d) + spec.noise * rng.normal();
        }
        labels[row] = c;
      }
    }
  } else {
    const std::size_t outer = spec.n / 2;
    const std::size_t inner = spec.n - outer;
    data.features.resize(n, 2);
    auto place = [&](std::size_t row, double x, double y, int label) {
      data.features(static_cast<Eigen::Index>(row), 0) = x + spec.noise * rng.normal();
      data.features(static_cast<Eigen::Index>(row), 1) = y + spec.noise * rng.normal();
      labels[row] = label;
    };
    if (spec.kind == SyntheticKind::two_moons) {
      for (std::size_t t = 0; t < outer; ++t) {
        const double a = std::numbers::pi * static_cast<double>(t) / static_cast<double>(outer - 1);
        place(t, std::cos(a), std::sin(a), 0);
      }
      for (std::size_t t = 0; t < inner; ++t) {
        const double a = std::numbers::pi * static_cast<double>(t) / static_cast<double>(inner - 1);
        place(outer + t, 1.0 - std::cos(a), 0.5 - std::sin(a), 1);
      }
    } else {
      for (std::size_t t = 0; t < outer; ++t) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(outer);
        place(t, std::cos(a), std::sin(a), 0);
      }
      for (std::size_t t = 0; t < inner; ++t) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(inner);
        place(outer + t, 0.5 * std::cos(a), 0.5 * std::sin(a), 1);
      }
    }
  }
  data.labels = std::move(labels);
  return data;
}

}  // namespace prcut
