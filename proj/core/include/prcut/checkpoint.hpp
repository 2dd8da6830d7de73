#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "prcut/neural_model.hpp"

namespace prcut {

struct Checkpoint {
  MlpModel model;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
};

/// Layout: 8-byte magic "PRCCKPT1", u64 little-endian header length, the JSON
/// header {spec, seed, step, parameter_count}, then every parameter as a
/// little-endian IEEE-754 double in MlpParameters::blocks() order.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace prcut
