#include "prcut/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "prcut/error.hpp"

namespace prcut {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'R', 'C', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
    throw ValidationError("checkpoint truncated");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  const MlpModel& model = checkpoint.model;
  nlohmann::ordered_json header;
  header["spec"]["layer_widths"] = model.spec.layer_widths;
  header["spec"]["weight_norm_first_last"] = model.spec.weight_norm_first_last;
  header["seed"] = checkpoint.seed;
  header["step"] = checkpoint.step;
  header["parameter_count"] = model.params.parameter_count();
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (auto block : model.params.blocks()) {
    for (double v : block) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw ValidationError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ValidationError("not a prcut checkpoint (bad magic)");
  }
  const std::uint64_t length = get_u64(in);
  if (length > (1u << 24)) throw ValidationError("checkpoint header too large");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw ValidationError("checkpoint header truncated");
  }
  Checkpoint ckpt;
  std::size_t expected = 0;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.model.spec.layer_widths = header.at("spec").at("layer_widths").get<std::vector<int>>();
    ckpt.model.spec.weight_norm_first_last =
        header.at("spec").at("weight_norm_first_last").get<bool>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.step = header.at("step").get<std::int64_t>();
    expected = header.at("parameter_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint header: ") + e.what());
  }
  // Shape the parameters from the model spec, then overwrite every value.
  ckpt.model = init_mlp(ckpt.model.spec, 0);
  if (ckpt.model.params.parameter_count() != expected) {
    throw ValidationError("checkpoint parameter count does not match its spec");
  }
  for (auto block : ckpt.model.params.blocks()) {
    for (double& v : block) v = std::bit_cast<double>(get_u64(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError("checkpoint has trailing bytes");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace prcut
