#include "nashae/checkpoint.hpp"

#include <fstream>

#include "nashae/binary_io.hpp"
#include "nashae/errors.hpp"

namespace nashae {
namespace {

constexpr char kMagic[9] = "NASHAENN";
constexpr std::uint32_t kMaxLayerWidth = 1U << 24;

}  // namespace

void write_checkpoint(std::ostream& os, const MlpNetwork& net) {
  using namespace binary;
  write_magic(os, kMagic);
  write_u32(os, kCheckpointVersion);
  write_u32(os, static_cast<std::uint32_t>(net.layers().size()));
  write_u64(os, net.step_count());
  for (const auto& l : net.layers()) {
    write_u32(os, static_cast<std::uint32_t>(l.in_size()));
    write_u32(os, static_cast<std::uint32_t>(l.out_size()));
    write_u32(os, static_cast<std::uint32_t>(l.activation));
  }
  for (const auto& l : net.layers()) {
    write_f64s(os, l.weights.flat());
    write_f64s(os, l.bias);
  }
  for (const auto& l : net.layers()) {
    write_f64s(os, l.adam_m_weights.flat());
    write_f64s(os, l.adam_m_bias);
    write_f64s(os, l.adam_v_weights.flat());
    write_f64s(os, l.adam_v_bias);
  }
  if (!os) throw DataError("checkpoint: write failed");
}

MlpNetwork read_checkpoint(std::istream& is) {
  using namespace binary;
  expect_magic(is, kMagic, "checkpoint");
  const std::uint32_t version = read_u32(is);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = read_u32(is);
  const std::uint64_t steps = read_u64(is);
  if (count == 0 || count > 1024) throw DataError("checkpoint: implausible layer count");
  std::vector<LayerSpec> specs;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t in = read_u32(is);
    const std::uint32_t out = read_u32(is);
    const std::uint32_t tag = read_u32(is);
    if (in == 0 || out == 0 || in > kMaxLayerWidth || out > kMaxLayerWidth || tag > 3) {
      throw DataError("checkpoint: corrupt layer header " + std::to_string(i));
    }
    specs.push_back({in, out, static_cast<Activation>(tag)});
  }
  for (std::size_t i = 1; i < specs.size(); ++i) {
    if (specs[i].in != specs[i - 1].out) {
      throw DataError("checkpoint: layer " + std::to_string(i) + " does not chain with the previous layer");
    }
  }
  MlpNetwork net{std::span<const LayerSpec>(specs)};
  for (auto& l : net.layers()) {
    read_f64s(is, l.weights.flat());
    read_f64s(is, l.bias);
  }
  for (auto& l : net.layers()) {
    read_f64s(is, l.adam_m_weights.flat());
    read_f64s(is, l.adam_m_bias);
    read_f64s(is, l.adam_v_weights.flat());
    read_f64s(is, l.adam_v_bias);
  }
  net.set_step_count(steps);
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const MlpNetwork& net) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, net);
}

MlpNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  try {
    MlpNetwork net = read_checkpoint(is);
    if (is.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint");
    return net;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace nashae
