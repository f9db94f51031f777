#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "nashae/mlp.hpp"

namespace nashae {

// Binary network checkpoint, all integers and doubles little-endian:
//
//   char[8]  magic "NASHAENN"
//   u32      format version (1)
//   u32      layer count L
//   u64      Adam step count
//   L x { u32 in, u32 out, u32 activation tag }   tags: 0 identity, 1 sigmoid, 2 selu, 3 relu
//   L x { f64[out*in] weights (row-major, out x in), f64[out] bias }
//   L x { f64[out*in] m_weights, f64[out] m_bias, f64[out*in] v_weights, f64[out] v_bias }
//
// See docs/formats.md for an annotated example.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const MlpNetwork& net);
MlpNetwork read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const MlpNetwork& net);
MlpNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace nashae
