#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gait/network.hpp"

namespace gait {

// Binary network container, all integers and floats little-endian:
//
//   offset 0   8 bytes  magic "GAITPNET"
//   offset 8   u32      format version (1)
//   offset 12  u32      layer count L
//   then per layer:
//              u32      total width T
//              u32      forward width F
//              u32      activation kind (0 = linear, 1 = leaky-ReLU)
//              u32      reserved, 0
//              f64      leaky-ReLU slope
//              f64[T*T] weight, row-major
//
// See docs/FORMATS.md.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Network& net);
Network decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace gait
