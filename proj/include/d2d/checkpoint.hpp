#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "d2d/dnn.hpp"

namespace d2d {

// Binary layout, little-endian throughout:
//   magic "D2DPNET\0" | u32 version | u32 depth | u32 width | u32 input_size |
//   u32 output_size | f64 bn_epsilon | f64 out_min_dbm | f64 out_max_dbm |
//   f64 bn_momentum | per layer: W (row-major), S, Z, running mean,
//   running variance as f64.
inline constexpr char kCheckpointMagic[8] = {'D', '2', 'D', 'P', 'N', 'E', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkParams params;
  BatchNormStats stats;
};

void save_checkpoint(const NetworkParams& params, const BatchNormStats& stats,
                     const std::filesystem::path& path);

// Throws IoError, FormatError (bad magic, trailing bytes), VersionError,
// TruncatedError, or ShapeError when `expected` is given and disagrees.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<NetworkConfig>& expected = std::nullopt);

}  // namespace d2d
