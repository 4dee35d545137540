#pragma once
// Parameter checkpoint, little-endian like the feature files:
//   "OIAC"  u32 version=1  u32 ablation  f64 lambda  u64 run seed
//   u32 profile length, profile bytes
//   u32 x 10: c_backbone c_local c_global spatial k global_hidden
//             selector_hidden1 selector_hidden2 head_dims[0] head_dims[1]
//   per tensor in ModelParams::named_tensors() order: u32 count, f64 values
// Values are binary64 so a reload reproduces the trained parameters exactly.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "oia/model/params.hpp"

namespace oia {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    Ablation ablation = Ablation::Full;
    double lambda = 1.0;
    std::uint64_t seed = 0;  // training run seed
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws DataError on a malformed or truncated checkpoint.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace oia
