#pragma once
// Dataset directory layout:
//   <dir>/features/<scene_id>.oiaf   one feature file per scene
//   <dir>/<split>.tsv                one annotation file per split

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oia/data/scene.hpp"
#include "oia/model/config.hpp"

namespace oia {

inline constexpr std::array<const char*, 3> kSplitNames = {"train", "val", "test"};

// Seeded partition of [0, n) into train/val/test. Train and val sizes are
// floor(n * fraction); test takes the rest.
std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n, std::uint64_t seed,
                                                      std::array<double, 3> fractions = {0.7, 0.1, 0.2});

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& scene_id);

void write_split(const std::filesystem::path& dir, const std::string& split, std::span<const SceneRecord> scenes,
                 std::size_t c_local);

struct LoadedSplit {
    std::vector<SceneRecord> scenes;
    std::vector<std::string> warnings;  // skipped scenes
};

// Reads the annotation file and each scene's features, validating against
// config. Empty scenes are skipped with a warning; any other invalid record
// raises DataError.
LoadedSplit load_split(const std::filesystem::path& dir, const std::string& split, const ModelConfig& config);

}  // namespace oia
