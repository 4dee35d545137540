#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace oia {

// Which parts of the architecture are active.
enum class Ablation {
    Full,            // global module + selector + top-k
    LocalOnly,       // t_g replaced by zeros
    GlobalOnly,      // head sees k copies of t_g with zeroed local channels
    RandomSelector,  // k uniformly random proposals, selector unused
    SingleAction,    // full trunk, softmax over the 4 actions
};

std::string_view ablation_name(Ablation a);
Ablation parse_ablation(std::string_view name);

struct ModelConfig {
    std::size_t c_backbone = 2048;
    std::size_t c_local = 2048;
    std::size_t c_global = 256;
    std::size_t spatial = 7;
    std::size_t k = 10;
    std::size_t global_hidden = 512;
    std::size_t selector_hidden1 = 256;
    std::size_t selector_hidden2 = 64;
    std::array<std::size_t, 2> head_dims{1024, 256};
    double lambda = 1.0;
    std::string profile = "full";

    // Full-size layer widths.
    static ModelConfig full();
    // Desk-scale profile: 16/16/8 channels, 3x3 spatial, k = 2.
    static ModelConfig scaled();
    static ModelConfig from_profile(std::string_view name);

    std::size_t object_scene_channels() const { return c_local + c_global; }
    std::size_t head_input() const { return k * object_scene_channels(); }

    // Throws std::invalid_argument on a zero extent.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

inline constexpr std::size_t kHeadOutputs = 25;

}  // namespace oia
