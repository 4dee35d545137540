#pragma once

#include <random>
#include <string>

#include "gradcheck.hpp"
#include "oia/data/scene.hpp"
#include "oia/model/config.hpp"

namespace oia::testing {

inline SceneRecord random_scene(const ModelConfig& cfg, std::size_t n, std::uint64_t seed, std::size_t hb = 5,
                                std::size_t wb = 6) {
    std::mt19937_64 rng(seed);
    SceneRecord s;
    s.scene_id = "scene-" + std::to_string(seed);
    s.backbone = random_tensor(rng, ag::Shape{cfg.c_backbone, hb, wb});
    for (std::size_t i = 0; i < n; ++i) s.proposals.push_back(random_tensor(rng, ag::Shape{cfg.c_local, cfg.spatial, cfg.spatial}));
    for (std::size_t i = 0; i < kNumActions; ++i) s.action.set(i, static_cast<int>(rng() % 2));
    for (std::size_t i = 0; i < kNumExplanations; ++i) s.explanation.set(i, static_cast<int>(rng() % 2));
    s.single_action = rng() % kNumActions;
    return s;
}

}  // namespace oia::testing
