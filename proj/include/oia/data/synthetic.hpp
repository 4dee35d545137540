#pragma once
// Planted-causality scene generator. Each causal archetype contributes one
// explanation bit and set/clear effects on the action bits; distractor
// archetypes carry no label effect.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oia/data/scene.hpp"
#include "oia/model/config.hpp"

namespace oia {

enum class Effect : std::uint8_t { None, Set, Clear };

struct CausalRule {
    std::size_t explanation;
    std::array<Effect, kNumActions> effects;
};

struct CausalRuleTable {
    // Indexed by causal archetype.
    std::vector<CausalRule> rules;

    // 21 archetypes, archetype i raises explanation bit i. Forward cues set F;
    // stop cues set S and clear F; lane blockers clear L/R; lane permits set L/R.
    static CausalRuleTable standard();

    std::size_t size() const { return rules.size(); }

    // Labels implied by a multiset of causal archetypes. A bit is on iff some
    // archetype sets it and none clears it.
    std::pair<ActionLabel, ExplanationLabel> closure(std::span<const std::size_t> archetypes) const;

    // One line per archetype: "<archetype> <explanation> <effects>", effects
    // written as '+', '-' or '.' per action in F,S,L,R order.
    std::string canonical() const;
    // FNV-1a 64 over canonical().
    std::uint64_t hash() const;
};

// Single-action label derived from a multi-action label: S, then F, L, R in
// priority order; a scene with no action bit maps to S.
std::size_t single_action_of(const ActionLabel& a);

struct SyntheticConfig {
    std::size_t scenes = 100;
    std::size_t causal_min = 1;
    std::size_t causal_max = 4;
    std::size_t distractor_min = 0;
    std::size_t distractor_max = 12;
    std::size_t distractor_types = 8;
    double sigma = 0.1;
    ModelConfig profile = ModelConfig::scaled();
    std::size_t backbone_size = 6;  // H_b = W_b
    std::uint64_t seed = 0;
    // Sampling weights over causal archetypes; empty means uniform.
    std::vector<double> prior;

    // Throws std::invalid_argument on empty ranges, negative sigma or a bad prior.
    void validate(const CausalRuleTable& rules) const;
};

struct SyntheticScene {
    SceneRecord record;
    std::vector<std::size_t> causal;       // causal archetype per causal object
    std::vector<std::size_t> distractors;  // distractor type per distractor object
};

// Deterministic in config.seed. Values are binary32-representable so that
// the dataset survives a feature-file round trip unchanged.
std::vector<SyntheticScene> generate_synthetic(const SyntheticConfig& config,
                                               const CausalRuleTable& rules = CausalRuleTable::standard());

std::string synthetic_scene_id(std::size_t index);

}  // namespace oia
