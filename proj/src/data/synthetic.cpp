#include "oia/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "oia/data/feature_file.hpp"
#include "oia/model/model.hpp"

namespace oia {

CausalRuleTable CausalRuleTable::standard() {
    constexpr Effect N = Effect::None, S = Effect::Set, C = Effect::Clear;
    CausalRuleTable t;
    for (std::size_t i = 0; i < kNumExplanations; ++i) {
        std::array<Effect, kNumActions> e{N, N, N, N};
        if (i <= 2) {
            e[0] = S;
        } else if (i <= 8) {
            e[0] = C;
            e[1] = S;
        } else if (i <= 11) {
            e[2] = C;
        } else if (i <= 14) {
            e[2] = S;
        } else if (i <= 17) {
            e[3] = C;
        } else {
            e[3] = S;
        }
        t.rules.push_back({i, e});
    }
    return t;
}

std::pair<ActionLabel, ExplanationLabel> CausalRuleTable::closure(std::span<const std::size_t> archetypes) const {
    std::array<bool, kNumActions> set{}, cleared{};
    ExplanationLabel e;
    for (std::size_t a : archetypes) {
        if (a >= rules.size()) throw std::out_of_range("archetype " + std::to_string(a) + " is not causal");
        const CausalRule& r = rules[a];
        e.set(r.explanation, 1);
        for (std::size_t j = 0; j < kNumActions; ++j) {
            set[j] = set[j] || r.effects[j] == Effect::Set;
            cleared[j] = cleared[j] || r.effects[j] == Effect::Clear;
        }
    }
    ActionLabel act;
    for (std::size_t j = 0; j < kNumActions; ++j) act.set(j, set[j] && !cleared[j] ? 1 : 0);
    return {act, e};
}

std::string CausalRuleTable::canonical() const {
    std::string s;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        s += std::to_string(i) + ' ' + std::to_string(rules[i].explanation) + ' ';
        for (Effect e : rules[i].effects) s += e == Effect::Set ? '+' : e == Effect::Clear ? '-' : '.';
        s += '\n';
    }
    return s;
}

std::uint64_t CausalRuleTable::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t single_action_of(const ActionLabel& a) {
    for (Action x : {Action::Stop, Action::Forward, Action::Left, Action::Right}) {
        if (a[static_cast<std::size_t>(x)]) return static_cast<std::size_t>(x);
    }
    return static_cast<std::size_t>(Action::Stop);
}

void SyntheticConfig::validate(const CausalRuleTable& rules) const {
    if (scenes == 0) throw std::invalid_argument("synthetic: scene count must be >= 1");
    if (causal_min > causal_max) throw std::invalid_argument("synthetic: empty causal-archetype range");
    if (distractor_min > distractor_max) throw std::invalid_argument("synthetic: empty distractor range");
    if (causal_max > 0 && rules.size() == 0) throw std::invalid_argument("synthetic: empty rule table");
    if (distractor_max > 0 && distractor_types == 0) throw std::invalid_argument("synthetic: no distractor types");
    if (causal_max + distractor_max == 0) throw std::invalid_argument("synthetic: scenes would have no objects");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("synthetic: sigma must be >= 0");
    if (backbone_size < profile.spatial) throw std::invalid_argument("synthetic: backbone smaller than pooled size");
    profile.validate();
    if (!prior.empty()) {
        if (prior.size() != rules.size()) throw std::invalid_argument("synthetic: prior needs one weight per archetype");
        double total = 0.0;
        for (double w : prior) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("synthetic: prior weights must be >= 0");
            total += w;
        }
        if (total <= 0.0) throw std::invalid_argument("synthetic: prior weights sum to zero");
    }
}

std::string synthetic_scene_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "syn-%06zu", index);
    return buf;
}

namespace {

struct Embedding {
    std::vector<double> local;     // c_local
    std::vector<double> backbone;  // c_backbone
};

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

}  // namespace

std::vector<SyntheticScene> generate_synthetic(const SyntheticConfig& config, const CausalRuleTable& rules) {
    config.validate(rules);
    const ModelConfig& prof = config.profile;
    const std::size_t n_types = rules.size() + config.distractor_types;
    std::vector<Embedding> emb;
    emb.reserve(n_types);
    for (std::size_t a = 0; a < n_types; ++a) {
        std::mt19937_64 rng(mix_seed(config.seed, 0x10000 + a));
        emb.push_back({gaussian_vector(rng, prof.c_local), gaussian_vector(rng, prof.c_backbone)});
    }

    std::vector<double> weights = config.prior;
    if (weights.empty()) weights.assign(rules.size(), 1.0);

    std::vector<SyntheticScene> out(config.scenes);
    const std::size_t s = prof.spatial, hb = config.backbone_size;
    for (std::size_t idx = 0; idx < config.scenes; ++idx) {
        std::mt19937_64 rng(mix_seed(config.seed, idx));
        std::uniform_int_distribution<std::size_t> n_causal(config.causal_min, config.causal_max);
        std::uniform_int_distribution<std::size_t> n_distract(config.distractor_min, config.distractor_max);
        std::discrete_distribution<std::size_t> pick_causal(weights.begin(), weights.end());
        std::uniform_int_distribution<std::size_t> pick_distract(0, config.distractor_types ? config.distractor_types - 1 : 0);
        std::uniform_int_distribution<std::size_t> cell(0, hb * hb - 1);
        std::normal_distribution<double> noise(0.0, 1.0);

        SyntheticScene& sc = out[idx];
        const std::size_t nc = n_causal(rng);
        const std::size_t nd = n_distract(rng);
        for (std::size_t i = 0; i < nc; ++i) sc.causal.push_back(pick_causal(rng));
        for (std::size_t i = 0; i < nd; ++i) sc.distractors.push_back(pick_distract(rng));

        // Objects in proposal order: causal and distractor types interleaved by shuffle.
        std::vector<std::size_t> objects = sc.causal;
        for (std::size_t d : sc.distractors) objects.push_back(rules.size() + d);
        std::shuffle(objects.begin(), objects.end(), rng);

        SceneRecord& r = sc.record;
        r.scene_id = synthetic_scene_id(idx);
        r.backbone = ag::Tensor(ag::Shape{prof.c_backbone, hb, hb});
        for (std::size_t obj : objects) {
            const std::size_t at = cell(rng);
            for (std::size_t c = 0; c < prof.c_backbone; ++c) r.backbone[c * hb * hb + at] += emb[obj].backbone[c];
        }
        for (double& v : r.backbone.values()) v += config.sigma * noise(rng);
        round_to_float(r.backbone);

        for (std::size_t obj : objects) {
            ag::Tensor block(ag::Shape{prof.c_local, s, s});
            for (std::size_t c = 0; c < prof.c_local; ++c) {
                for (std::size_t i = 0; i < s * s; ++i) {
                    block[c * s * s + i] = emb[obj].local[c] + config.sigma * noise(rng);
                }
            }
            round_to_float(block);
            r.proposals.push_back(std::move(block));
        }
        std::tie(r.action, r.explanation) = rules.closure(sc.causal);
        r.single_action = single_action_of(r.action);
    }
    return out;
}

}  // namespace oia
