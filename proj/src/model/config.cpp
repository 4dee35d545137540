#include "oia/model/config.hpp"

#include <stdexcept>
#include <string>

namespace oia {

std::string_view ablation_name(Ablation a) {
    switch (a) {
        case Ablation::Full: return "full";
        case Ablation::LocalOnly: return "local-only";
        case Ablation::GlobalOnly: return "global-only";
        case Ablation::RandomSelector: return "random-selector";
        case Ablation::SingleAction: return "single-action";
    }
    return "unknown";
}

Ablation parse_ablation(std::string_view name) {
    for (Ablation a : {Ablation::Full, Ablation::LocalOnly, Ablation::GlobalOnly, Ablation::RandomSelector,
                       Ablation::SingleAction}) {
        if (ablation_name(a) == name) return a;
    }
    throw std::invalid_argument("unknown ablation '" + std::string(name) +
                                "' (expected full, local-only, global-only, random-selector, single-action)");
}

ModelConfig ModelConfig::full() { return ModelConfig{}; }

ModelConfig ModelConfig::scaled() {
    ModelConfig c;
    c.c_backbone = 16;
    c.c_local = 16;
    c.c_global = 8;
    c.spatial = 3;
    c.k = 2;
    c.global_hidden = 16;
    c.selector_hidden1 = 16;
    c.selector_hidden2 = 8;
    c.head_dims = {64, 32};
    c.profile = "scaled";
    return c;
}

ModelConfig ModelConfig::from_profile(std::string_view name) {
    if (name == "full") return full();
    if (name == "scaled") return scaled();
    throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected full or scaled)");
}

void ModelConfig::validate() const {
    auto positive = [](std::size_t v, const char* what) {
        if (v == 0) throw std::invalid_argument(std::string("model config: ") + what + " must be >= 1");
    };
    positive(c_backbone, "c_backbone");
    positive(c_local, "c_local");
    positive(c_global, "c_global");
    positive(spatial, "spatial");
    positive(k, "k");
    positive(global_hidden, "global_hidden");
    positive(selector_hidden1, "selector_hidden1");
    positive(selector_hidden2, "selector_hidden2");
    positive(head_dims[0], "head_dims[0]");
    positive(head_dims[1], "head_dims[1]");
    if (!(lambda >= 0.0)) throw std::invalid_argument("model config: lambda must be >= 0 or infinity");
}

}  // namespace oia
