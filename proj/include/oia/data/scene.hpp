#pragma once

#include <string>
#include <vector>

#include "oia/autograd/tensor.hpp"
#include "oia/objectives/labels.hpp"

namespace oia {

// One scene: the frozen backbone map, N per-proposal feature blocks and the
// action/explanation annotation.
struct SceneRecord {
    std::string scene_id;
    ag::Tensor backbone;                 // c_backbone x H_b x W_b
    std::vector<ag::Tensor> proposals;   // N blocks of c_local x spatial x spatial
    ActionLabel action;
    ExplanationLabel explanation;
    // Single-action ground truth, used only by the single-action variant.
    std::size_t single_action = 0;
};

}  // namespace oia
