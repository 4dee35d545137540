#pragma once

#include <limits>

#include "oia/autograd/tape.hpp"
#include "oia/objectives/labels.hpp"

namespace oia {

// Weight of the explanation term. Infinity means explanation-only training.
inline constexpr double kExplanationOnly = std::numeric_limits<double>::infinity();

// L = L_A + lambda * L_E, each a sum of per-label binary cross entropies.
// lambda == 0 returns L_A alone; lambda == infinity returns L_E alone.
ag::Var multitask_loss(ag::Var action_logits, ag::Var explanation_logits, const ActionLabel& actions,
                       const ExplanationLabel& explanations, double lambda);

// Single-action variant: softmax cross entropy on the action logits against
// one action index, plus lambda * L_E.
ag::Var single_action_loss(ag::Var action_logits, ag::Var explanation_logits, std::size_t action,
                           const ExplanationLabel& explanations, double lambda);

}  // namespace oia
