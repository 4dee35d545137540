#include "oia/objectives/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "oia/autograd/ops.hpp"

namespace oia {
namespace {

void check_lambda(double lambda) {
    if (std::isnan(lambda) || lambda < 0.0) {
        throw std::invalid_argument("explanation weight must be >= 0 or infinity, got " + std::to_string(lambda));
    }
}

ag::Var combine(ag::Var action_term, ag::Var explanation_term, double lambda) {
    if (lambda == 0.0) return action_term;
    if (std::isinf(lambda)) return explanation_term;
    return ag::add(action_term, ag::mul(explanation_term, lambda));
}

}  // namespace

ag::Var multitask_loss(ag::Var action_logits, ag::Var explanation_logits, const ActionLabel& actions,
                       const ExplanationLabel& explanations, double lambda) {
    check_lambda(lambda);
    ag::Var la = ag::bce_with_logits(action_logits, actions.flags());
    ag::Var le = ag::bce_with_logits(explanation_logits, explanations.flags());
    return combine(la, le, lambda);
}

ag::Var single_action_loss(ag::Var action_logits, ag::Var explanation_logits, std::size_t action,
                           const ExplanationLabel& explanations, double lambda) {
    check_lambda(lambda);
    ag::Var la = ag::cross_entropy_with_logits(action_logits, action);
    ag::Var le = ag::bce_with_logits(explanation_logits, explanations.flags());
    return combine(la, le, lambda);
}

}  // namespace oia
