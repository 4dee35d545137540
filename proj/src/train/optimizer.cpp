#include "oia/train/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "oia/errors.hpp"

namespace oia {

double lr_at_epoch(std::size_t epoch, const Schedule& schedule) {
    if (epoch >= schedule.total_epochs) {
        throw std::out_of_range("epoch " + std::to_string(epoch) + " outside [0, " +
                                std::to_string(schedule.total_epochs) + ")");
    }
    if (schedule.decay_every == 0) throw std::invalid_argument("schedule: decay_every must be >= 1");
    const auto decays = static_cast<int>(epoch / schedule.decay_every);
    return schedule.base_lr / std::pow(schedule.decay_factor, decays);
}

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size()) {
        throw DimensionError("adam: " + std::to_string(params.size()) + " parameters but " +
                             std::to_string(grads.size()) + " gradients");
    }
    if (state.m.empty() && state.t == 0) {
        for (const auto& p : params) {
            state.m.emplace_back(p.size(), 0.0);
            state.v.emplace_back(p.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw DimensionError("adam: parameter count changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size() || params[i].size() != state.m[i].size()) {
            throw DimensionError("adam: shape mismatch for parameter " + std::to_string(i));
        }
    }

    const AdamConfig& c = state.config;
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::span<double> theta = params[i];
        std::span<const double> g = grads[i];
        std::vector<double>& m = state.m[i];
        std::vector<double>& v = state.v[i];
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double gj = c.decoupled ? g[j] : g[j] + c.weight_decay * theta[j];
            m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * gj;
            v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * gj * gj;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            double update = mhat / (std::sqrt(vhat) + c.eps);
            if (c.decoupled) update += c.weight_decay * theta[j];
            theta[j] -= lr * update;
        }
    }
}

void adam_step(ModelParams& params, AdamState& state, double lr) {
    std::vector<std::span<double>> p;
    std::vector<std::span<const double>> g;
    for (auto& nt : params.named_tensors()) {
        if (!nt.tensor->has_grad()) throw std::logic_error("adam: " + nt.name + " has no gradient buffer");
        p.emplace_back(nt.tensor->values());
        g.emplace_back(nt.tensor->grad());
    }
    adam_step(p, g, state, lr);
}

}  // namespace oia
