#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oia/model/params.hpp"

namespace oia {

// lr(e) = base_lr / decay_factor^floor(e / decay_every)
struct Schedule {
    std::size_t total_epochs = 50;
    std::size_t decay_every = 10;
    double decay_factor = 10.0;
    double base_lr = 1e-3;
};

// Throws std::out_of_range unless 0 <= epoch < total_epochs.
double lr_at_epoch(std::size_t epoch, const Schedule& schedule);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    // false: L2 term added to the gradient before the moment updates.
    // true: decay applied directly to the parameters, scaled by lr.
    bool decoupled = false;
};

struct AdamState {
    AdamConfig config;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t t = 0;
};

// One update over a list of parameter buffers and their gradients. Moment
// buffers are sized on the first call; later calls must present the same
// shapes or DimensionError is thrown.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr);

// Uses each parameter tensor's accumulated gradient.
void adam_step(ModelParams& params, AdamState& state, double lr);

}  // namespace oia
