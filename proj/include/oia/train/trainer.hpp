#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oia/data/scene.hpp"
#include "oia/model/params.hpp"
#include "oia/objectives/metrics.hpp"
#include "oia/train/optimizer.hpp"

namespace oia {

struct TrainRunConfig {
    ModelConfig model = ModelConfig::scaled();
    std::uint64_t seed = 0;
    double lambda = 1.0;
    Ablation ablation = Ablation::Full;
    std::size_t batch_size = 16;
    Schedule schedule;  // schedule.total_epochs is the epoch count
    AdamConfig adam;
    // Evaluation worker cap; 0 defers to OIA_THREADS.
    std::size_t eval_threads = 0;
};

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;  // mean per-scene loss over the epoch
    std::optional<MetricsBundle> val;
};

inline constexpr const char* kLogHeader = "epoch,lr,train_loss,action_mF1,action_F1all,expl_mF1,expl_F1all";

// Explanation columns read "-" when lambda is 0 (explanations are not trained).
std::string format_log_row(const EpochLog& row, double lambda);

struct TrainResult {
    ModelParams final_params;
    ModelParams best_params;  // best validation F1_all; equals final_params without a val split
    std::size_t best_epoch = 0;
    std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Scene features are bound read-only; only model parameters are updated.
// Throws std::invalid_argument on an empty training split and NumericError
// on a non-finite loss.
TrainResult train(std::span<const SceneRecord> train_split, std::span<const SceneRecord> val_split,
                  const TrainRunConfig& config, const EpochCallback& on_epoch = {});

// Random-selector seed used when a run evaluates its validation split.
std::uint64_t eval_selection_seed(std::uint64_t run_seed);

// Model-selection score: action F1_all, or explanation F1_all for
// explanation-only runs.
double selection_score(const MetricsBundle& m, double lambda);

}  // namespace oia
