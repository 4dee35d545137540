#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oia/data/scene.hpp"
#include "oia/model/model.hpp"
#include "oia/objectives/metrics.hpp"

namespace oia {

struct EvalOptions {
    Ablation ablation = Ablation::Full;
    // Seeds the random-selector ablation per scene.
    std::uint64_t selection_seed = 0;
    // 0 reads OIA_THREADS, falling back to the hardware concurrency.
    std::size_t threads = 0;
};

struct ScenePrediction {
    std::string scene_id;
    ActionLabel action;            // thresholded, or one-hot argmax in single-action mode
    ExplanationLabel explanation;  // thresholded
    std::array<double, kNumActions> action_logits{};
    std::array<double, kNumExplanations> explanation_logits{};
    std::vector<std::size_t> selected;
    std::vector<double> selected_scores;
};

// Truth used for scoring: the multi-label action mask, or the one-hot
// single-action label in single-action mode.
ActionLabel scored_action_truth(const SceneRecord& scene, Ablation ablation);

ScenePrediction predict_scene(const SceneRecord& scene, const ModelParams& params, const EvalOptions& options,
                              std::size_t scene_index);

// Scenes fan out across worker threads; output is in scene order.
std::vector<ScenePrediction> predict(std::span<const SceneRecord> scenes, const ModelParams& params,
                                     const EvalOptions& options);

MetricsBundle score_predictions(std::span<const SceneRecord> scenes, std::span<const ScenePrediction> predictions,
                                Ablation ablation);

// Throws std::invalid_argument on an empty split.
MetricsBundle evaluate(std::span<const SceneRecord> scenes, const ModelParams& params, const EvalOptions& options = {});

// "<id>\t<4-bit mask>\t<21-bit mask>\t<idx>:<score>,..." in slot order.
std::string format_prediction(const ScenePrediction& p);

std::size_t worker_count(std::size_t requested);

}  // namespace oia
