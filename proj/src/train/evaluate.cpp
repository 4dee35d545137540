#include "oia/train/evaluate.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "oia/errors.hpp"

namespace oia {

std::size_t worker_count(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("OIA_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ActionLabel scored_action_truth(const SceneRecord& scene, Ablation ablation) {
    if (ablation != Ablation::SingleAction) return scene.action;
    ActionLabel a;
    a.set(scene.single_action, 1);
    return a;
}

ScenePrediction predict_scene(const SceneRecord& scene, const ModelParams& params, const EvalOptions& options,
                              std::size_t scene_index) {
    const ForwardOptions fo{options.ablation, mix_seed(options.selection_seed, scene_index)};
    ScenePrediction p;
    p.scene_id = scene.scene_id;
    std::vector<double> scores;
    if (options.ablation == Ablation::SingleAction) {
        SingleActionOutput out = single_action_forward(scene, params, fo);
        p.action_logits = out.action_logits;
        p.explanation_logits = out.explanation_logits;
        p.action.set(out.predicted_action, 1);
        p.selected = std::move(out.selected_indices);
        scores = std::move(out.selector_scores);
    } else {
        ForwardOutput out = model_forward(scene, params, fo);
        p.action_logits = out.action_logits;
        p.explanation_logits = out.explanation_logits;
        const auto flags = threshold_predict(out.action_logits);
        p.action = ActionLabel::from_span(flags);
        p.selected = std::move(out.selected_indices);
        scores = std::move(out.selector_scores);
    }
    p.explanation = ExplanationLabel::from_span(threshold_predict(p.explanation_logits));
    for (std::size_t i : p.selected) p.selected_scores.push_back(scores[i]);
    return p;
}

std::vector<ScenePrediction> predict(std::span<const SceneRecord> scenes, const ModelParams& params,
                                     const EvalOptions& options) {
    std::vector<ScenePrediction> out(scenes.size());
    const std::size_t workers = std::min(worker_count(options.threads), std::max<std::size_t>(1, scenes.size()));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = predict_scene(scenes[i], params, options, i);
    };
    if (workers <= 1) {
        run(0, scenes.size());
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (scenes.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = std::min(scenes.size(), w * chunk), e = std::min(scenes.size(), b + chunk);
        pool.emplace_back([&, w, b, e] {
            try {
                run(b, e);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

MetricsBundle score_predictions(std::span<const SceneRecord> scenes, std::span<const ScenePrediction> predictions,
                                Ablation ablation) {
    if (scenes.size() != predictions.size()) throw DimensionError("score: prediction count differs from scene count");
    MultiLabelCounter actions(kNumActions), explanations(kNumExplanations);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        actions.add(predictions[i].action.flags(), scored_action_truth(scenes[i], ablation).flags());
        explanations.add(predictions[i].explanation.flags(), scenes[i].explanation.flags());
    }
    return make_bundle(actions, explanations);
}

MetricsBundle evaluate(std::span<const SceneRecord> scenes, const ModelParams& params, const EvalOptions& options) {
    if (scenes.empty()) throw std::invalid_argument("evaluate: empty split");
    const auto preds = predict(scenes, params, options);
    return score_predictions(scenes, preds, options.ablation);
}

std::string format_prediction(const ScenePrediction& p) {
    std::string s = p.scene_id + '\t' + p.action.mask() + '\t' + p.explanation.mask() + '\t';
    char buf[64];
    for (std::size_t i = 0; i < p.selected.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%zu:%.6f", i ? "," : "", p.selected[i], p.selected_scores[i]);
        s += buf;
    }
    return s;
}

}  // namespace oia
