#pragma once
// Object-induced action network: global module, object-scene tensors,
// action-inducing object selector with top-k, and the prediction head.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "oia/autograd/tape.hpp"
#include "oia/data/scene.hpp"
#include "oia/model/params.hpp"
#include "oia/objectives/labels.hpp"

namespace oia {

// Binds parameter tensors onto a tape. Built from a mutable ModelParams the
// leaves accumulate gradient into the parameters; built from a const one they
// are read-only.
class ParamBinder {
public:
    ParamBinder(ag::Tape& tape, ModelParams& params) : tape_(tape), params_(&params), trainable_(true) {}
    ParamBinder(ag::Tape& tape, const ModelParams& params) : tape_(tape), params_(&params), trainable_(false) {}

    ag::Tape& tape() const { return tape_; }
    const ModelParams& params() const { return *params_; }
    ag::Var operator()(const ag::Tensor& t) const;

private:
    ag::Tape& tape_;
    const ModelParams* params_;
    bool trainable_;
};

// conv -> ReLU -> conv -> ReLU -> adaptive average pool to spatial x spatial.
ag::Var global_module_forward(const ParamBinder& bind, ag::Var backbone, const GlobalModuleParams& params,
                              std::size_t spatial);

// Block i = channel concatenation of proposal i and t_g.
std::vector<ag::Var> build_object_scene_tensors(std::span<const ag::Var> proposals, ag::Var global_map);

// Per-object conv stack reduced to one score each, then softmax over objects.
ag::Var selector_scores(const ParamBinder& bind, std::span<const ag::Var> object_scene,
                        const SelectorParams& params);

// Indices of the k largest scores in descending order; ties go to the lower
// index. Returns min(k, N) indices.
std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k);

struct Selection {
    std::vector<ag::Var> slots;           // exactly k blocks
    std::vector<std::size_t> indices;     // min(k, N) selected objects, slot order
};

// Picks the top-k blocks, multiplies each by its score, and pads with zero
// blocks up to k slots.
Selection select_top_k(ag::Var scores, std::span<const ag::Var> object_scene, std::size_t k);

struct HeadOutput {
    ag::Var action_logits;       // 4
    ag::Var explanation_logits;  // 21
};

// Global-average-pool each slot, concatenate in slot order, three FC layers,
// split 4 / 21.
HeadOutput head_predict(const ParamBinder& bind, std::span<const ag::Var> slots, const HeadParams& params,
                        std::size_t k);

struct ForwardOptions {
    Ablation ablation = Ablation::Full;
    // Seeds the random-selector ablation; ignored otherwise.
    std::uint64_t selection_seed = 0;
};

// Tape handles of one forward pass, for training.
struct ForwardGraph {
    ag::Var action_logits;
    ag::Var explanation_logits;
    ag::Var scores;      // N-simplex; uniform when the selector is unused
    ag::Var global_map;  // c_global x spatial x spatial (zeros for local-only)
    std::vector<std::size_t> selected_indices;
};

ForwardGraph build_forward(const ParamBinder& bind, const SceneRecord& scene, const ForwardOptions& options);

struct ForwardOutput {
    std::array<double, kNumActions> action_logits{};
    std::array<double, kNumExplanations> explanation_logits{};
    std::vector<double> selector_scores;
    std::vector<std::size_t> selected_indices;
};

// Inference pass. Throws DimensionError for a scene with no proposals.
ForwardOutput model_forward(const SceneRecord& scene, const ModelParams& params, const ForwardOptions& options = {});

struct SingleActionOutput {
    std::array<double, kNumActions> action_logits{};
    std::array<double, kNumActions> action_probabilities{};
    std::size_t predicted_action = 0;
    std::array<double, kNumExplanations> explanation_logits{};
    std::vector<double> selector_scores;
    std::vector<std::size_t> selected_indices;
};

// Same trunk as model_forward with a softmax over the action logits.
SingleActionOutput single_action_forward(const SceneRecord& scene, const ModelParams& params,
                                         const ForwardOptions& options = {});

// Channel mean of t_g, spatial x spatial row-major.
std::vector<double> global_map_channel_mean(const SceneRecord& scene, const ModelParams& params,
                                            Ablation ablation = Ablation::Full);

// Deterministic 64-bit mix used to derive per-scene selection seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace oia
