#include "oia/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "oia/autograd/ops.hpp"
#include "oia/errors.hpp"

namespace oia {

using ag::Shape;
using ag::Tensor;
using ag::Var;

Var ParamBinder::operator()(const Tensor& t) const {
    if (trainable_) return tape_.leaf(const_cast<Tensor&>(t));
    return tape_.leaf(t);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a combined word
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Var global_module_forward(const ParamBinder& bind, Var backbone, const GlobalModuleParams& params,
                          std::size_t spatial) {
    const Shape& s = backbone.shape();
    if (s.size() != 3) throw DimensionError("global module: backbone must be C x H x W, got " + ag::shape_str(s));
    if (s[1] < spatial || s[2] < spatial) {
        throw DimensionError("global module: backbone " + ag::shape_str(s) + " smaller than pooled size " +
                             std::to_string(spatial) + "x" + std::to_string(spatial));
    }
    Var h = ag::relu(ag::conv2d(backbone, bind(params.conv1.weight), bind(params.conv1.bias), 1, 1));
    h = ag::relu(ag::conv2d(h, bind(params.conv2.weight), bind(params.conv2.bias), 1, 1));
    return ag::adaptive_avg_pool2d(h, spatial, spatial);
}

std::vector<Var> build_object_scene_tensors(std::span<const Var> proposals, Var global_map) {
    if (proposals.empty()) throw DimensionError("object-scene tensors: empty scene (N = 0)");
    std::vector<Var> out;
    out.reserve(proposals.size());
    for (const Var& p : proposals) out.push_back(ag::concat_channels(p, global_map));
    return out;
}

Var selector_scores(const ParamBinder& bind, std::span<const Var> object_scene, const SelectorParams& params) {
    if (object_scene.empty()) throw DimensionError("selector: empty scene (N = 0)");
    std::vector<Var> raw;
    raw.reserve(object_scene.size());
    Var w1 = bind(params.conv1.weight), b1 = bind(params.conv1.bias);
    Var w2 = bind(params.conv2.weight), b2 = bind(params.conv2.bias);
    Var w3 = bind(params.conv3.weight), b3 = bind(params.conv3.bias);
    for (const Var& block : object_scene) {
        Var h = ag::relu(ag::conv2d(block, w1, b1));
        h = ag::relu(ag::conv2d(h, w2, b2, 1, 1));
        h = ag::conv2d(h, w3, b3);
        raw.push_back(ag::reshape(ag::adaptive_avg_pool2d(h, 1, 1), Shape{1}));
    }
    return ag::softmax(ag::concat(raw));
}

std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t take = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          // NaN ranks below every number
                          const double sa = std::isnan(scores[a]) ? -kInf : scores[a];
                          const double sb = std::isnan(scores[b]) ? -kInf : scores[b];
                          if (sa != sb) return sa > sb;
                          return a < b;
                      });
    idx.resize(take);
    return idx;
}

namespace {

Var zero_block(ag::Tape& tape, const Shape& shape) { return tape.constant(Tensor(shape, 0.0)); }

}  // namespace

Selection select_top_k(Var scores, std::span<const Var> object_scene, std::size_t k) {
    if (k == 0) throw std::invalid_argument("select_top_k: k must be >= 1");
    if (object_scene.empty()) throw DimensionError("select_top_k: empty scene (N = 0)");
    if (scores.numel() != object_scene.size()) {
        throw DimensionError("select_top_k: " + std::to_string(scores.numel()) + " scores for " +
                             std::to_string(object_scene.size()) + " objects");
    }
    Selection sel;
    sel.indices = top_k_indices(scores.value().values(), k);
    for (std::size_t i : sel.indices) sel.slots.push_back(ag::scale(object_scene[i], ag::pick(scores, i)));
    while (sel.slots.size() < k) sel.slots.push_back(zero_block(scores.tape(), object_scene[0].shape()));
    return sel;
}

HeadOutput head_predict(const ParamBinder& bind, std::span<const Var> slots, const HeadParams& params,
                        std::size_t k) {
    if (slots.size() != k) {
        throw DimensionError("head: expected " + std::to_string(k) + " blocks, got " + std::to_string(slots.size()));
    }
    std::vector<Var> pooled;
    pooled.reserve(slots.size());
    for (const Var& s : slots) {
        const std::size_t c = s.shape()[0];
        pooled.push_back(ag::reshape(ag::adaptive_avg_pool2d(s, 1, 1), Shape{c}));
    }
    Var x = ag::concat(pooled);
    x = ag::relu(ag::linear(x, bind(params.fc1.weight), bind(params.fc1.bias)));
    x = ag::relu(ag::linear(x, bind(params.fc2.weight), bind(params.fc2.bias)));
    Var out = ag::linear(x, bind(params.out.weight), bind(params.out.bias));
    if (out.numel() != kHeadOutputs) {
        throw DimensionError("head: output layer emits " + std::to_string(out.numel()) + " logits, expected 25");
    }
    return {ag::slice(out, 0, kNumActions), ag::slice(out, kNumActions, kHeadOutputs)};
}

namespace {

void check_scene(const SceneRecord& scene, const ModelConfig& cfg) {
    if (scene.proposals.empty()) throw DimensionError("scene '" + scene.scene_id + "' has no proposals (N = 0)");
    const Shape& b = scene.backbone.shape();
    if (b.size() != 3 || b[0] != cfg.c_backbone) {
        throw DimensionError("scene '" + scene.scene_id + "': backbone " + ag::shape_str(b) + " expected " +
                             std::to_string(cfg.c_backbone) + " channels");
    }
    const Shape want{cfg.c_local, cfg.spatial, cfg.spatial};
    for (std::size_t i = 0; i < scene.proposals.size(); ++i) {
        if (scene.proposals[i].shape() != want) {
            throw DimensionError("scene '" + scene.scene_id + "': proposal " + std::to_string(i) + " is " +
                                 ag::shape_str(scene.proposals[i].shape()) + ", expected " + ag::shape_str(want));
        }
    }
}

Var uniform_scores(ag::Tape& tape, std::size_t n) {
    return tape.constant(Tensor(Shape{n}, 1.0 / static_cast<double>(n)));
}

}  // namespace

ForwardGraph build_forward(const ParamBinder& bind, const SceneRecord& scene, const ForwardOptions& options) {
    const ModelParams& params = bind.params();
    const ModelConfig& cfg = params.config;
    check_scene(scene, cfg);
    ag::Tape& tape = bind.tape();
    const std::size_t n = scene.proposals.size();
    const Shape map_shape{cfg.c_global, cfg.spatial, cfg.spatial};

    ForwardGraph g;
    if (options.ablation == Ablation::LocalOnly) {
        g.global_map = zero_block(tape, map_shape);
    } else {
        g.global_map = global_module_forward(bind, tape.leaf(scene.backbone), params.global, cfg.spatial);
    }

    std::vector<Var> slots;
    if (options.ablation == Ablation::GlobalOnly) {
        Var block = ag::concat_channels(zero_block(tape, Shape{cfg.c_local, cfg.spatial, cfg.spatial}), g.global_map);
        slots.assign(cfg.k, block);
        g.scores = uniform_scores(tape, n);
    } else {
        std::vector<Var> proposals;
        proposals.reserve(n);
        for (const Tensor& p : scene.proposals) proposals.push_back(tape.leaf(p));
        std::vector<Var> blocks = build_object_scene_tensors(proposals, g.global_map);

        if (options.ablation == Ablation::RandomSelector) {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::mt19937_64 rng(options.selection_seed);
            std::shuffle(order.begin(), order.end(), rng);
            order.resize(std::min(cfg.k, n));
            for (std::size_t i : order) slots.push_back(blocks[i]);
            while (slots.size() < cfg.k) slots.push_back(zero_block(tape, blocks[0].shape()));
            g.selected_indices = std::move(order);
            g.scores = uniform_scores(tape, n);
        } else {
            g.scores = selector_scores(bind, blocks, params.selector);
            Selection sel = select_top_k(g.scores, blocks, cfg.k);
            slots = std::move(sel.slots);
            g.selected_indices = std::move(sel.indices);
        }
    }

    HeadOutput head = head_predict(bind, slots, params.head, cfg.k);
    g.action_logits = head.action_logits;
    g.explanation_logits = head.explanation_logits;
    return g;
}

namespace {

template <std::size_t N>
void copy_to(std::array<double, N>& dst, const Tensor& src) {
    std::copy(src.values().begin(), src.values().end(), dst.begin());
}

}  // namespace

ForwardOutput model_forward(const SceneRecord& scene, const ModelParams& params, const ForwardOptions& options) {
    ag::Tape tape;
    ParamBinder bind(tape, params);
    ForwardGraph g = build_forward(bind, scene, options);
    ForwardOutput out;
    copy_to(out.action_logits, g.action_logits.value());
    copy_to(out.explanation_logits, g.explanation_logits.value());
    out.selector_scores.assign(g.scores.value().values().begin(), g.scores.value().values().end());
    out.selected_indices = std::move(g.selected_indices);
    return out;
}

SingleActionOutput single_action_forward(const SceneRecord& scene, const ModelParams& params,
                                         const ForwardOptions& options) {
    ag::Tape tape;
    ParamBinder bind(tape, params);
    ForwardGraph g = build_forward(bind, scene, options);
    Var probs = ag::softmax(g.action_logits);
    SingleActionOutput out;
    copy_to(out.action_logits, g.action_logits.value());
    copy_to(out.action_probabilities, probs.value());
    copy_to(out.explanation_logits, g.explanation_logits.value());
    // argmax with ties to the lower index
    out.predicted_action = static_cast<std::size_t>(
        std::max_element(out.action_logits.begin(), out.action_logits.end()) - out.action_logits.begin());
    out.selector_scores.assign(g.scores.value().values().begin(), g.scores.value().values().end());
    out.selected_indices = std::move(g.selected_indices);
    return out;
}

std::vector<double> global_map_channel_mean(const SceneRecord& scene, const ModelParams& params, Ablation ablation) {
    const ModelConfig& cfg = params.config;
    const std::size_t s = cfg.spatial;
    std::vector<double> mean(s * s, 0.0);
    if (ablation == Ablation::LocalOnly) return mean;
    ag::Tape tape;
    ParamBinder bind(tape, params);
    const Tensor& backbone = scene.backbone;
    if (backbone.rank() != 3 || backbone.dim(0) != cfg.c_backbone) {
        throw DimensionError("scene '" + scene.scene_id + "': backbone " + ag::shape_str(backbone.shape()) +
                             " expected " + std::to_string(cfg.c_backbone) + " channels");
    }
    Var tg = global_module_forward(bind, tape.leaf(backbone), params.global, s);
    const Tensor& v = tg.value();
    for (std::size_t c = 0; c < cfg.c_global; ++c) {
        for (std::size_t i = 0; i < s * s; ++i) mean[i] += v[c * s * s + i];
    }
    for (double& m : mean) m /= static_cast<double>(cfg.c_global);
    return mean;
}

}  // namespace oia
