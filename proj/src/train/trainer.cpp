#include "oia/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oia/autograd/ops.hpp"
#include "oia/errors.hpp"
#include "oia/model/model.hpp"
#include "oia/objectives/loss.hpp"
#include "oia/train/evaluate.hpp"

namespace oia {

std::string format_log_row(const EpochLog& row, double lambda) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.8f", row.epoch, row.lr, row.train_loss);
    std::string s = buf;
    if (!row.val) return s + ",-,-,-,-";
    const MetricsBundle& m = *row.val;
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f", m.action_mf1, m.action_f1_all);
    s += buf;
    if (lambda == 0.0) return s + ",-,-";
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f", m.explanation_mf1, m.explanation_f1_all);
    return s + buf;
}

std::uint64_t eval_selection_seed(std::uint64_t run_seed) { return mix_seed(run_seed, 4); }

double selection_score(const MetricsBundle& m, double lambda) {
    return std::isinf(lambda) ? m.explanation_f1_all : m.action_f1_all;
}

namespace {

ag::Var scene_loss(const ForwardGraph& g, const SceneRecord& s, const TrainRunConfig& cfg) {
    if (cfg.ablation == Ablation::SingleAction) {
        return single_action_loss(g.action_logits, g.explanation_logits, s.single_action, s.explanation, cfg.lambda);
    }
    return multitask_loss(g.action_logits, g.explanation_logits, s.action, s.explanation, cfg.lambda);
}

}  // namespace

TrainResult train(std::span<const SceneRecord> train_split, std::span<const SceneRecord> val_split,
                  const TrainRunConfig& config, const EpochCallback& on_epoch) {
    if (train_split.empty()) throw std::invalid_argument("train: empty training split");
    if (config.batch_size == 0) throw std::invalid_argument("train: batch size must be >= 1");
    if (!(config.lambda >= 0.0)) throw std::invalid_argument("train: lambda must be >= 0");

    TrainResult result{ModelParams::init(config.model, mix_seed(config.seed, 1)), {}, 0, {}};
    ModelParams& params = result.final_params;
    params.set_requires_grad(true);
    AdamState adam{config.adam, {}, {}, 0};
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 2));
    const std::uint64_t select_seed = mix_seed(config.seed, 3);
    const EvalOptions eval_opts{config.ablation, eval_selection_seed(config.seed), config.eval_threads};

    std::vector<std::size_t> order(train_split.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double best = -1.0;
    std::uint64_t draw = 0;

    for (std::size_t epoch = 0; epoch < config.schedule.total_epochs; ++epoch) {
        const double lr = lr_at_epoch(epoch, config.schedule);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            params.zero_grad();
            for (std::size_t b = start; b < end; ++b) {
                const SceneRecord& scene = train_split[order[b]];
                ag::Tape tape;
                ParamBinder bind(tape, params);
                ForwardGraph g = build_forward(bind, scene, {config.ablation, mix_seed(select_seed, draw++)});
                ag::Var loss = scene_loss(g, scene, config);
                const double value = loss.value()[0];
                if (!std::isfinite(value)) {
                    throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " on scene '" +
                                       scene.scene_id + "'");
                }
                loss_sum += value;
                tape.backward(ag::mul(loss, inv_batch));
            }
            adam_step(params, adam, lr);
        }

        EpochLog row{epoch, lr, loss_sum / static_cast<double>(order.size()), std::nullopt};
        if (!val_split.empty()) {
            row.val = evaluate(val_split, params, eval_opts);
            const double score = selection_score(*row.val, config.lambda);
            if (score > best) {
                best = score;
                result.best_epoch = epoch;
                result.best_params = params;
            }
        }
        result.log.push_back(row);
        if (on_epoch) on_epoch(row);
    }
    if (best < 0.0) {
        result.best_params = params;
        result.best_epoch = config.schedule.total_epochs ? config.schedule.total_epochs - 1 : 0;
    }
    result.best_params.set_requires_grad(false);
    params.set_requires_grad(false);
    return result;
}

}  // namespace oia
