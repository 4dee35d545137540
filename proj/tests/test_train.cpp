#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oia/data/synthetic.hpp"
#include "oia/errors.hpp"
#include "oia/objectives/loss.hpp"
#include "oia/train/checkpoint.hpp"
#include "oia/train/evaluate.hpp"
#include "oia/train/optimizer.hpp"
#include "oia/train/trainer.hpp"

using namespace oia;
using ag::Shape;
using ag::Tensor;

namespace {

std::vector<SceneRecord> synthetic_records(std::size_t n, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.scenes = n;
    cfg.seed = seed;
    std::vector<SceneRecord> out;
    for (auto& s : generate_synthetic(cfg)) out.push_back(std::move(s.record));
    return out;
}

bool params_identical(const ModelParams& a, const ModelParams& b) {
    const auto ta = a.tensors(), tb = b.tensors();
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i]->shape() != tb[i]->shape()) return false;
        if (!std::equal(ta[i]->values().begin(), ta[i]->values().end(), tb[i]->values().begin())) return false;
    }
    return true;
}

// Textbook Adam on the scalar objective 0.5 * theta^2, written out step by step.
std::vector<double> reference_adam_trace(double theta, int steps, double lr, double wd) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double m = 0, v = 0, p1 = 1, p2 = 1;
    std::vector<double> trace;
    for (int t = 1; t <= steps; ++t) {
        const double g = theta + wd * theta;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        p1 *= b1;
        p2 *= b2;
        theta = theta - lr * (m / (1 - p1)) / (std::sqrt(v / (1 - p2)) + eps);
        trace.push_back(theta);
    }
    return trace;
}

TrainRunConfig quick_config(std::size_t epochs) {
    TrainRunConfig cfg;
    cfg.schedule.total_epochs = epochs;
    cfg.eval_threads = 1;
    return cfg;
}

}  // namespace

TEST(Schedule, StepDecayValues) {
    const Schedule s;
    EXPECT_EQ(lr_at_epoch(0, s), 1e-3);
    EXPECT_EQ(lr_at_epoch(9, s), 1e-3);
    EXPECT_EQ(lr_at_epoch(10, s), 1e-4);
    EXPECT_EQ(lr_at_epoch(20, s), 1e-5);
    EXPECT_EQ(lr_at_epoch(30, s), 1e-6);
    EXPECT_EQ(lr_at_epoch(40, s), 1e-7);
    EXPECT_EQ(lr_at_epoch(49, s), 1e-7);
    EXPECT_THROW(lr_at_epoch(50, s), std::out_of_range);
}

TEST(Adam, FirstStepClosedForm) {
    AdamState st;
    st.config.weight_decay = 0.0;
    std::vector<double> theta{0.0};
    const std::vector<double> g{1.0};
    std::vector<std::span<double>> p{theta};
    std::vector<std::span<const double>> gr{g};
    adam_step(p, gr, st, 0.001);
    EXPECT_DOUBLE_EQ(theta[0], -0.001 / (1.0 + 1e-8));
    EXPECT_EQ(st.t, 1u);
}

TEST(Adam, ZeroGradientZeroDecayIsNoOp) {
    AdamState st;
    st.config.weight_decay = 0.0;
    std::vector<double> theta{0.5, -2.0, 3.0};
    const std::vector<double> g(3, 0.0);
    std::vector<std::span<double>> p{theta};
    std::vector<std::span<const double>> gr{g};
    for (int i = 0; i < 5; ++i) adam_step(p, gr, st, 0.01);
    EXPECT_EQ(theta, (std::vector<double>{0.5, -2.0, 3.0}));
    for (double v : st.v[0]) EXPECT_GE(v, 0.0);
}

TEST(Adam, QuadraticTraceMatchesReference) {
    for (double wd : {0.0, 1e-4}) {
        AdamState st;
        st.config.weight_decay = wd;
        std::vector<double> theta{1.0};
        const auto ref = reference_adam_trace(1.0, 10, 1e-3, wd);
        for (int t = 0; t < 10; ++t) {
            const std::vector<double> g{theta[0]};
            std::vector<std::span<double>> p{theta};
            std::vector<std::span<const double>> gr{g};
            adam_step(p, gr, st, 1e-3);
            EXPECT_NEAR(theta[0], ref[static_cast<std::size_t>(t)], 1e-12);
        }
    }
}

TEST(Adam, ShapeMismatchAndDecoupledVariant) {
    AdamState st;
    std::vector<double> theta{1.0, 2.0};
    const std::vector<double> g{1.0};
    std::vector<std::span<double>> p{theta};
    std::vector<std::span<const double>> gr{g};
    EXPECT_THROW(adam_step(p, gr, st, 1e-3), DimensionError);

    AdamState coupled, decoupled;
    coupled.config.weight_decay = decoupled.config.weight_decay = 0.1;
    decoupled.config.decoupled = true;
    std::vector<double> a{1.0}, b{1.0};
    const std::vector<double> g1{0.5};
    std::vector<std::span<double>> pa{a}, pb{b};
    std::vector<std::span<const double>> gg{g1};
    adam_step(pa, gg, coupled, 0.01);
    adam_step(pb, gg, decoupled, 0.01);
    EXPECT_NEAR(b[0], 1.0 - 0.01 * (0.5 / (0.5 + 1e-8) + 0.1), 1e-15);
    EXPECT_NE(a[0], b[0]);
}

TEST(Train, SameSeedGivesBitIdenticalRuns) {
    const auto data = synthetic_records(40, 1);
    std::span<const SceneRecord> tr(data.data(), 30), va(data.data() + 30, 10);
    const auto cfg = quick_config(3);
    const TrainResult a = train(tr, va, cfg), b = train(tr, va, cfg);
    ASSERT_EQ(a.log.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(format_log_row(a.log[i], 1.0), format_log_row(b.log[i], 1.0));
        EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    }
    EXPECT_TRUE(params_identical(a.final_params, b.final_params));
    TrainRunConfig other = cfg;
    other.seed = 9;
    EXPECT_FALSE(params_identical(a.final_params, train(tr, va, other).final_params));
}

TEST(Train, LogFollowsScheduleAndInputsStayFrozen) {
    auto data = synthetic_records(24, 2);
    const auto before = data;
    auto cfg = quick_config(12);
    cfg.schedule.decay_every = 4;
    const TrainResult r = train(std::span<const SceneRecord>(data.data(), 20), std::span<const SceneRecord>(data.data() + 20, 4), cfg);
    for (const EpochLog& row : r.log) {
        EXPECT_EQ(row.lr, lr_at_epoch(row.epoch, cfg.schedule));
        EXPECT_TRUE(std::isfinite(row.train_loss));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_FALSE(data[i].backbone.has_grad());
        EXPECT_TRUE(std::equal(data[i].backbone.values().begin(), data[i].backbone.values().end(),
                               before[i].backbone.values().begin()));
        for (std::size_t p = 0; p < data[i].proposals.size(); ++p) {
            EXPECT_FALSE(data[i].proposals[p].has_grad());
            EXPECT_TRUE(std::equal(data[i].proposals[p].values().begin(), data[i].proposals[p].values().end(),
                                   before[i].proposals[p].values().begin()));
        }
    }
}

TEST(Train, OverfitsTwentyScenes) {
    const auto data = synthetic_records(20, 3);
    TrainRunConfig cfg = quick_config(200);
    cfg.schedule.decay_every = 200;
    cfg.batch_size = 4;
    const TrainResult r = train(data, {}, cfg);
    EXPECT_LT(r.log.back().train_loss, 0.1 * r.log.front().train_loss)
        << r.log.front().train_loss << " -> " << r.log.back().train_loss;
}

TEST(Train, ExplanationOnlyLeavesActionsUntrained) {
    const auto data = synthetic_records(400, 4);
    std::span<const SceneRecord> tr(data.data(), 300), va(data.data() + 300, 100);
    auto cfg = quick_config(25);
    cfg.schedule.decay_every = 100;
    cfg.batch_size = 8;
    cfg.lambda = kExplanationOnly;
    const TrainResult expl_only = train(tr, va, cfg);
    cfg.lambda = 0.0;
    const TrainResult action_only = train(tr, va, cfg);
    const MetricsBundle init = evaluate(va, ModelParams::init(cfg.model, mix_seed(cfg.seed, 1)), {});
    const MetricsBundle e = *expl_only.log.back().val;
    const MetricsBundle a = *action_only.log.back().val;
    EXPECT_GT(e.explanation_f1_all, init.explanation_f1_all + 0.1);
    EXPECT_LT(e.action_f1_all, a.action_f1_all - 0.1);
}

TEST(Train, ExplanationOnlyLossSendsNoGradientToActionRows) {
    ModelParams p = ModelParams::init(ModelConfig::scaled(), 5);
    p.set_requires_grad(true);
    const SceneRecord s = synthetic_records(1, 5).front();
    ag::Tape tape;
    ParamBinder bind(tape, p);
    ForwardGraph g = build_forward(bind, s, {});
    tape.backward(multitask_loss(g.action_logits, g.explanation_logits, s.action, s.explanation, kExplanationOnly));
    const std::size_t cols = p.head.out.weight.dim(1);
    for (std::size_t i = 0; i < 4 * cols; ++i) EXPECT_EQ(p.head.out.weight.grad()[i], 0.0);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.head.out.bias.grad()[i], 0.0);
    double rest = 0.0;
    for (std::size_t i = 4 * cols; i < p.head.out.weight.numel(); ++i) rest += std::abs(p.head.out.weight.grad()[i]);
    EXPECT_GT(rest, 0.0);
}

TEST(Train, ErrorsOnEmptySplitAndNaN) {
    EXPECT_THROW(train({}, {}, quick_config(1)), std::invalid_argument);
    auto data = synthetic_records(4, 5);
    data[2].proposals[0][0] = std::nan("");
    try {
        train(data, {}, quick_config(1));
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find(data[2].scene_id), std::string::npos);
    }
    EXPECT_THROW(evaluate({}, ModelParams::init(ModelConfig::scaled(), 0)), std::invalid_argument);
}

TEST(Train, LambdaZeroLogMarksExplanationsAbsent) {
    EpochLog row{3, 1e-4, 0.5, MetricsBundle{}};
    const std::string s = format_log_row(row, 0.0);
    EXPECT_EQ(s.substr(s.size() - 4), ",-,-");
    EXPECT_EQ(std::count(s.begin(), s.end(), ','), 6);
    EXPECT_EQ(std::count(kLogHeader, kLogHeader + std::strlen(kLogHeader), ','), 6);
    EXPECT_EQ(format_log_row(row, 1.0).find('-'), std::string::npos);
}

TEST(Evaluate, OracleAndConstantPredictors) {
    auto data = synthetic_records(10, 6);
    for (auto& s : data) {
        s.action = ActionLabel::from_mask("1111");
        s.explanation = ExplanationLabel::from_mask(std::string(21, '1'));
    }
    ModelParams p = ModelParams::init(ModelConfig::scaled(), 1);
    std::fill(p.head.out.weight.values().begin(), p.head.out.weight.values().end(), 0.0);
    std::fill(p.head.out.bias.values().begin(), p.head.out.bias.values().end(), 50.0);
    const MetricsBundle good = evaluate(data, p);
    for (double f : good.action_f1) EXPECT_EQ(f, 1.0);
    EXPECT_EQ(good.action_mf1, 1.0);
    EXPECT_EQ(good.action_f1_all, 1.0);
    EXPECT_EQ(good.explanation_mf1, 1.0);
    EXPECT_EQ(good.explanation_f1_all, 1.0);
    std::fill(p.head.out.bias.values().begin(), p.head.out.bias.values().end(), -50.0);
    EXPECT_EQ(evaluate(data, p), MetricsBundle{});
}

TEST(Evaluate, BundleMatchesRecomputationFromDump) {
    const auto data = synthetic_records(40, 7);
    const ModelParams p = ModelParams::init(ModelConfig::scaled(), 2);
    const auto preds = predict(data, p, {});
    const MetricsBundle bundle = evaluate(data, p);
    std::vector<int> pa, ta, pe, te;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::istringstream line(format_prediction(preds[i]));
        std::string id, amask, emask, sel;
        std::getline(line, id, '\t');
        std::getline(line, amask, '\t');
        std::getline(line, emask, '\t');
        std::getline(line, sel);
        EXPECT_EQ(id, data[i].scene_id);
        EXPECT_EQ(std::count(sel.begin(), sel.end(), ':'),
                  static_cast<long>(std::min<std::size_t>(2, data[i].proposals.size())));
        for (char c : amask) pa.push_back(c - '0');
        for (char c : emask) pe.push_back(c - '0');
        for (int f : data[i].action.flags()) ta.push_back(f);
        for (int f : data[i].explanation.flags()) te.push_back(f);
    }
    auto micro = [](const std::vector<int>& p, const std::vector<int>& t) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            tp += p[i] && t[i];
            fp += p[i] && !t[i];
            fn += !p[i] && t[i];
        }
        return tp + fp + fn == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    };
    EXPECT_DOUBLE_EQ(bundle.action_f1_all, micro(pa, ta));
    EXPECT_DOUBLE_EQ(bundle.explanation_f1_all, micro(pe, te));
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
    const auto data = synthetic_records(23, 8);
    const ModelParams p = ModelParams::init(ModelConfig::scaled(), 3);
    for (Ablation ab : {Ablation::Full, Ablation::RandomSelector, Ablation::SingleAction}) {
        EvalOptions one{ab, 5, 1}, many{ab, 5, 4};
        EXPECT_EQ(evaluate(data, p, one), evaluate(data, p, many));
    }
}

TEST(Evaluate, SingleActionPredictsExactlyOneAction) {
    const auto data = synthetic_records(30, 9);
    auto cfg = quick_config(2);
    cfg.ablation = Ablation::SingleAction;
    const TrainResult r = train(data, data, cfg);
    for (const ScenePrediction& p : predict(data, r.final_params, {Ablation::SingleAction, 0, 1})) {
        EXPECT_EQ(p.action.count(), 1u);
    }
}

TEST(Checkpoint, RoundTripReproducesMetrics) {
    const auto data = synthetic_records(40, 10);
    std::span<const SceneRecord> tr(data.data(), 30), va(data.data() + 30, 10);
    auto cfg = quick_config(2);
    cfg.lambda = 0.1;
    const TrainResult r = train(tr, va, cfg);
    const Checkpoint ck{r.final_params, cfg.ablation, cfg.lambda, 0x123456789abcdefULL};
    const auto bytes = encode_checkpoint(ck);
    const Checkpoint back = decode_checkpoint(bytes);
    EXPECT_TRUE(params_identical(back.params, r.final_params));
    EXPECT_EQ(back.lambda, 0.1);
    EXPECT_EQ(back.seed, 0x123456789abcdefULL);
    EXPECT_EQ(back.params.config.k, cfg.model.k);
    EXPECT_EQ(evaluate(va, back.params, {cfg.ablation, eval_selection_seed(cfg.seed), 1}), *r.log.back().val);
    EXPECT_EQ(encode_checkpoint(back), bytes);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    EXPECT_THROW(decode_checkpoint(truncated), DataError);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(decode_checkpoint(magic), DataError);
}
