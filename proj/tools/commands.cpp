#include "oia/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "oia/cli/grid.hpp"
#include "oia/cli/report.hpp"
#include "oia/data/dataset.hpp"
#include "oia/data/synthetic.hpp"
#include "oia/errors.hpp"
#include "oia/model/model.hpp"
#include "oia/train/checkpoint.hpp"
#include "oia/train/evaluate.hpp"
#include "oia/train/trainer.hpp"

namespace oia::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    return f;
}

// Profile named on the command line, else the dataset manifest's, else "scaled".
ModelConfig resolve_profile(const fs::path& data, const std::string& flag) {
    if (!flag.empty()) return ModelConfig::from_profile(flag);
    const fs::path manifest = data / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        json j;
        try {
            j = json::parse(in);
            return ModelConfig::from_profile(j.at("profile").at("name").get<std::string>());
        } catch (const json::exception& e) {
            throw DataError(manifest.string() + ": " + e.what());
        }
    }
    return ModelConfig::scaled();
}

std::vector<SceneRecord> load_checked(const fs::path& data, const std::string& split, const ModelConfig& cfg,
                                      std::ostream& err) {
    LoadedSplit s = load_split(data, split, cfg);
    for (const auto& w : s.warnings) err << "warning: " << w << "\n";
    return std::move(s.scenes);
}

// ---- gen-data -------------------------------------------------------------

struct GenArgs {
    std::string out;
    std::size_t scenes = 100;
    std::uint64_t seed = 0;
    std::string profile = "scaled";
    double sigma = 0.1;
    std::size_t causal_min = 1, causal_max = 4, distractor_min = 0, distractor_max = 12;
    std::size_t backbone_size = 6;
};

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string join_ids(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s.empty() ? "-" : s;
}

int cmd_gen_data(const GenArgs& a, std::ostream& out) {
    SyntheticConfig cfg;
    cfg.scenes = a.scenes;
    cfg.seed = a.seed;
    cfg.profile = ModelConfig::from_profile(a.profile);
    cfg.sigma = a.sigma;
    cfg.causal_min = a.causal_min;
    cfg.causal_max = a.causal_max;
    cfg.distractor_min = a.distractor_min;
    cfg.distractor_max = a.distractor_max;
    cfg.backbone_size = a.backbone_size;
    const CausalRuleTable rules = CausalRuleTable::standard();
    try {
        cfg.validate(rules);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto scenes = generate_synthetic(cfg, rules);
    auto parts = split_indices(scenes.size(), a.seed);
    const fs::path dir = a.out;
    fs::create_directories(dir);

    json manifest;
    manifest["format_version"] = 1;
    manifest["generator"] = {{"scenes", cfg.scenes},
                             {"seed", cfg.seed},
                             {"sigma", cfg.sigma},
                             {"causal_range", {cfg.causal_min, cfg.causal_max}},
                             {"distractor_range", {cfg.distractor_min, cfg.distractor_max}},
                             {"distractor_types", cfg.distractor_types},
                             {"backbone_size", cfg.backbone_size}};
    const ModelConfig& p = cfg.profile;
    manifest["profile"] = {{"name", a.profile},   {"c_backbone", p.c_backbone}, {"c_local", p.c_local},
                           {"c_global", p.c_global}, {"spatial", p.spatial},       {"k", p.k}};
    json rule_lines = json::array();
    std::string canon = rules.canonical();
    for (std::size_t pos = 0; pos < canon.size();) {
        const auto nl = canon.find('\n', pos);
        rule_lines.push_back(canon.substr(pos, nl - pos));
        pos = nl + 1;
    }
    manifest["rule_table"] = {{"fnv1a64", hex64(rules.hash())}, {"rules", rule_lines}};
    manifest["split_seed"] = a.seed;

    std::ofstream arch = open_out(dir / "archetypes.tsv");
    for (std::size_t s = 0; s < 3; ++s) {
        std::sort(parts[s].begin(), parts[s].end());
        std::vector<SceneRecord> recs;
        for (std::size_t i : parts[s]) recs.push_back(scenes[i].record);
        write_split(dir, kSplitNames[s], recs, p.c_local);
        manifest["splits"][kSplitNames[s]] = recs.size();
    }
    for (const SyntheticScene& sc : scenes) {
        arch << sc.record.scene_id << '\t' << join_ids(sc.causal) << '\t' << join_ids(sc.distractors) << '\n';
    }
    open_out(dir / "manifest.json") << manifest.dump(2) << "\n";
    out << "wrote " << scenes.size() << " scenes to " << dir.string() << " (train " << parts[0].size() << ", val "
        << parts[1].size() << ", test " << parts[2].size() << ")\n";
    return kOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string data, out, profile, lambda = "1", ablation = "full";
    std::size_t k = 0, epochs = 50, batch_size = 16;
    std::uint64_t seed = 0;
    double lr = 1e-3;
    bool decoupled = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    TrainRunConfig cfg;
    cfg.model = resolve_profile(a.data, a.profile);
    if (a.k) cfg.model.k = a.k;
    cfg.lambda = parse_lambda(a.lambda);
    cfg.model.lambda = cfg.lambda;
    cfg.ablation = parse_ablation(a.ablation);
    cfg.seed = a.seed;
    cfg.schedule.total_epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.schedule.base_lr = a.lr;
    cfg.adam.decoupled = a.decoupled;
    if (!(a.lr > 0.0)) throw UsageError("--lr must be positive");
    if (a.epochs == 0) throw UsageError("--epochs must be >= 1");
    if (a.batch_size == 0) throw UsageError("--batch-size must be >= 1");

    const auto train_split = load_checked(a.data, "train", cfg.model, err);
    const auto val_split = load_checked(a.data, "val", cfg.model, err);
    if (train_split.empty()) throw DataError("training split of " + a.data + " is empty");
    if (val_split.empty()) err << "warning: empty validation split; metrics columns will be blank\n";

    const fs::path dir = a.out;
    fs::create_directories(dir);
    std::ofstream log = open_out(dir / "log.csv");
    log << kLogHeader << "\n";
    out << kLogHeader << "\n";
    TrainResult r = train(train_split, val_split, cfg, [&](const EpochLog& row) {
        const std::string line = format_log_row(row, cfg.lambda);
        log << line << "\n" << std::flush;
        out << line << "\n" << std::flush;
    });
    save_checkpoint(dir / "checkpoint.oiac", {r.final_params, cfg.ablation, cfg.lambda, cfg.seed});
    save_checkpoint(dir / "best.oiac", {r.best_params, cfg.ablation, cfg.lambda, cfg.seed});
    err << "best validation epoch " << r.best_epoch << "; checkpoints in " << dir.string() << "\n";
    return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string data, checkpoint, split = "test", dump_predictions, dump_global_map;
};

std::string pgm(const std::vector<double>& map, std::size_t side) {
    const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
    std::string s = "P2\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double v = map[r * side + c];
            const long px = *hi > *lo ? std::lround(255.0 * (v - *lo) / (*hi - *lo)) : 0;
            s += (c ? " " : "") + std::to_string(px);
        }
        s += "\n";
    }
    return s;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const auto scenes = load_checked(a.data, a.split, ck.params.config, err);
    if (scenes.empty()) throw DataError("split '" + a.split + "' of " + a.data + " has no usable scenes");
    const EvalOptions opts{ck.ablation, eval_selection_seed(ck.seed), 0};
    const auto preds = predict(scenes, ck.params, opts);
    const MetricsBundle m = score_predictions(scenes, preds, ck.ablation);

    if (!a.dump_predictions.empty()) {
        std::ofstream f = open_out(a.dump_predictions);
        for (const auto& p : preds) f << format_prediction(p) << "\n";
    }
    if (!a.dump_global_map.empty()) {
        const fs::path dir = a.dump_global_map;
        fs::create_directories(dir);
        for (const SceneRecord& s : scenes) {
            open_out(dir / (s.scene_id + ".pgm")) << pgm(global_map_channel_mean(s, ck.params, ck.ablation),
                                                         ck.params.config.spatial);
        }
    }
    const ReportRow row{std::string(ablation_name(ck.ablation)), ck.lambda, ck.params.config.k, m, seconds_since(t0)};
    const std::vector<std::string> header(kReportColumns.begin(), kReportColumns.end());
    out << csv_line(header) << "\n" << csv_line(report_cells(row)) << "\n";
    return kOk;
}

// ---- ablate ---------------------------------------------------------------

struct AblateArgs {
    std::string grid, data, out, profile, split = "test";
    std::vector<std::uint64_t> seeds{0};
    std::size_t epochs = 50, batch_size = 16;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
    const ModelConfig base = resolve_profile(a.data, a.profile);
    std::vector<GridRow> rows;
    try {
        rows = grid_rows(a.grid, base.k);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (a.seeds.empty()) throw UsageError("--seeds must list at least one seed");
    if (a.epochs == 0) throw UsageError("--epochs must be >= 1");
    const auto train_split = load_checked(a.data, "train", base, err);
    const auto val_split = load_checked(a.data, "val", base, err);
    const auto eval_split = load_checked(a.data, a.split, base, err);
    if (train_split.empty() || eval_split.empty()) throw DataError("dataset " + a.data + " has an empty split");

    // One job per (grid row, seed); results land in fixed slots.
    const std::size_t n_jobs = rows.size() * a.seeds.size();
    std::vector<ReportRow> results(n_jobs);
    std::vector<std::exception_ptr> errors(n_jobs);
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
        while (true) {
            std::size_t j;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next == n_jobs) return;
                j = next++;
            }
            const GridRow& g = rows[j / a.seeds.size()];
            const std::uint64_t seed = a.seeds[j % a.seeds.size()];
            try {
                const auto t0 = std::chrono::steady_clock::now();
                TrainRunConfig cfg;
                cfg.model = base;
                cfg.model.k = g.k;
                cfg.model.lambda = g.lambda;
                cfg.lambda = g.lambda;
                cfg.ablation = g.ablation;
                cfg.seed = seed;
                cfg.schedule.total_epochs = a.epochs;
                cfg.batch_size = a.batch_size;
                cfg.eval_threads = 1;
                const TrainResult r = train(train_split, val_split, cfg);
                const MetricsBundle m =
                    evaluate(eval_split, r.best_params, {g.ablation, eval_selection_seed(seed), 1});
                results[j] = {g.name, g.lambda, g.k, m, seconds_since(t0)};
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(worker_count(0), n_jobs);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    CsvTable agg{{kReportColumns.begin(), kReportColumns.end()}, {}};
    CsvTable runs = agg;
    runs.header.insert(runs.header.begin() + 1, "seed");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::span<const ReportRow> group(results.data() + r * a.seeds.size(), a.seeds.size());
        agg.rows.push_back(aggregate_cells(group));
        for (std::size_t s = 0; s < group.size(); ++s) {
            auto cells = report_cells(group[s]);
            cells.insert(cells.begin() + 1, std::to_string(a.seeds[s]));
            runs.rows.push_back(std::move(cells));
        }
    }
    if (!a.out.empty()) {
        const fs::path dir = a.out;
        open_out(dir / (a.grid + ".csv")) << to_csv(agg);
        open_out(dir / (a.grid + ".md")) << to_markdown(agg);
        open_out(dir / (a.grid + "-runs.csv")) << to_csv(runs);
    }
    out << to_markdown(agg);
    return kOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
    std::string in, format = "markdown";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    std::ifstream f(a.in);
    if (!f) throw DataError("cannot open " + a.in);
    const CsvTable t = in_report_order(parse_csv(f, a.in));
    out << (a.format == "csv" ? to_csv(t) : to_markdown(t));
    return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Object-induced action prediction: data generation, training, evaluation and ablations", "oia"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen-data", "Generate a synthetic planted-causality dataset");
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--scenes", gen.scenes, "Number of scenes")->check(CLI::PositiveNumber);
    g->add_option("--seed", gen.seed, "Generator and split seed");
    g->add_option("--profile", gen.profile, "Channel profile (scaled or full)");
    g->add_option("--sigma", gen.sigma, "Feature noise standard deviation");
    g->add_option("--causal-min", gen.causal_min);
    g->add_option("--causal-max", gen.causal_max);
    g->add_option("--distractor-min", gen.distractor_min);
    g->add_option("--distractor-max", gen.distractor_max);
    g->add_option("--backbone-size", gen.backbone_size, "Backbone map height and width");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a model on a dataset directory");
    t->add_option("--data", tr.data, "Dataset directory")->required();
    t->add_option("--out", tr.out, "Run directory for checkpoints and log.csv")->required();
    t->add_option("--lambda", tr.lambda, "Explanation loss weight (number or inf)");
    t->add_option("--k", tr.k, "Number of selected objects (default: profile)");
    t->add_option("--ablation", tr.ablation, "full, local-only, global-only, random-selector or single-action");
    t->add_option("--seed", tr.seed, "Run seed");
    t->add_option("--epochs", tr.epochs, "Training epochs");
    t->add_option("--batch-size", tr.batch_size, "Scenes per optimizer step");
    t->add_option("--lr", tr.lr, "Initial learning rate");
    t->add_option("--profile", tr.profile, "Channel profile (default: dataset manifest)");
    t->add_flag("--decoupled-weight-decay", tr.decoupled, "Apply weight decay to parameters instead of gradients");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
    e->add_option("--data", ev.data, "Dataset directory")->required();
    e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
    e->add_option("--split", ev.split, "train, val or test");
    e->add_option("--dump-predictions", ev.dump_predictions, "Write per-scene predictions to this file");
    e->add_option("--dump-global-map", ev.dump_global_map, "Write per-scene mean global maps (PGM) to this directory");

    AblateArgs ab;
    auto* x = app.add_subcommand("ablate", "Run an experiment grid over seeds");
    x->add_option("--grid", ab.grid, "lambda-sweep, branch-ablation or single-vs-multi")->required();
    x->add_option("--data", ab.data, "Dataset directory")->required();
    x->add_option("--seeds", ab.seeds, "Comma-separated run seeds")->delimiter(',');
    x->add_option("--epochs", ab.epochs, "Training epochs per run");
    x->add_option("--batch-size", ab.batch_size, "Scenes per optimizer step");
    x->add_option("--split", ab.split, "Split used for the reported metrics");
    x->add_option("--profile", ab.profile, "Channel profile (default: dataset manifest)");
    x->add_option("--out", ab.out, "Directory for <grid>.csv, <grid>.md and <grid>-runs.csv");

    ReportArgs rp;
    auto* r = app.add_subcommand("report", "Render a CSV table as markdown");
    r->add_option("--in", rp.in, "CSV file")->required();
    r->add_option("--format", rp.format, "markdown or csv")->check(CLI::IsMember({"markdown", "csv"}));

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (g->parsed()) return cmd_gen_data(gen, out);
        if (t->parsed()) return cmd_train(tr, out, err);
        if (e->parsed()) return cmd_eval(ev, out, err);
        if (x->parsed()) return cmd_ablate(ab, out, err);
        return cmd_report(rp, out);
    } catch (const NumericError& ex) {
        err << "numeric abort: " << ex.what() << "\n";
        return kNumericAbort;
    } catch (const DataError& ex) {
        err << "data error: " << ex.what() << "\n";
        return kDataError;
    } catch (const DimensionError& ex) {
        err << "data error: " << ex.what() << "\n";
        return kDataError;
    } catch (const fs::filesystem_error& ex) {
        err << "data error: " << ex.what() << "\n";
        return kDataError;
    } catch (const std::invalid_argument& ex) {
        err << "usage error: " << ex.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kInternal;
    }
}

}  // namespace oia::cli
