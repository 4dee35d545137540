#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oia/cli/commands.hpp"
#include "oia/cli/grid.hpp"
#include "oia/cli/report.hpp"
#include "oia/data/dataset.hpp"
#include "oia/data/feature_file.hpp"
#include "oia/data/synthetic.hpp"

using namespace oia;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "oia");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("oia_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> cells_of(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string c; std::getline(in, c, sep);) out.push_back(c);
    return out;
}

// Shared small dataset, generated once.
const fs::path& small_data() {
    static const fs::path dir = [] {
        fs::path d = scratch("small");
        EXPECT_EQ(run({"gen-data", "--out", d.string(), "--scenes", "40", "--seed", "3"}).code, 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST(GenData, DeterministicFilesAndDefaultSplit) {
    const fs::path a = scratch("gen_a"), b = scratch("gen_b");
    ASSERT_EQ(run({"gen-data", "--out", a.string(), "--scenes", "100", "--seed", "7"}).code, 0);
    ASSERT_EQ(run({"gen-data", "--out", b.string(), "--scenes", "100", "--seed", "7"}).code, 0);
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        EXPECT_EQ(slurp(entry.path()), slurp(b / fs::relative(entry.path(), a))) << entry.path();
    }
    EXPECT_EQ(files, 100u + 5u);
    const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    EXPECT_EQ(m["splits"]["train"], 70);
    EXPECT_EQ(m["splits"]["val"], 10);
    EXPECT_EQ(m["splits"]["test"], 20);
    EXPECT_EQ(m["generator"]["seed"], 7);
}

TEST(GenData, ManifestRuleHashMatchesStandardTable) {
    const auto m = nlohmann::json::parse(slurp(small_data() / "manifest.json"));
    std::string text;
    for (const auto& line : m["rule_table"]["rules"]) text += line.get<std::string>() + "\n";
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) h = (h ^ c) * 1099511628211ULL;
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    EXPECT_EQ(m["rule_table"]["fnv1a64"], hex);
    EXPECT_EQ(text, CausalRuleTable::standard().canonical());
}

TEST(GenData, UnwritableOutputFails) {
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "file";
    const Result r = run({"gen-data", "--out", (blocker / "sub").string(), "--scenes", "5"});
    EXPECT_EQ(r.code, cli::kDataError);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run({"gen-data", "--out", scratch("x").string(), "--scenes", "5", "--sigma", "-1"}).code, cli::kUsage);
}

TEST(Train, WritesArtifactsAndMarksExplanationsAbsentAtLambdaZero) {
    const fs::path data = scratch("ten");
    ASSERT_EQ(run({"gen-data", "--out", data.string(), "--scenes", "10", "--seed", "1"}).code, 0);
    const fs::path out = scratch("ten_run");
    const Result r = run({"train", "--data", data.string(), "--out", out.string(), "--epochs", "1", "--lambda", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "checkpoint.oiac"));
    EXPECT_TRUE(fs::exists(out / "log.csv"));
    const auto log = lines_of(slurp(out / "log.csv"));
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0], "epoch,lr,train_loss,action_mF1,action_F1all,expl_mF1,expl_F1all");
    const auto cells = cells_of(log[1]);
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_EQ(cells[5], "-");
    EXPECT_EQ(cells[6], "-");
    EXPECT_NE(cells[3], "-");
}

TEST(Train, LogsAreBitIdenticalAcrossRuns) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const fs::path& out : {a, b}) {
        ASSERT_EQ(run({"train", "--data", small_data().string(), "--out", out.string(), "--epochs", "2", "--seed", "5"}).code, 0);
    }
    EXPECT_EQ(slurp(a / "log.csv"), slurp(b / "log.csv"));
    EXPECT_EQ(slurp(a / "checkpoint.oiac"), slurp(b / "checkpoint.oiac"));
}

TEST(Eval, ReproducesFinalLoggedValidationMetrics) {
    for (const char* ablation : {"full", "random-selector", "single-action"}) {
        const fs::path out = scratch(std::string("consistency_") + ablation);
        ASSERT_EQ(run({"train", "--data", small_data().string(), "--out", out.string(), "--epochs", "3", "--ablation",
                       ablation})
                      .code,
                  0);
        const auto last = cells_of(lines_of(slurp(out / "log.csv")).back());
        const Result r = run({"eval", "--data", small_data().string(), "--checkpoint", (out / "checkpoint.oiac").string(),
                              "--split", "val"});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto rows = lines_of(r.out);
        ASSERT_EQ(rows.size(), 2u);
        const auto cells = cells_of(rows[1]);
        EXPECT_EQ(cells[0], ablation);
        // action_mF1, action_F1all, expl_mF1, expl_F1all
        for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::stod(cells[7 + i]), std::stod(last[3 + i]), 5e-5) << ablation;
    }
}

TEST(Eval, DumpsRastersAndPredictions) {
    const fs::path out = scratch("dumps");
    ASSERT_EQ(run({"train", "--data", small_data().string(), "--out", out.string(), "--epochs", "1"}).code, 0);
    const Result r = run({"eval", "--data", small_data().string(), "--checkpoint", (out / "checkpoint.oiac").string(),
                          "--dump-predictions", (out / "pred.tsv").string(), "--dump-global-map", (out / "maps").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto preds = lines_of(slurp(out / "pred.tsv"));
    ASSERT_FALSE(preds.empty());
    for (const auto& line : preds) {
        const auto f = cells_of(line, '\t');
        ASSERT_EQ(f.size(), 4u);
        EXPECT_EQ(f[1].size(), 4u);
        EXPECT_EQ(f[2].size(), 21u);
        EXPECT_EQ(f[1].find_first_not_of("01"), std::string::npos);
        EXPECT_EQ(f[2].find_first_not_of("01"), std::string::npos);
        const auto sel = cells_of(f[3]);
        EXPECT_GE(sel.size(), 1u);
        EXPECT_LE(sel.size(), 2u);
        for (const auto& s : sel) EXPECT_NE(s.find(':'), std::string::npos);
        const fs::path map = out / "maps" / (f[0] + ".pgm");
        ASSERT_TRUE(fs::exists(map));
        std::istringstream pgm(slurp(map));
        std::string magic;
        int w, h, maxv;
        pgm >> magic >> w >> h >> maxv;
        EXPECT_EQ(magic, "P2");
        EXPECT_EQ(w, 3);
        EXPECT_EQ(h, 3);
        EXPECT_EQ(maxv, 255);
        int count = 0, v;
        while (pgm >> v) {
            EXPECT_GE(v, 0);
            EXPECT_LE(v, 255);
            ++count;
        }
        EXPECT_EQ(count, 9);
    }
}

TEST(Eval, MismatchedDimensionsAreADataError) {
    const fs::path out = scratch("mismatch_run");
    ASSERT_EQ(run({"train", "--data", small_data().string(), "--out", out.string(), "--epochs", "1"}).code, 0);
    const fs::path other = scratch("mismatch_data");
    SyntheticConfig cfg;
    cfg.scenes = 3;
    cfg.profile.c_local = 8;
    std::vector<SceneRecord> recs;
    for (auto& s : generate_synthetic(cfg)) recs.push_back(s.record);
    write_split(other, "test", recs, 8);
    const Result r = run({"eval", "--data", other.string(), "--checkpoint", (out / "checkpoint.oiac").string()});
    EXPECT_EQ(r.code, cli::kDataError);
    EXPECT_NE(r.err.find("expected 16, actual 8"), std::string::npos) << r.err;
}

TEST(ExitCodes, UsageDataNumeric) {
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "--data", "x"}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "--data", small_data().string(), "--out", scratch("u").string(), "--lambda", "-2"}).code,
              cli::kUsage);
    EXPECT_EQ(run({"train", "--data", small_data().string(), "--out", scratch("u").string(), "--ablation", "bogus"}).code,
              cli::kUsage);
    EXPECT_EQ(run({"train", "--data", scratch("missing").string(), "--out", scratch("u").string()}).code, cli::kDataError);
    EXPECT_EQ(run({"--help"}).code, cli::kOk);

    // A divergent learning rate drives the parameters to infinity.
    const Result r = run({"train", "--data", small_data().string(), "--out", scratch("diverge").string(), "--epochs", "3",
                          "--lr", "1e300", "--batch-size", "4"});
    EXPECT_EQ(r.code, cli::kNumericAbort) << r.err;
    EXPECT_NE(r.err.find("non-finite loss"), std::string::npos);
}

TEST(Ablate, GridRowsAndUnknownGrid) {
    const auto sweep = grid_rows("lambda-sweep", 2);
    ASSERT_EQ(sweep.size(), 5u);
    const double want[] = {0.0, 0.01, 0.1, 1.0};
    for (int i = 0; i < 4; ++i) EXPECT_EQ(sweep[static_cast<std::size_t>(i)].lambda, want[i]);
    EXPECT_TRUE(std::isinf(sweep[4].lambda));
    std::vector<std::string> names;
    for (const auto& r : grid_rows("branch-ablation", 2)) names.push_back(r.name);
    EXPECT_EQ(names, (std::vector<std::string>{"local-only", "global-only", "random-selector", "top-5", "top-10"}));
    EXPECT_EQ(grid_rows("single-vs-multi", 2).size(), 2u);
    const Result r = run({"ablate", "--grid", "nope", "--data", small_data().string()});
    EXPECT_EQ(r.code, cli::kUsage);
    for (const auto& g : grid_names()) EXPECT_NE(r.err.find(g), std::string::npos);
}

TEST(Ablate, LambdaSweepTableIsDeterministic) {
    const fs::path a = scratch("abl_a"), b = scratch("abl_b");
    for (const fs::path& out : {a, b}) {
        const Result r = run({"ablate", "--grid", "lambda-sweep", "--data", small_data().string(), "--seeds", "1,2",
                              "--epochs", "1", "--out", out.string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    auto strip_wall = [](const std::string& csv) {
        std::string s;
        for (const auto& line : lines_of(csv)) s += line.substr(0, line.rfind(',')) + "\n";
        return s;
    };
    const std::string csv = slurp(a / "lambda-sweep.csv");
    EXPECT_EQ(strip_wall(csv), strip_wall(slurp(b / "lambda-sweep.csv")));
    const auto rows = lines_of(csv);
    ASSERT_EQ(rows.size(), 6u);
    const char* lambdas[] = {"0", "0.01", "0.1", "1", "inf"};
    for (int i = 0; i < 5; ++i) EXPECT_EQ(cells_of(rows[static_cast<std::size_t>(i) + 1])[1], lambdas[i]);
    EXPECT_EQ(cells_of(rows[1])[10], "-");
    EXPECT_NE(cells_of(rows[2])[7].find("±"), std::string::npos);
    EXPECT_EQ(lines_of(slurp(a / "lambda-sweep-runs.csv")).size(), 11u);
}

TEST(Report, MarkdownPreservesNumeralsVerbatim) {
    const fs::path dir = scratch("report");
    fs::create_directories(dir);
    const std::string csv =
        "config,lambda,k,F,S,L,R,action_mF1,action_F1all,expl_mF1,expl_F1all,wall_seconds\n"
        "lambda=1,1,10,0.829,0.781,0.630,0.634,0.718,0.734,0.208,0.422,12.50\n"
        "lambda=0,0,10,0.783,0.758,0.419,0.568,0.632,0.675,-,-,3.0\n";
    std::ofstream(dir / "t.csv") << csv;
    const Result md = run({"report", "--in", (dir / "t.csv").string()});
    ASSERT_EQ(md.code, 0) << md.err;
    const auto lines = lines_of(md.out);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "| config | lambda | k | F | S | L | R | action_mF1 | action_F1all | expl_mF1 | expl_F1all | wall_seconds |");
    // Parse markdown cells back and compare with the CSV.
    const auto csv_lines = lines_of(csv);
    for (std::size_t i = 1; i < csv_lines.size(); ++i) {
        std::vector<std::string> back;
        for (auto& c : cells_of(lines[i + 1], '|')) {
            const auto b = c.find_first_not_of(' '), e = c.find_last_not_of(' ');
            if (b != std::string::npos) back.push_back(c.substr(b, e - b + 1));
        }
        EXPECT_EQ(back, cells_of(csv_lines[i]));
    }
    const Result round = run({"report", "--in", (dir / "t.csv").string(), "--format", "csv"});
    EXPECT_EQ(round.out, csv);
}

TEST(Report, EmptyInputReorderAndMalformed) {
    const fs::path dir = scratch("report2");
    fs::create_directories(dir);
    std::ofstream(dir / "empty.csv") << "";
    const Result e = run({"report", "--in", (dir / "empty.csv").string()});
    ASSERT_EQ(e.code, 0);
    EXPECT_EQ(lines_of(e.out).size(), 2u);
    EXPECT_EQ(cells_of(lines_of(e.out)[0], '|').size(), 13u);

    std::ofstream(dir / "perm.csv") << "k,config,lambda,F,S,L,R,action_mF1,action_F1all,expl_mF1,expl_F1all,wall_seconds\n"
                                       "2,x,1,a,b,c,d,e,f,g,h,i\n";
    const Result p = run({"report", "--in", (dir / "perm.csv").string(), "--format", "csv"});
    EXPECT_EQ(lines_of(p.out)[1], "x,1,2,a,b,c,d,e,f,g,h,i");

    std::ofstream(dir / "bad.csv") << "a,b\n1,2\n1,2,3\n";
    const Result b = run({"report", "--in", (dir / "bad.csv").string()});
    EXPECT_EQ(b.code, cli::kDataError);
    EXPECT_NE(b.err.find("bad.csv:3"), std::string::npos) << b.err;
}
