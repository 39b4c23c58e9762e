#include "prep/cli.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace prep;
using testutil::TempDir;

namespace {

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    if (out_text)
        *out_text = out.str();
    if (err_text)
        *err_text = err.str();
    return code;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kToyDir = PREP_FIXTURE_DIR "/toy";

} // namespace

TEST_CASE("cli: missing input file exits with code 2") {
    std::string err;
    CHECK(run({"count", "--nodes", "/nonexistent/nodes.tsv", "--edges", "/nonexistent/e.tsv",
               "--metapaths", "/nonexistent/m.tsv", "--out", "/tmp/x"},
              nullptr, &err) == 2);
    CHECK(!err.empty());
}

TEST_CASE("cli: count is deterministic and caches by input fingerprint") {
    TempDir dir;
    const std::string out = dir.at("counts.tsv");
    std::string log;
    REQUIRE(run({"count", "--nodes", kToyDir + "/nodes.tsv", "--edges", kToyDir + "/edges.tsv",
                 "--metapaths", kToyDir + "/metapaths.tsv", "--out", out}, &log) == 0);
    const std::string first = slurp(out);

    REQUIRE(run({"count", "--nodes", kToyDir + "/nodes.tsv", "--edges", kToyDir + "/edges.tsv",
                 "--metapaths", kToyDir + "/metapaths.tsv", "--out", out}, &log) == 0);
    CHECK(log.find("cached") != std::string::npos);
    CHECK(slurp(out) == first);

    REQUIRE(run({"count", "--nodes", kToyDir + "/nodes.tsv", "--edges", kToyDir + "/edges.tsv",
                 "--metapaths", kToyDir + "/metapaths.tsv", "--out", out, "--force"},
                &log) == 0);
    CHECK(log.find("cached") == std::string::npos);
    CHECK(slurp(out) == first); // byte-identical recompute
}

TEST_CASE("cli: fit/score/eval pipeline is deterministic and composable") {
    TempDir dir;
    const std::string counts = dir.at("counts.tsv");
    const std::string model = dir.at("model.ckpt");
    const std::string trace = dir.at("trace.tsv");
    const std::string scores = dir.at("scores.tsv");
    const std::string labels = dir.file(
        "labels.tsv", "mordo\tstephen\t1\tg\nmordo\twong\t0\tg\nstephen\twong\t0\tg\n");
    const std::string report = dir.at("report.json");

    REQUIRE(run({"count", "--nodes", kToyDir + "/nodes.tsv", "--edges", kToyDir + "/edges.tsv",
                 "--metapaths", kToyDir + "/metapaths.tsv", "--out", counts}) == 0);
    REQUIRE(run({"fit", "--counts", counts, "--out", model, "--trace", trace, "--K", "3",
                 "--beta", "0.01", "--seed", "9", "--max-outer", "30"}) == 0);
    const std::string model_bytes = slurp(model);
    REQUIRE(run({"fit", "--counts", counts, "--out", model, "--trace", trace, "--K", "3",
                 "--beta", "0.01", "--seed", "9", "--max-outer", "30"}) == 0);
    CHECK(slurp(model) == model_bytes); // same seed, same bytes

    // Trace is strictly column-formatted.
    std::istringstream tr(slurp(trace));
    std::string line;
    bool saw_header = false;
    int rows = 0;
    while (std::getline(tr, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!saw_header) {
            CHECK(line == "iteration\tobjective\td_eta\td_rho\td_phi\td_theta");
            saw_header = true;
            continue;
        }
        CHECK(split(line, '\t').size() == 6);
        ++rows;
    }
    CHECK(rows >= 1);

    REQUIRE(run({"score", "--counts", counts, "--model", model, "--out", scores}) == 0);
    const std::string score_bytes = slurp(scores);
    REQUIRE(run({"score", "--counts", counts, "--model", model, "--out", scores}) == 0);
    CHECK(slurp(scores) == score_bytes);

    REQUIRE(run({"eval", "--scores", scores, "--labels", labels, "--out", report}) == 0);
    const std::string report_bytes = slurp(report);
    REQUIRE(run({"eval", "--scores", scores, "--labels", labels, "--out", report}) == 0);
    CHECK(slurp(report) == report_bytes);

    // The file pipeline must equal one in-process run of the library calls.
    PathCountTable pc = read_count_table_file(counts);
    Hyperparams h;
    h.num_patterns = 3;
    h.beta = 0.01;
    h.alpha = estimate_alpha(node_total_counts(pc));
    h.seed = 9;
    h.max_outer_iters = 30;
    FitResult fr = fit(pc, h);
    ScoreTable st = prep_score_table(pc, fr.params, h);
    EvalReport rep = evaluate(st, read_label_file(labels));
    nlohmann::ordered_json in_process = report_to_json(rep);
    nlohmann::ordered_json from_files = nlohmann::ordered_json::parse(slurp(report));
    CHECK(from_files["subtasks"] == in_process["subtasks"]);
    CHECK(from_files["aggregates"] == in_process["aggregates"]);
    CHECK(from_files["measure"] == in_process["measure"]);

    // alpha=auto reproduces the standalone estimator in the header.
    const std::string ckpt = slurp(model);
    CHECK(ckpt.find("alpha-source\tauto\t" + fmt_double(h.alpha)) != std::string::npos);
    CHECK(ckpt.find("alpha\t" + fmt_double(h.alpha)) != std::string::npos);
}

TEST_CASE("cli: eval computes baselines with per-subtask weights") {
    TempDir dir;
    const std::string counts = dir.at("counts.tsv");
    const std::string labels = dir.at("labels.tsv");
    REQUIRE(run({"synth", "--out", counts, "--labels-out", labels, "--num-nodes", "40",
                 "--groups", "2", "--metapaths", "3", "--patterns", "2", "--seed", "3",
                 "--pair-frac", "0.6", "--planted-frac", "0.08"}) == 0);
    const std::string report = dir.at("report.json");
    std::string log;
    REQUIRE(run({"eval", "--counts", counts, "--labels", labels, "--measure", "pathsim",
                 "--weighting", "sd", "--out", report}, &log) == 0);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(slurp(report));
    CHECK(j["measure"] == "pathsim-sd");
    CHECK(j["subtasks"].size() == 2);
    CHECK(j["aggregates"].contains("roc_auc"));

    // Global scope also runs.
    REQUIRE(run({"eval", "--counts", counts, "--labels", labels, "--measure", "simrank",
                 "--weight-scope", "global", "--out", report}) == 0);
    CHECK(nlohmann::ordered_json::parse(slurp(report))["measure"] == "simrank-mean");
}

TEST_CASE("cli: baseline and reduction score files") {
    TempDir dir;
    const std::string counts = dir.at("counts.tsv");
    const std::string labels = dir.at("labels.tsv");
    REQUIRE(run({"synth", "--out", counts, "--labels-out", labels, "--num-nodes", "30",
                 "--groups", "2", "--metapaths", "2", "--patterns", "2", "--seed", "5"}) == 0);
    const std::string scores = dir.at("scores.tsv");
    REQUIRE(run({"baseline", "--counts", counts, "--measure", "pathcount", "--weighting",
                 "mean", "--out", scores}) == 0);
    ScoreTable st = read_score_table_file(scores);
    CHECK(st.measure_id == "pathcount-mean");
    CHECK(st.direction == Direction::HigherMoreRelevant);
    CHECK(!st.entries.empty());

    REQUIRE(run({"score", "--counts", counts, "--reduction", "joinsim-like", "--weights",
                 "uniform", "--out", scores}) == 0);
    CHECK(read_score_table_file(scores).measure_id == "joinsim-reduction");
}

TEST_CASE("cli: synth is deterministic; sweep emits a finite table") {
    TempDir dir;
    const std::string counts = dir.at("counts.tsv");
    const std::string labels = dir.at("labels.tsv");
    REQUIRE(run({"synth", "--out", counts, "--labels-out", labels, "--num-nodes", "24",
                 "--groups", "2", "--metapaths", "2", "--patterns", "2", "--seed", "11"}) == 0);
    const std::string counts_bytes = slurp(counts);
    REQUIRE(run({"synth", "--out", counts, "--labels-out", labels, "--num-nodes", "24",
                 "--groups", "2", "--metapaths", "2", "--patterns", "2", "--seed", "11"}) == 0);
    CHECK(slurp(counts) == counts_bytes);

    const std::string table = dir.at("sweep.tsv");
    REQUIRE(run({"sweep", "--counts", counts, "--labels", labels, "--betas",
                 "1e-3,1e-2", "--K", "2", "--seed", "2", "--max-outer", "20", "--out",
                 table}) == 0);
    std::istringstream in(slurp(table));
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("beta\t", 0) == 0)
            continue;
        const auto f = split(line, '\t');
        REQUIRE(f.size() == 4);
        const double v = parse_double(f[3], "sweep value");
        CHECK(std::isfinite(v));
        ++rows;
    }
    CHECK(rows >= 2 * 3); // >= one metric x three schemes per beta
}

TEST_CASE("cli: numerical failure exits with code 1") {
    TempDir dir;
    const std::string counts =
        dir.file("counts.tsv", "a\tb\t1\t2\n");
    // A checkpoint whose eta overflows the score computation.
    const std::string model = dir.file("model.ckpt",
                                       "[meta]\nalpha\t1\nbeta\t0.5\ndelta\t1e-50\n"
                                       "K\t1\nseed\t0\nvariant\tfull\n"
                                       "[eta]\n1\t1e308\n"
                                       "[rho]\na\t1e-300\nb\t1e-300\n"
                                       "[phi]\na\tb\t1\n"
                                       "[theta]\n1\t1\n");
    std::string err;
    CHECK(run({"score", "--counts", counts, "--model", model, "--out", dir.at("s.tsv")},
              nullptr, &err) == 1);
    CHECK(err.find("numerical") != std::string::npos);
}

TEST_CASE("cli: config file sets defaults, flags override") {
    TempDir dir;
    const std::string counts = dir.at("counts.tsv");
    const std::string labels = dir.at("labels.tsv");
    REQUIRE(run({"synth", "--out", counts, "--labels-out", labels, "--num-nodes", "24",
                 "--groups", "2", "--metapaths", "2", "--patterns", "2", "--seed", "13"}) == 0);
    const std::string cfg = dir.file("run.cfg",
                                     "[fit]\nK=2\nbeta=0.05\nseed=21\nmax-outer=12\n");
    const std::string m1 = dir.at("m1.ckpt");
    REQUIRE(run({"--config", cfg, "fit", "--counts", counts, "--out", m1}) == 0);
    CHECK(slurp(m1).find("beta\t0.05") != std::string::npos);
    CHECK(slurp(m1).find("seed\t21") != std::string::npos);

    // Flags override the config file.
    const std::string m2 = dir.at("m2.ckpt");
    REQUIRE(run({"--config", cfg, "fit", "--counts", counts, "--out", m2, "--beta",
                 "0.2"}) == 0);
    CHECK(slurp(m2).find("beta\t0.2") != std::string::npos);
    CHECK(slurp(m2).find("seed\t21") != std::string::npos);
}

TEST_CASE("cli: entity-resolution eval end to end") {
    TempDir dir;
    // Two names; "big" has two entities (sizes 3 and 1), "solo" is skipped.
    std::string nodes, edges;
    for (int m = 0; m < 6; ++m)
        nodes += "m" + std::to_string(m) + "\tauthor\n";
    nodes += "p0\tpaper\np1\tpaper\n";
    auto wire = [&](const std::string& a, const std::string& p) {
        edges += a + "\t" + p + "\twrites\n" + p + "\t" + a + "\twrites\n";
    };
    wire("m0", "p0");
    wire("m1", "p0");
    wire("m2", "p1");
    wire("m3", "p0");
    wire("m4", "p1");
    wire("m5", "p1");
    const std::string nodes_f = dir.file("nodes.tsv", nodes);
    const std::string edges_f = dir.file("edges.tsv", edges);
    const std::string mp_f = dir.file("mp.tsv", "author:writes:paper:writes:author\tsymmetric\n");
    const std::string er = dir.file("er.tsv",
                                    "m0\tbig#0\nm1\tbig#0\nm2\tbig#0\nm3\tbig#1\n"
                                    "m4\tsolo#0\nm5\tsolo#0\n");
    const std::string report = dir.at("report.json");
    std::string log, err;
    REQUIRE(run({"eval", "--er-labels", er, "--nodes", nodes_f, "--edges", edges_f,
                 "--metapaths", mp_f, "--measure", "pathcount", "--out", report},
                &log, &err) == 0);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(slurp(report));
    CHECK(j["subtasks"].size() == 2); // big and solo (solo has 2 mentions -> split)
    CHECK(j["aggregates"].contains("mrr"));
}
