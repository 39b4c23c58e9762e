#pragma once

#include "prep/checkpoint.hpp"
#include "prep/harness.hpp"
#include "prep/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prep::cli {

inline std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string file_hash(const std::string& path) {
    return fnv1a_hex(file_bytes(path));
}

/// Canonical key=value dump of a command's resolved options; its hash is the
/// config fingerprint recorded in every output header.
inline std::string
config_fingerprint(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string dump;
    for (const auto& [k, v] : kv)
        dump += k + "=" + v + "\n";
    return fnv1a_hex(dump);
}

inline std::vector<std::string> header_with_inputs(
    const std::string& fingerprint,
    const std::vector<std::pair<std::string, std::string>>& inputs) {
    std::vector<std::string> lines;
    for (const auto& [role, path] : inputs)
        lines.push_back("input\t" + role + "\t" + file_hash(path));
    lines.push_back("config\t" + fingerprint);
    return lines;
}

/// Input hashes recorded in an existing output's header, keyed by role.
inline std::map<std::string, std::string> recorded_input_hashes(const std::string& path) {
    std::map<std::string, std::string> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        std::string l{strip_cr(line)};
        if (l.empty() || l[0] != '#')
            break;
        std::vector<std::string> f = split(l.size() > 2 ? l.substr(2) : "", '\t');
        if (f.size() == 3 && f[0] == "input")
            out[f[1]] = f[2];
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    out << content;
}

// ---------------------------------------------------------------------------
// Shared option blocks.

struct HyperFlags {
    int K = 0; // 0 resolves to T
    double beta = 1e-2;
    std::string alpha = "auto";
    double delta = 1e-50;
    uint64_t seed = 1;
    double outer_tol = 1e-6;
    int max_outer = 500;
    double rho_tol = 1e-6;
    int max_rho_sweeps = 100;
    int max_pgd_steps = 50;
    int max_halvings = 30;
    double armijo = 1e-4;
    double pgd_step = 1.0;
    std::string convergence = "objective";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--K", K, "Number of generating patterns (0 = number of meta-paths)");
        cmd->add_option("--beta", beta, "Dirichlet concentration in (0,1)");
        cmd->add_option("--alpha", alpha, "Gamma shape, or 'auto' (method of moments)");
        cmd->add_option("--delta", delta, "Simplex lower bound");
        cmd->add_option("--seed", seed, "Random seed");
        cmd->add_option("--outer-tol", outer_tol, "Outer stopping tolerance");
        cmd->add_option("--max-outer", max_outer, "Outer iteration cap");
        cmd->add_option("--rho-tol", rho_tol, "Visibility sweep tolerance");
        cmd->add_option("--max-rho-sweeps", max_rho_sweeps, "Visibility sweep cap");
        cmd->add_option("--max-pgd-steps", max_pgd_steps, "PGD steps per block update");
        cmd->add_option("--max-halvings", max_halvings, "Line-search halvings cap");
        cmd->add_option("--armijo", armijo, "Line-search acceptance constant");
        cmd->add_option("--pgd-step", pgd_step, "Initial PGD step size");
        cmd->add_option("--convergence", convergence, "Outer test: objective|parameters")
            ->check(CLI::IsMember({"objective", "parameters"}));
    }

    Hyperparams resolve(const PathCountTable& pc, double alpha_value) const {
        Hyperparams h;
        h.num_patterns = K > 0 ? K : pc.num_metapaths();
        h.beta = beta;
        h.alpha = alpha_value;
        h.delta = delta;
        h.seed = seed;
        h.outer_tol = outer_tol;
        h.max_outer_iters = max_outer;
        h.rho_tol = rho_tol;
        h.max_rho_sweeps = max_rho_sweeps;
        h.max_pgd_steps = max_pgd_steps;
        h.max_halvings = max_halvings;
        h.armijo_c = armijo;
        h.pgd_init_step = pgd_step;
        h.convergence = convergence == "parameters" ? ConvergenceOn::Parameters
                                                    : ConvergenceOn::Objective;
        return h;
    }

    double resolve_alpha(const PathCountTable& pc) const {
        if (alpha == "auto")
            return estimate_alpha(node_total_counts(pc));
        return parse_double(alpha, "--alpha");
    }

    std::vector<std::pair<std::string, std::string>> kv() const {
        return {{"K", std::to_string(K)},
                {"beta", fmt_double(beta)},
                {"alpha", alpha},
                {"delta", fmt_double(delta)},
                {"seed", std::to_string(seed)},
                {"outer_tol", fmt_double(outer_tol)},
                {"max_outer", std::to_string(max_outer)},
                {"rho_tol", fmt_double(rho_tol)},
                {"max_rho_sweeps", std::to_string(max_rho_sweeps)},
                {"max_pgd_steps", std::to_string(max_pgd_steps)},
                {"max_halvings", std::to_string(max_halvings)},
                {"armijo", fmt_double(armijo)},
                {"pgd_step", fmt_double(pgd_step)},
                {"convergence", convergence}};
    }
};

struct SimRankFlags {
    double c = 0.5;
    double tol = 1e-4;
    int iters = 100;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--simrank-c", c, "SimRank decay factor");
        cmd->add_option("--simrank-tol", tol, "SimRank fixed-point tolerance");
        cmd->add_option("--simrank-iters", iters, "SimRank iteration cap");
    }
    SimRankConfig resolve() const { return {c, tol, iters}; }
    std::vector<std::pair<std::string, std::string>> kv() const {
        return {{"simrank_c", fmt_double(c)},
                {"simrank_tol", fmt_double(tol)},
                {"simrank_iters", std::to_string(iters)}};
    }
};

inline Eigen::VectorXd parse_weights(const std::string& spec, int T) {
    if (spec == "uniform")
        return Eigen::VectorXd::Ones(T);
    std::vector<std::string> toks = split(spec, ',');
    if (static_cast<int>(toks.size()) != T)
        throw ValidationError("--weights: expected " + std::to_string(T) +
                              " comma-separated values or 'uniform'");
    Eigen::VectorXd w(T);
    for (int t = 0; t < T; ++t)
        w(t) = parse_double(toks[static_cast<size_t>(t)], "--weights");
    return w;
}

// ---------------------------------------------------------------------------

struct CliState {
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
};

inline void emit_warnings(const WarningList& warnings, std::ostream& err) {
    for (const std::string& w : warnings)
        err << "warning: " << w << "\n";
}

namespace detail {

struct CountArgs {
    std::string nodes, edges, metapaths, out;
    bool force = false;
};

inline int cmd_count(const CountArgs& a, CliState& io) {
    const std::vector<std::pair<std::string, std::string>> inputs = {
        {"nodes", a.nodes}, {"edges", a.edges}, {"metapaths", a.metapaths}};
    const std::string fp = config_fingerprint(
        {{"nodes", a.nodes}, {"edges", a.edges}, {"metapaths", a.metapaths}});
    if (!a.force && std::filesystem::exists(a.out)) {
        const auto recorded = recorded_input_hashes(a.out);
        bool fresh = recorded.size() == inputs.size();
        for (const auto& [role, path] : inputs)
            fresh = fresh && recorded.contains(role) && recorded.at(role) == file_hash(path);
        if (fresh) {
            *io.out << "count: cached output matches input fingerprints, skipping\n";
            return 0;
        }
    }
    HinGraph g = load_graph(a.nodes, a.edges);
    std::vector<MetaPath> mps = load_metapaths(a.metapaths);
    PathCountTable pc = count_paths(g, mps);
    std::ostringstream ss;
    write_count_table(ss, pc, header_with_inputs(fp, inputs));
    write_text_file(a.out, ss.str());
    *io.out << "count: " << pc.num_pairs() << " nontrivial pairs, " << pc.num_metapaths()
            << " meta-paths -> " << a.out << "\n";
    return 0;
}

struct FitArgs {
    std::string counts, out, trace;
    HyperFlags hyper;
    std::string variant = "full";
};

inline int cmd_fit(const FitArgs& a, CliState& io) {
    PathCountTable pc = read_count_table_file(a.counts);
    const double alpha_value = a.hyper.resolve_alpha(pc);
    Hyperparams h = a.hyper.resolve(pc, alpha_value);
    const Variant variant = *parse_variant(a.variant);

    auto kv = a.hyper.kv();
    kv.emplace_back("variant", a.variant);
    kv.emplace_back("counts", a.counts);
    const std::string fp = config_fingerprint(kv);

    FitResult fr = fit(pc, h, variant);
    emit_warnings(fr.warnings, *io.err);

    Checkpoint ck;
    ck.params = std::move(fr.params);
    ck.alpha = alpha_value;
    ck.beta = h.beta;
    ck.delta = h.delta;
    ck.num_patterns = h.num_patterns;
    ck.seed = h.seed;
    ck.variant = a.variant;

    std::vector<std::string> header = header_with_inputs(fp, {{"counts", a.counts}});
    header.push_back(std::string("alpha-source\t") +
                     (a.hyper.alpha == "auto" ? "auto" : "given") + "\t" +
                     fmt_double(alpha_value));
    std::ostringstream ss;
    write_checkpoint(ss, pc, ck, header);
    write_text_file(a.out, ss.str());

    if (!a.trace.empty()) {
        std::ostringstream ts;
        ts << "# prep " << kToolVersion << " trace\n";
        for (const std::string& hl : header)
            ts << "# " << hl << "\n";
        ts << "iteration\tobjective\td_eta\td_rho\td_phi\td_theta\n";
        for (const TraceRow& r : fr.trace)
            ts << r.iteration << "\t" << fmt_double(r.objective) << "\t"
               << fmt_double(r.d_eta) << "\t" << fmt_double(r.d_rho) << "\t"
               << fmt_double(r.d_phi) << "\t" << fmt_double(r.d_theta) << "\n";
        write_text_file(a.trace, ts.str());
    }
    *io.out << "fit: " << fr.outer_iterations << " outer iterations, "
            << (fr.converged ? "converged" : "iteration cap reached") << ", objective "
            << fmt_double(fr.trace.empty() ? 0.0 : fr.trace.back().objective) << " -> "
            << a.out << "\n";
    return 0;
}

struct ScoreArgs {
    std::string counts, model, out;
    std::string reduction; // empty = prep scoring
    std::string weights = "uniform";
};

inline int cmd_score(const ScoreArgs& a, CliState& io) {
    PathCountTable pc = read_count_table_file(a.counts);
    ScoreTable st;
    std::vector<std::pair<std::string, std::string>> inputs = {{"counts", a.counts}};
    std::vector<std::pair<std::string, std::string>> kv = {{"counts", a.counts}};
    if (!a.reduction.empty()) {
        auto mode = parse_reduction_mode(a.reduction);
        if (!mode)
            throw ValidationError("--reduction must be pathcount|pathsim-like|joinsim-like");
        kv.emplace_back("reduction", a.reduction);
        kv.emplace_back("weights", a.weights);
        st = reduction_score(pc, *mode, parse_weights(a.weights, pc.num_metapaths()));
    } else {
        if (a.model.empty())
            throw ValidationError("score: either --model or --reduction is required");
        Checkpoint ck = read_checkpoint_file(a.model, pc);
        Hyperparams h;
        h.num_patterns = ck.num_patterns;
        h.alpha = ck.alpha;
        h.beta = ck.beta;
        h.delta = ck.delta;
        h.seed = ck.seed;
        validate_parameters(pc, ck.params, h);
        kv.emplace_back("model", a.model);
        inputs.emplace_back("model", a.model);
        st = prep_score_table(pc, ck.params, h,
                              ck.variant == "full" ? "prep" : "prep-" + ck.variant);
    }
    const std::string fp = config_fingerprint(kv);
    st.fingerprint = fp;
    emit_warnings(st.warnings, *io.err);
    std::ostringstream ss;
    write_score_table(ss, st, header_with_inputs(fp, inputs));
    write_text_file(a.out, ss.str());
    *io.out << "score: " << st.entries.size() << " pairs (" << st.measure_id << ", "
            << direction_name(st.direction) << "-is-more-relevant) -> " << a.out << "\n";
    return 0;
}

struct BaselineArgs {
    std::string counts, out;
    std::string measure;
    std::string weighting = "mean";
    SimRankFlags simrank;
    std::string nodes, edges, metapaths; // graph-form simrank
};

inline int cmd_baseline(const BaselineArgs& a, CliState& io) {
    PathCountTable pc = read_count_table_file(a.counts);
    auto kind = parse_measure_kind(a.measure);
    if (!kind || is_prep_kind(*kind))
        throw ValidationError("--measure must be pathcount|pathsim|joinsim|simrank");
    MeasureOptions opt;
    opt.kind = *kind;
    opt.weighting = a.weighting == "sd" ? WeightHeuristic::Sd : WeightHeuristic::Mean;
    opt.scope = WeightScope::Global; // the flat file format carries one score per pair
    opt.simrank = a.simrank.resolve();

    HinGraph g;
    std::vector<MetaPath> mps;
    std::vector<std::pair<std::string, std::string>> inputs = {{"counts", a.counts}};
    if (!a.nodes.empty()) {
        g = load_graph(a.nodes, a.edges);
        mps = load_metapaths(a.metapaths);
        opt.graph = &g;
        opt.graph_metapaths = &mps;
        inputs.emplace_back("nodes", a.nodes);
        inputs.emplace_back("edges", a.edges);
        inputs.emplace_back("metapaths", a.metapaths);
    }
    auto kv = a.simrank.kv();
    kv.emplace_back("counts", a.counts);
    kv.emplace_back("measure", a.measure);
    kv.emplace_back("weighting", a.weighting);
    const std::string fp = config_fingerprint(kv);

    ScoreTable st = compute_scores(pc, opt);
    st.fingerprint = fp;
    emit_warnings(st.warnings, *io.err);
    std::ostringstream ss;
    write_score_table(ss, st, header_with_inputs(fp, inputs));
    write_text_file(a.out, ss.str());
    *io.out << "baseline: " << st.entries.size() << " pairs (" << st.measure_id << ") -> "
            << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string labels, er_labels;
    std::string scores;
    std::string counts, model;
    std::string nodes, edges, metapaths;
    std::string measure;
    std::string weighting = "mean";
    std::string weight_scope = "subtask";
    SimRankFlags simrank;
    HyperFlags hyper;
    std::string out;
};

inline int cmd_eval(const EvalArgs& a, CliState& io) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::vector<std::pair<std::string, std::string>> inputs;

    std::vector<SubTask> tasks;
    std::optional<PathCountTable> pc;
    HinGraph graph;
    std::vector<MetaPath> mps;
    bool have_graph = false;

    if (!a.er_labels.empty()) {
        if (a.nodes.empty() || a.edges.empty() || a.metapaths.empty())
            throw ValidationError("eval --er-labels needs --nodes, --edges and --metapaths");
        EntityResolutionBuild build = build_entity_resolution_tasks(
            load_graph(a.nodes, a.edges), read_mention_entity_file(a.er_labels));
        emit_warnings(build.warnings, *io.err);
        graph = std::move(build.graph);
        tasks = std::move(build.tasks);
        mps = load_metapaths(a.metapaths);
        pc = count_paths(graph, mps);
        have_graph = true;
        inputs = {{"er-labels", a.er_labels}, {"nodes", a.nodes}, {"edges", a.edges},
                  {"metapaths", a.metapaths}};
        kv = {{"er_labels", a.er_labels}, {"nodes", a.nodes}, {"edges", a.edges},
              {"metapaths", a.metapaths}};
    } else {
        if (a.labels.empty())
            throw ValidationError("eval: --labels (or --er-labels) is required");
        tasks = read_label_file(a.labels);
        inputs = {{"labels", a.labels}};
        kv = {{"labels", a.labels}};
    }

    EvalReport rep;
    if (!a.scores.empty()) {
        ScoreTable st = read_score_table_file(a.scores);
        inputs.emplace_back("scores", a.scores);
        kv.emplace_back("scores", a.scores);
        rep = evaluate(st, tasks, config_fingerprint(kv));
    } else {
        if (a.measure.empty())
            throw ValidationError("eval: either --scores or --measure is required");
        auto kind = parse_measure_kind(a.measure);
        if (!kind)
            throw ValidationError("eval: unknown measure '" + a.measure + "'");
        if (!pc) {
            if (a.counts.empty())
                throw ValidationError("eval: --counts is required with --measure");
            pc = read_count_table_file(a.counts);
            inputs.emplace_back("counts", a.counts);
            kv.emplace_back("counts", a.counts);
        }
        MeasureOptions opt;
        opt.kind = *kind;
        opt.weighting = a.weighting == "sd" ? WeightHeuristic::Sd : WeightHeuristic::Mean;
        opt.scope = a.weight_scope == "global" ? WeightScope::Global : WeightScope::PerSubtask;
        opt.simrank = a.simrank.resolve();
        if (have_graph) {
            opt.graph = &graph;
            opt.graph_metapaths = &mps;
        }
        if (is_prep_kind(*kind)) {
            if (!a.model.empty()) {
                opt.model = read_checkpoint_file(a.model, *pc);
                inputs.emplace_back("model", a.model);
                kv.emplace_back("model", a.model);
            } else {
                opt.hyper = a.hyper.resolve(*pc, a.hyper.resolve_alpha(*pc));
            }
        }
        auto hkv = a.hyper.kv();
        kv.insert(kv.end(), hkv.begin(), hkv.end());
        auto skv = a.simrank.kv();
        kv.insert(kv.end(), skv.begin(), skv.end());
        kv.emplace_back("measure", a.measure);
        kv.emplace_back("weighting", a.weighting);
        kv.emplace_back("weight_scope", a.weight_scope);
        rep = run_measure_eval(*pc, tasks, opt, config_fingerprint(kv));
    }

    emit_warnings(rep.warnings, *io.err);
    std::vector<std::string> input_hashes;
    for (const auto& [role, path] : inputs)
        input_hashes.push_back(role + ":" + file_hash(path));
    nlohmann::ordered_json j = report_to_json(rep, input_hashes);
    write_text_file(a.out, j.dump(2) + "\n");
    *io.out << "eval: " << rep.rows.size() << " sub-task(s), measure " << rep.measure_id
            << " -> " << a.out << "\n";
    for (const auto& [metric, schemes] : rep.aggregates)
        for (const auto& [scheme, value] : schemes)
            *io.out << "  " << metric << " " << scheme << " = " << fmt_double(value) << "\n";
    return 0;
}

struct SynthArgs {
    std::string out, labels_out;
    SynthConfig cfg;
    bool no_cycles = false;
};

inline int cmd_synth(const SynthArgs& a, CliState& io) {
    SynthConfig cfg = a.cfg;
    cfg.with_cycles = !a.no_cycles;
    SynthInstance inst = make_synthetic_instance(cfg);
    const std::string fp = config_fingerprint(
        {{"num_nodes", std::to_string(cfg.num_nodes)},
         {"num_groups", std::to_string(cfg.num_groups)},
         {"num_metapaths", std::to_string(cfg.num_metapaths)},
         {"num_patterns", std::to_string(cfg.num_patterns)},
         {"pair_fraction", fmt_double(cfg.pair_fraction)},
         {"planted_fraction", fmt_double(cfg.planted_fraction)},
         {"rate_boost", fmt_double(cfg.rate_boost)},
         {"alpha_gen", fmt_double(cfg.alpha_gen)},
         {"seed", std::to_string(cfg.seed)},
         {"with_cycles", cfg.with_cycles ? "1" : "0"}});
    std::ostringstream cs;
    write_count_table(cs, inst.counts, {"config\t" + fp});
    write_text_file(a.out, cs.str());
    std::ostringstream ls;
    write_synth_labels(ls, inst);
    write_text_file(a.labels_out, ls.str());
    *io.out << "synth: " << inst.counts.num_pairs() << " pairs over "
            << inst.counts.num_nodes() << " nodes, " << inst.tasks.size()
            << " sub-task(s) -> " << a.out << ", " << a.labels_out << "\n";
    return 0;
}

struct SweepArgs {
    std::string counts, labels, out;
    std::string betas = "1e-4,1e-3,1e-2,1e-1";
    HyperFlags hyper;
};

inline int cmd_sweep(const SweepArgs& a, CliState& io) {
    PathCountTable pc = read_count_table_file(a.counts);
    std::vector<SubTask> tasks = read_label_file(a.labels);
    std::vector<std::string> beta_toks = split(a.betas, ',');
    if (beta_toks.empty())
        throw ValidationError("sweep: --betas must list at least one value");

    auto kv = a.hyper.kv();
    kv.emplace_back("counts", a.counts);
    kv.emplace_back("labels", a.labels);
    kv.emplace_back("betas", a.betas);
    const std::string fp = config_fingerprint(kv);

    const double alpha_value = a.hyper.resolve_alpha(pc);
    std::ostringstream ss;
    ss << "# prep " << kToolVersion << " beta-sweep\n";
    ss << "# config\t" << fp << "\n";
    ss << "beta\tmetric\tscheme\tvalue\n";
    for (const std::string& tok : beta_toks) {
        const double beta = parse_double(tok, "--betas");
        HyperFlags hf = a.hyper;
        hf.beta = beta;
        MeasureOptions opt;
        opt.kind = MeasureKind::Prep;
        opt.hyper = hf.resolve(pc, alpha_value);
        EvalReport rep = run_measure_eval(pc, tasks, opt, fp);
        emit_warnings(rep.warnings, *io.err);
        for (const auto& [metric, schemes] : rep.aggregates)
            for (const auto& [scheme, value] : schemes) {
                if (!std::isfinite(value))
                    throw NumericError("sweep: non-finite " + metric + " at beta " + tok);
                ss << fmt_double(beta) << "\t" << metric << "\t" << scheme << "\t"
                   << fmt_double(value) << "\n";
            }
    }
    write_text_file(a.out, ss.str());
    *io.out << "sweep: " << beta_toks.size() << " beta value(s) -> " << a.out << "\n";
    return 0;
}

} // namespace detail

/// The whole command-line surface, callable in-process. Returns the process
/// exit code: 0 success, 1 numerical failure, 2 input/validation failure.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CliState io{&out, &err};
    CLI::App app{"Path-based relevance in heterogeneous information networks"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.set_config("--config", "", "Read options from a key=value config file");
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = library default)");

    detail::CountArgs count_args;
    CLI::App* count = app.add_subcommand("count", "Count meta-path instances");
    count->add_option("--nodes", count_args.nodes, "Node file")->required()->check(CLI::ExistingFile);
    count->add_option("--edges", count_args.edges, "Edge file")->required()->check(CLI::ExistingFile);
    count->add_option("--metapaths", count_args.metapaths, "Meta-path file")->required()->check(CLI::ExistingFile);
    count->add_option("--out", count_args.out, "Output count table")->required();
    count->add_flag("--force", count_args.force, "Recompute even when cached");

    detail::FitArgs fit_args;
    CLI::App* fitc = app.add_subcommand("fit", "Fit the model (MAP inference)");
    fitc->add_option("--counts", fit_args.counts, "Count table")->required()->check(CLI::ExistingFile);
    fitc->add_option("--out", fit_args.out, "Checkpoint output")->required();
    fitc->add_option("--trace", fit_args.trace, "Objective trace output");
    fitc->add_option("--variant", fit_args.variant, "full|no-nv|no-ps|no-cs")
        ->check(CLI::IsMember({"full", "no-nv", "no-ps", "no-cs"}));
    fit_args.hyper.add_to(fitc);

    detail::ScoreArgs score_args;
    CLI::App* score = app.add_subcommand("score", "Score pairs with a fitted model");
    score->add_option("--counts", score_args.counts, "Count table")->required()->check(CLI::ExistingFile);
    score->add_option("--model", score_args.model, "Checkpoint")->check(CLI::ExistingFile);
    score->add_option("--out", score_args.out, "Score output")->required();
    score->add_option("--reduction", score_args.reduction,
                      "Heuristic reduction instead of a fitted model: "
                      "pathcount|pathsim-like|joinsim-like");
    score->add_option("--weights", score_args.weights, "Reduction weights: 'uniform' or CSV");

    detail::BaselineArgs base_args;
    CLI::App* base = app.add_subcommand("baseline", "Classic composite measures");
    base->add_option("--counts", base_args.counts, "Count table")->required()->check(CLI::ExistingFile);
    base->add_option("--out", base_args.out, "Score output")->required();
    base->add_option("--measure", base_args.measure, "pathcount|pathsim|joinsim|simrank")->required();
    base->add_option("--weighting", base_args.weighting, "mean|sd")
        ->check(CLI::IsMember({"mean", "sd"}));
    base->add_option("--nodes", base_args.nodes, "Node file (graph-form SimRank)")->check(CLI::ExistingFile);
    base->add_option("--edges", base_args.edges, "Edge file (graph-form SimRank)")->check(CLI::ExistingFile);
    base->add_option("--metapaths", base_args.metapaths, "Meta-path file (graph-form SimRank)")->check(CLI::ExistingFile);
    base_args.simrank.add_to(base);

    detail::EvalArgs eval_args;
    CLI::App* evalc = app.add_subcommand("eval", "Evaluate a measure against labels");
    evalc->add_option("--labels", eval_args.labels, "Label file u/v/{0,1}[/subtask]")->check(CLI::ExistingFile);
    evalc->add_option("--er-labels", eval_args.er_labels,
                      "mention_id<TAB>entity_id file for the entity-resolution builder")
        ->check(CLI::ExistingFile);
    evalc->add_option("--scores", eval_args.scores, "Pre-computed score file")->check(CLI::ExistingFile);
    evalc->add_option("--counts", eval_args.counts, "Count table (compute mode)")->check(CLI::ExistingFile);
    evalc->add_option("--model", eval_args.model, "Checkpoint (prep measures)")->check(CLI::ExistingFile);
    evalc->add_option("--nodes", eval_args.nodes, "Node file (entity-resolution mode)")->check(CLI::ExistingFile);
    evalc->add_option("--edges", eval_args.edges, "Edge file (entity-resolution mode)")->check(CLI::ExistingFile);
    evalc->add_option("--metapaths", eval_args.metapaths, "Meta-path file (entity-resolution mode)")->check(CLI::ExistingFile);
    evalc->add_option("--measure", eval_args.measure,
                      "prep|prep-no-nv|prep-no-ps|prep-no-cs|pathcount|pathsim|joinsim|simrank");
    evalc->add_option("--weighting", eval_args.weighting, "mean|sd")
        ->check(CLI::IsMember({"mean", "sd"}));
    evalc->add_option("--weight-scope", eval_args.weight_scope, "subtask|global")
        ->check(CLI::IsMember({"subtask", "global"}));
    evalc->add_option("--out", eval_args.out, "Report output (JSON)")->required();
    eval_args.simrank.add_to(evalc);
    eval_args.hyper.add_to(evalc);

    detail::SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a planted synthetic instance");
    synth->add_option("--out", synth_args.out, "Count table output")->required();
    synth->add_option("--labels-out", synth_args.labels_out, "Label file output")->required();
    synth->add_option("--num-nodes", synth_args.cfg.num_nodes, "Node count");
    synth->add_option("--groups", synth_args.cfg.num_groups, "Sub-task count");
    synth->add_option("--metapaths", synth_args.cfg.num_metapaths, "Meta-path count");
    synth->add_option("--patterns", synth_args.cfg.num_patterns, "Generating pattern count");
    synth->add_option("--pair-frac", synth_args.cfg.pair_fraction, "Fraction of in-group pairs kept");
    synth->add_option("--planted-frac", synth_args.cfg.planted_fraction, "Fraction of kept pairs planted");
    synth->add_option("--boost", synth_args.cfg.rate_boost, "Rate multiplier for planted pairs");
    synth->add_option("--alpha-gen", synth_args.cfg.alpha_gen, "Gamma shape for true visibilities");
    synth->add_option("--seed", synth_args.cfg.seed, "Random seed");
    synth->add_flag("--no-cycles", synth_args.no_cycles, "Skip synthetic cycle counts");

    detail::SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "Fit and evaluate over a list of beta values");
    sweep->add_option("--counts", sweep_args.counts, "Count table")->required()->check(CLI::ExistingFile);
    sweep->add_option("--labels", sweep_args.labels, "Label file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_args.out, "Sweep table output")->required();
    sweep->add_option("--betas", sweep_args.betas, "Comma-separated beta values");
    sweep_args.hyper.add_to(sweep);

    // Let generic options like --threads appear after the subcommand too.
    for (CLI::App* sub : app.get_subcommands({}))
        sub->fallthrough();

    std::reverse(args.begin(), args.end()); // CLI11 parses back to front
    try {
        app.parse(args);
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

#ifdef _OPENMP
    if (threads > 0)
        omp_set_num_threads(threads);
#endif

    try {
        if (count->parsed())
            return detail::cmd_count(count_args, io);
        if (fitc->parsed())
            return detail::cmd_fit(fit_args, io);
        if (score->parsed())
            return detail::cmd_score(score_args, io);
        if (base->parsed())
            return detail::cmd_baseline(base_args, io);
        if (evalc->parsed())
            return detail::cmd_eval(eval_args, io);
        if (synth->parsed())
            return detail::cmd_synth(synth_args, io);
        if (sweep->parsed())
            return detail::cmd_sweep(sweep_args, io);
        err << "error: no subcommand\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace prep::cli
