#pragma once

#include "prep/baselines.hpp"
#include "prep/checkpoint.hpp"
#include "prep/eval.hpp"
#include "prep/inference.hpp"
#include "prep/relevance.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prep {

/// Everything the evaluation harness can score pairs with: the fitted model,
/// its three ablations, and the eight classic baselines (4 base measures x 2
/// weight heuristics; the heuristic is a separate knob here).
enum class MeasureKind {
    Prep, PrepNoNV, PrepNoPS, PrepNoCS,
    PathCount, PathSim, JoinSim, SimRank
};

inline std::optional<MeasureKind> parse_measure_kind(const std::string& s) {
    if (s == "prep") return MeasureKind::Prep;
    if (s == "prep-no-nv") return MeasureKind::PrepNoNV;
    if (s == "prep-no-ps") return MeasureKind::PrepNoPS;
    if (s == "prep-no-cs") return MeasureKind::PrepNoCS;
    if (s == "pathcount") return MeasureKind::PathCount;
    if (s == "pathsim") return MeasureKind::PathSim;
    if (s == "joinsim") return MeasureKind::JoinSim;
    if (s == "simrank") return MeasureKind::SimRank;
    return std::nullopt;
}

inline const char* measure_kind_name(MeasureKind k) {
    switch (k) {
    case MeasureKind::Prep: return "prep";
    case MeasureKind::PrepNoNV: return "prep-no-nv";
    case MeasureKind::PrepNoPS: return "prep-no-ps";
    case MeasureKind::PrepNoCS: return "prep-no-cs";
    case MeasureKind::PathCount: return "pathcount";
    case MeasureKind::PathSim: return "pathsim";
    case MeasureKind::JoinSim: return "joinsim";
    case MeasureKind::SimRank: return "simrank";
    }
    return "?";
}

inline bool is_prep_kind(MeasureKind k) {
    return k == MeasureKind::Prep || k == MeasureKind::PrepNoNV ||
           k == MeasureKind::PrepNoPS || k == MeasureKind::PrepNoCS;
}

inline Variant variant_of(MeasureKind k) {
    switch (k) {
    case MeasureKind::PrepNoNV: return Variant::NoNodeVisibility;
    case MeasureKind::PrepNoPS: return Variant::NoPathSelectivity;
    case MeasureKind::PrepNoCS: return Variant::NoSynergy;
    default: return Variant::Full;
    }
}

enum class WeightScope { PerSubtask, Global };

struct MeasureOptions {
    MeasureKind kind = MeasureKind::Prep;
    Hyperparams hyper;                       // prep kinds (when no checkpoint)
    std::optional<Checkpoint> model;         // prep kinds: reuse a fit
    WeightHeuristic weighting = WeightHeuristic::Mean; // baseline kinds
    WeightScope scope = WeightScope::PerSubtask;
    SimRankConfig simrank;
    // Graph-form SimRank when provided; otherwise the count-table form runs.
    const HinGraph* graph = nullptr;
    const std::vector<MetaPath>* graph_metapaths = nullptr;
};

/// Per-meta-path raw score vectors for a baseline measure, aligned with the
/// table's pair rows.
inline std::vector<Eigen::VectorXd> per_metapath_scores(const PathCountTable& pc,
                                                        const MeasureOptions& opt,
                                                        WarningList& warnings) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<size_t>(pc.num_metapaths()));
    if (opt.kind == MeasureKind::SimRank) {
        for (int t = 0; t < pc.num_metapaths(); ++t) {
            SimRankResult r;
            if (opt.graph && opt.graph_metapaths) {
                if (static_cast<int>(opt.graph_metapaths->size()) != pc.num_metapaths())
                    throw ValidationError("simrank: meta-path list does not match the table");
                r = simrank_metapath(*opt.graph, pc,
                                     (*opt.graph_metapaths)[static_cast<size_t>(t)],
                                     opt.simrank);
            } else {
                r = simrank_metapath(pc, t, opt.simrank);
            }
            warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
            out.push_back(std::move(r.pair_scores));
        }
        return out;
    }
    const BaseMeasure base = opt.kind == MeasureKind::PathCount ? BaseMeasure::PathCount
                             : opt.kind == MeasureKind::PathSim ? BaseMeasure::PathSim
                                                                : BaseMeasure::JoinSim;
    for (int t = 0; t < pc.num_metapaths(); ++t)
        out.push_back(base_scores(pc, base, t, &warnings));
    return out;
}

inline std::string measure_id_of(const MeasureOptions& opt) {
    std::string id = measure_kind_name(opt.kind);
    if (!is_prep_kind(opt.kind))
        id += opt.weighting == WeightHeuristic::Mean ? "-mean" : "-sd";
    return id;
}

/// Global-scope score table for any measure (prep kinds fit unless a
/// checkpoint is supplied; baselines weight over all stored pairs).
inline ScoreTable compute_scores(const PathCountTable& pc, const MeasureOptions& opt) {
    if (is_prep_kind(opt.kind)) {
        Parameters params;
        Hyperparams h = opt.hyper;
        ScoreTable st;
        if (opt.model) {
            params = opt.model->params;
            h.alpha = opt.model->alpha;
            h.beta = opt.model->beta;
            h.delta = opt.model->delta;
            h.num_patterns = opt.model->num_patterns;
            validate_parameters(pc, params, h);
        } else {
            FitResult fr = fit(pc, h, variant_of(opt.kind));
            params = std::move(fr.params);
            st.warnings = std::move(fr.warnings);
        }
        ScoreTable scored = prep_score_table(pc, params, h, measure_id_of(opt));
        scored.warnings.insert(scored.warnings.begin(), st.warnings.begin(),
                               st.warnings.end());
        return scored;
    }
    WarningList warnings;
    const std::vector<Eigen::VectorXd> per_mp = per_metapath_scores(pc, opt, warnings);
    const BaselineWeights w = heuristic_weights(per_mp, opt.weighting);
    ScoreTable st = composite(pc, per_mp, w, measure_id_of(opt));
    st.warnings.insert(st.warnings.begin(), warnings.begin(), warnings.end());
    return st;
}

/// Full evaluation of one measure over the sub-tasks. Baseline weights are
/// computed per sub-task by default (over the sub-task's stored pairs) or
/// globally when so configured; prep kinds score once for all tasks.
inline EvalReport run_measure_eval(const PathCountTable& pc,
                                   const std::vector<SubTask>& tasks,
                                   const MeasureOptions& opt,
                                   const std::string& config_fingerprint = "") {
    if (tasks.empty())
        throw ValidationError("run_measure_eval: no sub-tasks");
    if (is_prep_kind(opt.kind) || opt.scope == WeightScope::Global) {
        EvalReport rep = evaluate(compute_scores(pc, opt), tasks, config_fingerprint);
        if (is_prep_kind(opt.kind)) {
            rep.metadata["seed"] =
                std::to_string(opt.model ? opt.model->seed : opt.hyper.seed);
            rep.metadata["variant"] =
                opt.model ? opt.model->variant : variant_name(variant_of(opt.kind));
        }
        return rep;
    }

    EvalReport rep;
    rep.measure_id = measure_id_of(opt);
    rep.direction = direction_name(Direction::HigherMoreRelevant);
    rep.config_fingerprint = config_fingerprint;
    const std::vector<Eigen::VectorXd> per_mp = per_metapath_scores(pc, opt, rep.warnings);

    for (const SubTask& task : tasks) {
        // Rows of this sub-task that are stored (nontrivial) pairs.
        std::vector<int> rows;
        rows.reserve(task.candidates.size());
        for (const auto& [u, v] : task.candidates) {
            const int s = pc.row_of(pc.node_of(u), pc.node_of(v));
            if (s >= 0)
                rows.push_back(s);
        }
        ScoreTable st;
        st.measure_id = rep.measure_id;
        st.direction = Direction::HigherMoreRelevant;
        if (!rows.empty()) {
            std::vector<Eigen::VectorXd> local(per_mp.size());
            for (size_t t = 0; t < per_mp.size(); ++t) {
                local[t].resize(static_cast<Eigen::Index>(rows.size()));
                for (size_t i = 0; i < rows.size(); ++i)
                    local[t](static_cast<Eigen::Index>(i)) = per_mp[t](rows[i]);
            }
            BaselineWeights w = heuristic_weights(local, opt.weighting);
            for (const std::string& msg : w.warnings)
                rep.warnings.push_back("sub-task '" + task.id + "': " + msg);
            for (size_t i = 0; i < rows.size(); ++i) {
                double total = 0.0;
                for (size_t t = 0; t < local.size(); ++t)
                    total += w.w(static_cast<Eigen::Index>(t)) * local[t](static_cast<Eigen::Index>(i));
                const auto& pr = pc.pairs[static_cast<size_t>(rows[i])];
                st.entries.push_back({pc.id(pr.u), pc.id(pr.v), total});
            }
        }
        rep.rows.push_back(evaluate_subtask(st, task, rep.warnings));
    }
    rep.aggregates = aggregate_rows(rep.rows);
    return rep;
}

} // namespace prep
