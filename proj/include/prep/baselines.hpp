#pragma once

#include "prep/common.hpp"
#include "prep/graph.hpp"
#include "prep/path_count.hpp"
#include "prep/score_table.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace prep {

enum class BaseMeasure { PathCount, PathSim, JoinSim };

inline const char* base_measure_name(BaseMeasure m) {
    switch (m) {
    case BaseMeasure::PathCount: return "pathcount";
    case BaseMeasure::PathSim: return "pathsim";
    case BaseMeasure::JoinSim: return "joinsim";
    }
    return "?";
}

inline std::optional<BaseMeasure> parse_base_measure(const std::string& s) {
    if (s == "pathcount") return BaseMeasure::PathCount;
    if (s == "pathsim") return BaseMeasure::PathSim;
    if (s == "joinsim") return BaseMeasure::JoinSim;
    return std::nullopt;
}

enum class WeightHeuristic { Mean, Sd };

/// Per-meta-path weights for the linear combination, from one of the two
/// reciprocal heuristics. A degenerate statistic zeroes the weight.
struct BaselineWeights {
    Eigen::VectorXd w;
    WeightHeuristic heuristic = WeightHeuristic::Mean;
    WarningList warnings;
};

/// Per-pair score under one meta-path, before weighting:
/// pathcount P_uv; pathsim 2 P_uv / (P_uu + P_vv); joinsim P_uv / sqrt(P_uu P_vv).
/// A zero cycle denominator makes the term 0 and records a warning.
inline Eigen::VectorXd base_scores(const PathCountTable& pc, BaseMeasure measure, int t,
                                   WarningList* warnings = nullptr) {
    if (t < 0 || t >= pc.num_metapaths())
        throw ValidationError("base_scores: meta-path index out of range");
    Eigen::VectorXd out(pc.num_pairs());
    int skipped = 0;
    for (int s = 0; s < pc.num_pairs(); ++s) {
        const auto& pr = pc.pairs[static_cast<size_t>(s)];
        const double puv = pc.counts(s, t);
        if (measure == BaseMeasure::PathCount) {
            out(s) = puv;
            continue;
        }
        const double puu = pc.cycles(pr.u, t);
        const double pvv = pc.cycles(pr.v, t);
        if (measure == BaseMeasure::PathSim) {
            const double denom = puu + pvv;
            out(s) = denom > 0.0 ? 2.0 * puv / denom : 0.0;
            if (denom <= 0.0)
                ++skipped;
        } else {
            const double denom = std::sqrt(puu * pvv);
            out(s) = denom > 0.0 ? puv / denom : 0.0;
            if (denom <= 0.0)
                ++skipped;
        }
    }
    if (skipped > 0 && warnings)
        warnings->push_back(std::string(base_measure_name(measure)) + " t=" +
                            std::to_string(t + 1) + ": zero cycle count, " +
                            std::to_string(skipped) + " pair term(s) set to 0");
    return out;
}

// ---------------------------------------------------------------------------
// SimRank with meta-path constraints: S = max{ C * (A^T S A), I } iterated
// from S = I, where A is the column-normalized count matrix.

struct SimRankConfig {
    double decay = 0.5;     // C in (0,1); 0 degenerates to S = I
    double tolerance = 1e-4;
    int max_iterations = 100;

    void validate() const {
        if (decay < 0.0 || decay >= 1.0)
            throw ValidationError("simrank: decay C must lie in [0, 1)");
        if (!(tolerance > 0.0) || max_iterations < 1)
            throw ValidationError("simrank: bad tolerance or iteration cap");
    }
};

struct SimRankResult {
    Eigen::VectorXd pair_scores; // aligned with pc.pairs
    int iterations = 0;
    bool converged = false;
    std::vector<double> deltas; // max entry change per sweep
    WarningList warnings;
};

namespace detail {

inline Eigen::SparseMatrix<double> column_normalize(Eigen::SparseMatrix<double> a) {
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(a.cols());
    for (int c = 0; c < a.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it)
            colsum(c) += it.value();
    for (int c = 0; c < a.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it)
            if (colsum(c) > 0.0) // zero-sum columns stay zero
                it.valueRef() /= colsum(c);
    return a;
}

inline SimRankResult simrank_fixed_point(const Eigen::SparseMatrix<double>& a_raw,
                                         const SimRankConfig& cfg,
                                         const PathCountTable& pc,
                                         const std::vector<int>& node_map) {
    cfg.validate();
    const int n = static_cast<int>(a_raw.rows());
    const Eigen::SparseMatrix<double> a = column_normalize(a_raw);

    SimRankResult res;
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Eigen::MatrixXd next = cfg.decay * (a.transpose() * (s * a).eval());
        next = next.cwiseMax(Eigen::MatrixXd::Identity(n, n));
        const double delta = (next - s).cwiseAbs().maxCoeff();
        s = std::move(next);
        res.deltas.push_back(delta);
        res.iterations = it + 1;
        if (delta < cfg.tolerance) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged)
        res.warnings.push_back("simrank: iteration cap reached before tolerance");

    res.pair_scores.resize(pc.num_pairs());
    for (int i = 0; i < pc.num_pairs(); ++i) {
        const auto& pr = pc.pairs[static_cast<size_t>(i)];
        const int mu = node_map[static_cast<size_t>(pr.u)];
        const int mv = node_map[static_cast<size_t>(pr.v)];
        res.pair_scores(i) = (mu >= 0 && mv >= 0) ? s(mu, mv) : 0.0;
    }
    return res;
}

} // namespace detail

/// Graph form: A is the adjacency of the sub-graph whose edges realize some
/// step of the meta-path (all node types included), column-normalized.
/// Returns scores for the pairs of `pc`.
inline SimRankResult simrank_metapath(const HinGraph& g, const PathCountTable& pc,
                                      const MetaPath& mp, const SimRankConfig& cfg) {
    validate_metapath(g, mp);
    const int n = g.num_nodes();
    std::vector<Eigen::Triplet<double>> trips;
    for (int step = 0; step < mp.length(); ++step) {
        const int st = g.node_type_index.at(mp.node_types[static_cast<size_t>(step)]);
        const int dt = g.node_type_index.at(mp.node_types[static_cast<size_t>(step) + 1]);
        const int et = g.edge_type_index.at(mp.edge_types[static_cast<size_t>(step)]);
        for (const HinGraph::Edge& e : g.edges)
            if (e.type == et && g.node_type_of(e.src) == st && g.node_type_of(e.dst) == dt)
                trips.emplace_back(e.src, e.dst, 1.0);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());

    std::vector<int> node_map(static_cast<size_t>(pc.num_nodes()), -1);
    for (int z = 0; z < pc.num_nodes(); ++z) {
        const int gz = g.node_index.contains(pc.id(z)) ? g.node_index.at(pc.id(z)) : -1;
        node_map[static_cast<size_t>(z)] = gz;
    }
    return detail::simrank_fixed_point(a, cfg, pc, node_map);
}

/// Count-table form (no graph at hand): A is the symmetric per-meta-path
/// path-count matrix over the table's nodes, cycle counts on the diagonal.
inline SimRankResult simrank_metapath(const PathCountTable& pc, int t,
                                      const SimRankConfig& cfg) {
    if (t < 0 || t >= pc.num_metapaths())
        throw ValidationError("simrank_metapath: meta-path index out of range");
    const int n = pc.num_nodes();
    std::vector<Eigen::Triplet<double>> trips;
    for (int s = 0; s < pc.num_pairs(); ++s) {
        const auto& pr = pc.pairs[static_cast<size_t>(s)];
        const double c = pc.counts(s, t);
        if (c > 0.0) {
            trips.emplace_back(pr.u, pr.v, c);
            trips.emplace_back(pr.v, pr.u, c);
        }
    }
    for (int z = 0; z < n; ++z)
        if (pc.cycles(z, t) > 0.0)
            trips.emplace_back(z, z, pc.cycles(z, t));
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());

    std::vector<int> node_map(static_cast<size_t>(n));
    for (int z = 0; z < n; ++z)
        node_map[static_cast<size_t>(z)] = z;
    return detail::simrank_fixed_point(a, cfg, pc, node_map);
}

/// w_t = 1 / mean or 1 / population-sd of meta-path t's scores. Zero (or
/// non-finite) statistics zero the weight with a warning.
inline BaselineWeights heuristic_weights(const std::vector<Eigen::VectorXd>& score_tables,
                                         WeightHeuristic heuristic) {
    BaselineWeights bw;
    bw.heuristic = heuristic;
    bw.w.resize(static_cast<Eigen::Index>(score_tables.size()));
    for (size_t t = 0; t < score_tables.size(); ++t) {
        const Eigen::VectorXd& sc = score_tables[t];
        if (sc.size() == 0)
            throw ValidationError("heuristic_weights: meta-path " + std::to_string(t + 1) +
                                  " has no scored pairs");
        double stat;
        if (heuristic == WeightHeuristic::Mean) {
            stat = sc.mean();
        } else {
            const double mean = sc.mean();
            stat = std::sqrt((sc.array() - mean).square().mean());
        }
        if (stat > 0.0 && std::isfinite(stat)) {
            bw.w(static_cast<Eigen::Index>(t)) = 1.0 / stat;
        } else {
            bw.w(static_cast<Eigen::Index>(t)) = 0.0;
            bw.warnings.push_back("weights: degenerate " +
                                  std::string(heuristic == WeightHeuristic::Mean ? "mean" : "sd") +
                                  " on meta-path " + std::to_string(t + 1) +
                                  ", weight set to 0");
        }
    }
    return bw;
}

/// Composite score sum_t w_t score_t(s); higher is more relevant.
inline ScoreTable composite(const PathCountTable& pc,
                            const std::vector<Eigen::VectorXd>& score_tables,
                            const BaselineWeights& weights,
                            const std::string& measure_id) {
    if (static_cast<Eigen::Index>(score_tables.size()) != weights.w.size())
        throw ValidationError("composite: weight/score dimensions disagree");
    for (const Eigen::VectorXd& sc : score_tables)
        if (sc.size() != pc.num_pairs())
            throw ValidationError("composite: score vector does not match the table");
    ScoreTable st;
    st.measure_id = measure_id;
    st.direction = Direction::HigherMoreRelevant;
    st.warnings = weights.warnings;
    st.entries.reserve(static_cast<size_t>(pc.num_pairs()));
    for (int s = 0; s < pc.num_pairs(); ++s) {
        double total = 0.0;
        for (size_t t = 0; t < score_tables.size(); ++t)
            total += weights.w(static_cast<Eigen::Index>(t)) * score_tables[t](s);
        st.entries.push_back({pc.id(pc.pairs[static_cast<size_t>(s)].u),
                              pc.id(pc.pairs[static_cast<size_t>(s)].v), total});
    }
    return st;
}

} // namespace prep
