#pragma once

#include "prep/baselines.hpp"
#include "prep/model.hpp"
#include "prep/score_table.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace prep {

/// PReP relevance of one pair under fitted parameters:
///   r(s) = sum_t eta_t P_st / (rho_u rho_v psi_st) + (1-beta) sum_k log phi_sk,
/// the pair's negative log-likelihood with the log-rate terms dropped.
/// Lower r ranks as more relevant.
inline double prep_score(const PathCountTable& pc, const Parameters& p,
                         const Hyperparams& h, int s) {
    if (s < 0 || s >= pc.num_pairs())
        throw ValidationError("prep_score: pair index out of range");
    check_shapes(pc, p);
    const auto& pr = pc.pairs[static_cast<size_t>(s)];
    const double tau_s = p.rho(pr.u) * p.rho(pr.v);
    const Eigen::RowVectorXd psi_row = p.phi.row(s) * p.theta;
    double r = (pc.counts.row(s).array() * p.eta.transpose().array() /
                psi_row.array()).sum() / tau_s;
    r += (1.0 - h.beta) * p.phi.row(s).array().log().sum();
    if (!std::isfinite(r))
        throw NumericError("prep_score: non-finite score at pair index " + std::to_string(s));
    return r;
}

inline double prep_score(const PathCountTable& pc, const Parameters& p,
                         const Hyperparams& h, const std::string& u,
                         const std::string& v) {
    const int s = pc.row_of(pc.node_of(u), pc.node_of(v));
    if (s < 0)
        throw ValidationError("prep_score: pair (" + u + ", " + v + ") not in the table");
    return prep_score(pc, p, h, s);
}

/// Scores every stored pair; direction flag is lower-is-more-relevant.
inline ScoreTable prep_score_table(const PathCountTable& pc, const Parameters& p,
                                   const Hyperparams& h,
                                   const std::string& measure_id = "prep") {
    ScoreTable st;
    st.measure_id = measure_id;
    st.direction = Direction::LowerMoreRelevant;
    st.entries.reserve(static_cast<size_t>(pc.num_pairs()));
    for (int s = 0; s < pc.num_pairs(); ++s)
        st.entries.push_back({pc.id(pc.pairs[static_cast<size_t>(s)].u),
                              pc.id(pc.pairs[static_cast<size_t>(s)].v),
                              prep_score(pc, p, h, s)});
    return st;
}

/// The classic measures as heuristic parameterizations of the model:
/// pathcount takes the raw counts, pathsim-like divides by the arithmetic
/// mean of the two cycle counts, joinsim-like by the geometric mean.
enum class ReductionMode { PathCount, PathSimLike, JoinSimLike };

inline std::optional<ReductionMode> parse_reduction_mode(const std::string& s) {
    if (s == "pathcount") return ReductionMode::PathCount;
    if (s == "pathsim-like") return ReductionMode::PathSimLike;
    if (s == "joinsim-like") return ReductionMode::JoinSimLike;
    return std::nullopt;
}

inline ScoreTable reduction_score(const PathCountTable& pc, ReductionMode mode,
                                  const Eigen::VectorXd& weights) {
    if (weights.size() != pc.num_metapaths())
        throw ValidationError("reduction_score: weight vector length must equal T");
    if ((weights.array() <= 0.0).any())
        throw ValidationError("reduction_score: weights must be positive");
    const BaseMeasure base = mode == ReductionMode::PathCount ? BaseMeasure::PathCount
                             : mode == ReductionMode::PathSimLike ? BaseMeasure::PathSim
                                                                  : BaseMeasure::JoinSim;
    ScoreTable st;
    st.measure_id = std::string(base_measure_name(base)) + "-reduction";
    st.direction = Direction::HigherMoreRelevant;
    std::vector<Eigen::VectorXd> per_mp;
    for (int t = 0; t < pc.num_metapaths(); ++t)
        per_mp.push_back(base_scores(pc, base, t, &st.warnings));
    st.entries.reserve(static_cast<size_t>(pc.num_pairs()));
    // 2P/(P_uu+P_vv) is P over the arithmetic-mean kappa, so the base
    // measures already are the per-meta-path reduction terms.
    for (int s = 0; s < pc.num_pairs(); ++s) {
        double total = 0.0;
        for (int t = 0; t < pc.num_metapaths(); ++t)
            total += weights(t) * per_mp[static_cast<size_t>(t)](s);
        st.entries.push_back({pc.id(pc.pairs[static_cast<size_t>(s)].u),
                              pc.id(pc.pairs[static_cast<size_t>(s)].v), total});
    }
    return st;
}

} // namespace prep
