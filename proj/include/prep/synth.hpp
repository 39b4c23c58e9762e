#pragma once

#include "prep/eval.hpp"
#include "prep/model.hpp"
#include "prep/random.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace prep {

/// Synthetic benchmark instance: groups of nodes (one sub-task each), a
/// random subset of within-group pairs with counts drawn from the generative
/// process, and a planted subset of relevant pairs whose exponential rate is
/// multiplied by rate_boost (suppressing their counts, which the penalty
/// score ranks as most relevant).
struct SynthConfig {
    int num_nodes = 500;
    int num_groups = 10;
    int num_metapaths = 4;
    int num_patterns = 3;      // ground-truth K
    double pair_fraction = 0.5;
    double planted_fraction = 0.05;
    double rate_boost = 6.0;
    double alpha_gen = 2.0;
    uint64_t seed = 1;
    bool with_cycles = true;

    void validate() const {
        if (num_nodes < 4 || num_groups < 1 || num_groups > num_nodes / 2)
            throw ValidationError("synth: bad node/group counts");
        if (num_metapaths < 1 || num_patterns < 1)
            throw ValidationError("synth: bad T or K");
        if (pair_fraction <= 0.0 || pair_fraction > 1.0 || planted_fraction <= 0.0 ||
            planted_fraction >= 1.0)
            throw ValidationError("synth: fractions out of range");
        if (rate_boost <= 1.0)
            throw ValidationError("synth: rate_boost must exceed 1");
    }
};

struct SynthInstance {
    PathCountTable counts;
    std::vector<SubTask> tasks;  // candidates = sampled pairs, planted label 1
    Parameters truth;
    std::vector<char> planted;   // aligned with counts.pairs
};

inline SynthInstance make_synthetic_instance(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const int V = cfg.num_nodes, T = cfg.num_metapaths, K = cfg.num_patterns;

    SynthInstance inst;
    inst.truth.eta.resize(T);
    for (int t = 0; t < T; ++t)
        inst.truth.eta(t) = 0.5 + 1.5 * rng.uniform();
    inst.truth.rho.resize(V);
    for (int z = 0; z < V; ++z)
        inst.truth.rho(z) = std::max(rng.gamma(cfg.alpha_gen), 1e-6);
    inst.truth.theta.resize(K, T);
    for (int k = 0; k < K; ++k) {
        std::vector<double> row = rng.dirichlet(T, 0.5);
        for (int t = 0; t < T; ++t)
            inst.truth.theta(k, t) = std::max(row[static_cast<size_t>(t)], 1e-6);
        inst.truth.theta.row(k) /= inst.truth.theta.row(k).sum();
    }

    PathCountTable& pc = inst.counts;
    int width = 1;
    for (int n = V - 1; n >= 10; n /= 10)
        ++width;
    for (int z = 0; z < V; ++z) {
        std::string num = std::to_string(z);
        pc.node_ids.push_back("n" + std::string(static_cast<size_t>(width) - num.size(), '0') + num);
        pc.node_index.emplace(pc.node_ids.back(), z);
    }
    for (int t = 0; t < T; ++t) {
        pc.metapath_names.push_back("t" + std::to_string(t + 1));
        pc.metapath_symmetric.push_back(true);
    }

    // Group boundaries: near-equal consecutive ranges.
    std::vector<int> group_start(static_cast<size_t>(cfg.num_groups) + 1, 0);
    for (int gidx = 0; gidx <= cfg.num_groups; ++gidx)
        group_start[static_cast<size_t>(gidx)] =
            static_cast<int>((static_cast<long>(V) * gidx) / cfg.num_groups);

    std::vector<std::pair<int, int>> all_pairs;
    std::vector<char> planted_flags;
    inst.tasks.reserve(static_cast<size_t>(cfg.num_groups));
    for (int gidx = 0; gidx < cfg.num_groups; ++gidx) {
        const int lo = group_start[static_cast<size_t>(gidx)];
        const int hi = group_start[static_cast<size_t>(gidx) + 1];
        std::vector<std::pair<int, int>> candidates;
        for (int a = lo; a < hi; ++a)
            for (int b = a + 1; b < hi; ++b)
                candidates.emplace_back(a, b);
        // Fisher-Yates prefix selection.
        const size_t want = std::max<size_t>(
            4, static_cast<size_t>(cfg.pair_fraction * static_cast<double>(candidates.size())));
        for (size_t i = 0; i < want && i < candidates.size(); ++i) {
            const size_t j = i + static_cast<size_t>(rng.uniform() *
                                                     static_cast<double>(candidates.size() - i));
            std::swap(candidates[i], candidates[std::min(j, candidates.size() - 1)]);
        }
        const size_t taken = std::min(want, candidates.size());
        const size_t planted_n =
            std::max<size_t>(1, static_cast<size_t>(cfg.planted_fraction *
                                                    static_cast<double>(taken)));
        SubTask task;
        task.id = "group" + std::to_string(gidx);
        for (size_t i = 0; i < taken; ++i) {
            all_pairs.push_back(candidates[i]);
            const bool is_planted = i < planted_n;
            planted_flags.push_back(is_planted ? 1 : 0);
            task.candidates.emplace_back(pc.node_ids[static_cast<size_t>(candidates[i].first)],
                                         pc.node_ids[static_cast<size_t>(candidates[i].second)]);
            task.labels.push_back(is_planted ? 1 : 0);
        }
        inst.tasks.push_back(std::move(task));
    }

    const int S = static_cast<int>(all_pairs.size());
    inst.truth.phi.resize(S, K);
    for (int s = 0; s < S; ++s) {
        std::vector<double> row = rng.dirichlet(K, 0.3);
        for (int k = 0; k < K; ++k)
            inst.truth.phi(s, k) = std::max(row[static_cast<size_t>(k)], 1e-9);
        inst.truth.phi.row(s) /= inst.truth.phi.row(s).sum();
    }

    const Eigen::MatrixXd psi = inst.truth.psi();
    pc.counts.resize(S, T);
    for (int s = 0; s < S; ++s) {
        auto [u, v] = all_pairs[static_cast<size_t>(s)];
        pc.pairs.push_back({u, v});
        const double tau_s = inst.truth.rho(u) * inst.truth.rho(v);
        const double boost = planted_flags[static_cast<size_t>(s)] ? cfg.rate_boost : 1.0;
        for (int t = 0; t < T; ++t) {
            const double rate = boost * inst.truth.eta(t) / (tau_s * psi(s, t));
            pc.counts(s, t) = rng.exponential(rate);
        }
    }
    pc.cycles = Eigen::MatrixXd::Zero(V, T);
    if (cfg.with_cycles) {
        for (int z = 0; z < V; ++z) {
            std::vector<double> mix = rng.dirichlet(K, 0.3);
            Eigen::RowVectorXd psi_z = Eigen::RowVectorXd::Zero(T);
            for (int k = 0; k < K; ++k)
                psi_z += mix[static_cast<size_t>(k)] * inst.truth.theta.row(k);
            const double tau_z = inst.truth.rho(z) * inst.truth.rho(z);
            for (int t = 0; t < T; ++t)
                pc.cycles(z, t) = rng.exponential(inst.truth.eta(t) / (tau_z * psi_z(t)));
        }
    }
    pc.rebuild_lookup();
    inst.planted = std::move(planted_flags);
    return inst;
}

/// Labels in the 4-column file form consumed by `eval`.
inline void write_synth_labels(std::ostream& out, const SynthInstance& inst) {
    out << "# prep " << kToolVersion << " labels\n";
    for (const SubTask& t : inst.tasks)
        for (size_t i = 0; i < t.candidates.size(); ++i)
            out << t.candidates[i].first << "\t" << t.candidates[i].second << "\t"
                << t.labels[i] << "\t" << t.id << "\n";
}

} // namespace prep
