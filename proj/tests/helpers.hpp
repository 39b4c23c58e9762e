#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include "prep/graph.hpp"
#include "prep/metrics.hpp"
#include "prep/model.hpp"
#include "prep/random.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

/// Self-cleaning scratch directory for file-based tests.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path = std::filesystem::temp_directory_path() /
               ("prep_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = (path / name).string();
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }
    std::string at(const std::string& name) const { return (path / name).string(); }
};

// --------------------------------------------------------------------------
// Random model instances.

inline prep::PathCountTable random_table(prep::Rng& rng, int num_pairs, int T,
                                         int num_nodes, bool with_cycles = false,
                                         double lo = 0.1, double hi = 10.0) {
    prep::PathCountTable pc;
    int width = 1;
    for (int n = num_nodes - 1; n >= 10; n /= 10)
        ++width;
    for (int z = 0; z < num_nodes; ++z) {
        std::string num = std::to_string(z);
        pc.node_ids.push_back("n" + std::string(static_cast<size_t>(width) - num.size(), '0') + num);
        pc.node_index.emplace(pc.node_ids.back(), z);
    }
    for (int t = 0; t < T; ++t) {
        pc.metapath_names.push_back("t" + std::to_string(t + 1));
        pc.metapath_symmetric.push_back(true);
    }
    // Distinct random pairs; a ring first so every node is covered.
    std::vector<std::pair<int, int>> pairs;
    std::vector<char> used(static_cast<size_t>(num_nodes) * static_cast<size_t>(num_nodes), 0);
    auto add = [&](int a, int b) {
        if (a == b)
            return false;
        if (a > b)
            std::swap(a, b);
        char& flag = used[static_cast<size_t>(a) * static_cast<size_t>(num_nodes) +
                          static_cast<size_t>(b)];
        if (flag)
            return false;
        flag = 1;
        pairs.emplace_back(a, b);
        return true;
    };
    for (int z = 0; z + 1 < num_nodes && static_cast<int>(pairs.size()) < num_pairs; ++z)
        add(z, z + 1);
    int guard = 0;
    while (static_cast<int>(pairs.size()) < num_pairs && guard++ < 100000) {
        const int a = static_cast<int>(rng.uniform() * num_nodes);
        const int b = static_cast<int>(rng.uniform() * num_nodes);
        add(std::min(a, num_nodes - 1), std::min(b, num_nodes - 1));
    }
    pc.counts.resize(static_cast<Eigen::Index>(pairs.size()), T);
    for (auto& [a, b] : pairs)
        pc.pairs.push_back({a, b});
    for (Eigen::Index s = 0; s < pc.counts.rows(); ++s)
        for (int t = 0; t < T; ++t)
            pc.counts(s, t) = lo + (hi - lo) * rng.uniform();
    pc.cycles = Eigen::MatrixXd::Zero(num_nodes, T);
    if (with_cycles)
        for (int z = 0; z < num_nodes; ++z)
            for (int t = 0; t < T; ++t)
                pc.cycles(z, t) = 0.5 + 4.5 * rng.uniform();
    pc.rebuild_lookup();
    return pc;
}

/// All unordered pairs over the nodes (complete pair set).
inline prep::PathCountTable complete_table(prep::Rng& rng, int num_nodes, int T,
                                           double lo = 0.1, double hi = 10.0) {
    const int S = num_nodes * (num_nodes - 1) / 2;
    return random_table(rng, S, T, num_nodes, false, lo, hi);
}

/// Positive parameters in [lo, hi]; rows are not normalized (the objective
/// and gradients are defined off the simplex, which finite differences need).
inline prep::Parameters random_params(prep::Rng& rng, const prep::PathCountTable& pc,
                                      int K, double lo = 0.1, double hi = 10.0) {
    prep::Parameters p;
    auto u = [&] { return lo + (hi - lo) * rng.uniform(); };
    p.eta.resize(pc.num_metapaths());
    for (int t = 0; t < pc.num_metapaths(); ++t)
        p.eta(t) = u();
    p.rho.resize(pc.num_nodes());
    for (int z = 0; z < pc.num_nodes(); ++z)
        p.rho(z) = u();
    p.phi.resize(pc.num_pairs(), K);
    for (int s = 0; s < pc.num_pairs(); ++s)
        for (int k = 0; k < K; ++k)
            p.phi(s, k) = u();
    p.theta.resize(K, pc.num_metapaths());
    for (int k = 0; k < K; ++k)
        for (int t = 0; t < pc.num_metapaths(); ++t)
            p.theta(k, t) = u();
    return p;
}

/// Same, but with Phi/Theta rows normalized onto the simplex (valid model
/// state for the block updates).
inline prep::Parameters random_simplex_params(prep::Rng& rng, const prep::PathCountTable& pc,
                                              int K, double lo = 0.1, double hi = 10.0) {
    prep::Parameters p = random_params(rng, pc, K, lo, hi);
    for (Eigen::Index s = 0; s < p.phi.rows(); ++s)
        p.phi.row(s) /= p.phi.row(s).sum();
    for (Eigen::Index k = 0; k < p.theta.rows(); ++k)
        p.theta.row(k) /= p.theta.row(k).sum();
    return p;
}

// --------------------------------------------------------------------------
// Path-counting oracle: depth-first walk enumeration over the typed steps.

inline double count_walks_dfs(const prep::HinGraph& g, const prep::MetaPath& mp,
                              int from, int to) {
    if (g.node_type_of(from) != g.node_type_index.at(mp.node_types.front()) ||
        g.node_type_of(to) != g.node_type_index.at(mp.node_types.back()))
        return 0.0;
    std::function<double(int, int)> walk = [&](int node, int step) -> double {
        if (step == mp.length())
            return node == to ? 1.0 : 0.0;
        const int et = g.edge_type_index.at(mp.edge_types[static_cast<size_t>(step)]);
        const int dt = g.node_type_index.at(mp.node_types[static_cast<size_t>(step) + 1]);
        double total = 0.0;
        for (const prep::HinGraph::Edge& e : g.edges)
            if (e.src == node && e.type == et && g.node_type_of(e.dst) == dt)
                total += walk(e.dst, step + 1);
        return total;
    };
    return walk(from, 0);
}

// --------------------------------------------------------------------------
// Scalar golden-section minimizer for the 1-D block-optimality oracles.

inline double golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, int iters = 200) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// --------------------------------------------------------------------------
// Euclidean projection onto {x >= delta, sum = 1} by exhaustive active-set
// enumeration with a KKT check; exact for K <= ~20.

inline Eigen::VectorXd qp_project_oracle(const Eigen::VectorXd& z, double delta) {
    const int k = static_cast<int>(z.size());
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        int free_count = 0;
        double free_sum = 0.0;
        for (int i = 0; i < k; ++i)
            if (!(mask & (1u << i))) {
                ++free_count;
                free_sum += z(i);
            }
        if (free_count == 0)
            continue;
        const int pinned = k - free_count;
        const double lambda = (1.0 - delta * pinned - free_sum) / free_count;
        bool ok = true;
        Eigen::VectorXd x(k);
        for (int i = 0; i < k && ok; ++i) {
            if (mask & (1u << i)) {
                x(i) = delta;
                ok = (delta - z(i) - lambda) >= -1e-11; // dual feasibility
            } else {
                x(i) = z(i) + lambda;
                ok = x(i) >= delta - 1e-11; // primal feasibility
            }
        }
        if (ok)
            return x;
    }
    throw std::logic_error("qp_project_oracle: no KKT point found");
}

// --------------------------------------------------------------------------
// Metric oracles.

inline double auc_bruteforce(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
    double wins = 0.0;
    long npos = 0, nneg = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i])
            continue;
        ++npos;
        for (size_t j = 0; j < labels.size(); ++j) {
            if (labels[j])
                continue;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    for (int l : labels)
        nneg += l ? 0 : 1;
    return wins / (static_cast<double>(npos) * static_cast<double>(nneg));
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::vector<double> ra = prep::detail::mean_ranks_desc(a);
    const std::vector<double> rb = prep::detail::mean_ranks_desc(b);
    const size_t n = ra.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

// --------------------------------------------------------------------------
// Central finite differences of the objective in one coordinate.

inline double fd_objective(const prep::PathCountTable& pc, prep::Parameters& p,
                           const prep::Hyperparams& h, double* coord) {
    const double x = *coord;
    const double step = 1e-6 * std::max(1.0, std::abs(x));
    *coord = x + step;
    const double up = prep::objective(pc, p, h);
    *coord = x - step;
    const double down = prep::objective(pc, p, h);
    *coord = x;
    return (up - down) / (2.0 * step);
}

} // namespace testutil
