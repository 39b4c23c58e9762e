#pragma once

#include "prep/common.hpp"
#include "prep/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prep {

/// Observed path counts P over nontrivial unordered node pairs x meta-paths,
/// plus per-node cycle counts. Counts are reals (weighted-HIN ready) though
/// the ingestion path only produces integers.
///
/// Pairs are canonicalized so the first id is the lexicographically smaller
/// one, and the stored count is taken from that direction (equal to the
/// reverse for symmetric meta-paths). Walks may revisit nodes: counting uses
/// matrix-product semantics, the same convention PathSim implies.
struct PathCountTable {
    struct Pair {
        int u = -1; // table node index, id(u) < id(v)
        int v = -1;
    };

    std::vector<std::string> node_ids;
    std::unordered_map<std::string, int> node_index;
    std::vector<std::string> metapath_names;
    std::vector<bool> metapath_symmetric;

    std::vector<Pair> pairs; // sorted by (id(u), id(v))
    Eigen::MatrixXd counts;  // |S| x T
    Eigen::MatrixXd cycles;  // |V| x T

    std::unordered_map<int64_t, int> pair_index; // key(u,v) -> row
    std::vector<std::vector<int>> pairs_of_node; // node -> row indices

    int num_pairs() const { return static_cast<int>(pairs.size()); }
    int num_nodes() const { return static_cast<int>(node_ids.size()); }
    int num_metapaths() const { return static_cast<int>(metapath_names.size()); }

    static int64_t key(int u, int v) {
        return (static_cast<int64_t>(u) << 32) | static_cast<uint32_t>(v);
    }

    const std::string& id(int node) const { return node_ids[static_cast<size_t>(node)]; }

    int node_of(const std::string& node_id) const {
        auto it = node_index.find(node_id);
        return it == node_index.end() ? -1 : it->second;
    }

    /// Row index for the unordered pair, or -1. Accepts either order.
    int row_of(int u, int v) const {
        if (u == v || u < 0 || v < 0)
            return -1;
        if (!(id(u) < id(v)))
            std::swap(u, v);
        auto it = pair_index.find(key(u, v));
        return it == pair_index.end() ? -1 : it->second;
    }

    int degree(int node) const {
        return static_cast<int>(pairs_of_node[static_cast<size_t>(node)].size());
    }

    void rebuild_lookup() {
        pair_index.clear();
        pairs_of_node.assign(static_cast<size_t>(num_nodes()), {});
        for (int s = 0; s < num_pairs(); ++s) {
            pair_index.emplace(key(pairs[static_cast<size_t>(s)].u,
                                   pairs[static_cast<size_t>(s)].v), s);
            pairs_of_node[static_cast<size_t>(pairs[static_cast<size_t>(s)].u)].push_back(s);
            pairs_of_node[static_cast<size_t>(pairs[static_cast<size_t>(s)].v)].push_back(s);
        }
    }
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;

inline SpMat step_matrix(const HinGraph& g, const MetaPath& mp, int step) {
    const int n = g.num_nodes();
    const int st = g.node_type_index.at(mp.node_types[static_cast<size_t>(step)]);
    const int dt = g.node_type_index.at(mp.node_types[static_cast<size_t>(step) + 1]);
    const int et = g.edge_type_index.at(mp.edge_types[static_cast<size_t>(step)]);
    std::vector<Eigen::Triplet<double>> trips;
    for (const HinGraph::Edge& e : g.edges)
        if (e.type == et && g.node_type_of(e.src) == st && g.node_type_of(e.dst) == dt)
            trips.emplace_back(e.src, e.dst, 1.0);
    SpMat a(n, n);
    a.setFromTriplets(trips.begin(), trips.end()); // duplicates accumulate
    return a;
}

/// Chained sparse adjacency product over the meta-path's steps.
inline SpMat metapath_counts(const HinGraph& g, const MetaPath& mp) {
    SpMat m = step_matrix(g, mp, 0);
    for (int i = 1; i < mp.length(); ++i) {
        SpMat next = step_matrix(g, mp, i);
        m = (m * next).pruned();
    }
    return m;
}

} // namespace detail

/// Counts path instances for every meta-path and keeps the nontrivial pairs.
/// Per-meta-path jobs are independent; the merge is single-writer.
inline PathCountTable count_paths(const HinGraph& g,
                                  const std::vector<MetaPath>& metapaths) {
    if (metapaths.empty())
        throw ValidationError("count_paths: no meta-paths declared");
    for (const MetaPath& mp : metapaths)
        validate_metapath(g, mp);

    const int T = static_cast<int>(metapaths.size());
    const int n = g.num_nodes();
    std::vector<detail::SpMat> products(static_cast<size_t>(T));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int t = 0; t < T; ++t)
        products[static_cast<size_t>(t)] =
            detail::metapath_counts(g, metapaths[static_cast<size_t>(t)]);

    PathCountTable pc;
    pc.node_ids = g.node_ids;
    pc.node_index = g.node_index;
    for (const MetaPath& mp : metapaths) {
        pc.metapath_names.push_back(mp.name);
        pc.metapath_symmetric.push_back(mp.symmetric);
    }

    // Merge: pair (i, j) is stored in the direction of the smaller node id.
    std::map<std::pair<std::string, std::string>, std::pair<int, int>> pair_rows;
    pc.cycles = Eigen::MatrixXd::Zero(n, T);
    for (int t = 0; t < T; ++t) {
        const detail::SpMat& m = products[static_cast<size_t>(t)];
        for (int col = 0; col < m.outerSize(); ++col) {
            for (detail::SpMat::InnerIterator it(m, col); it; ++it) {
                const int i = static_cast<int>(it.row());
                const int j = static_cast<int>(it.col());
                if (it.value() <= 0.0)
                    continue;
                if (i == j)
                    pc.cycles(i, t) = it.value();
                else if (g.node_ids[static_cast<size_t>(i)] < g.node_ids[static_cast<size_t>(j)])
                    pair_rows.try_emplace({g.node_ids[static_cast<size_t>(i)],
                                           g.node_ids[static_cast<size_t>(j)]},
                                          std::pair<int, int>{i, j});
            }
        }
    }

    pc.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pair_rows.size()), T);
    int s = 0;
    for (const auto& [ids, uv] : pair_rows) {
        pc.pairs.push_back({uv.first, uv.second});
        for (int t = 0; t < T; ++t)
            pc.counts(s, t) = products[static_cast<size_t>(t)].coeff(uv.first, uv.second);
        ++s;
    }
    pc.rebuild_lookup();
    return pc;
}

/// Total path count per node: sum over all pairs containing it. Nodes in no
/// pair get 0.
inline Eigen::VectorXd node_total_counts(const PathCountTable& pc) {
    if (pc.num_pairs() == 0)
        throw ValidationError("node_total_counts: table has no pairs");
    Eigen::VectorXd totals = Eigen::VectorXd::Zero(pc.num_nodes());
    for (int s = 0; s < pc.num_pairs(); ++s) {
        const double rowsum = pc.counts.row(s).sum();
        totals(pc.pairs[static_cast<size_t>(s)].u) += rowsum;
        totals(pc.pairs[static_cast<size_t>(s)].v) += rowsum;
    }
    return totals;
}

// ---------------------------------------------------------------------------
// Count-table file format: '#' header lines, then `u<TAB>v<TAB>t<TAB>count`
// rows sorted by (u, v, t) with t 1-based. Cycle counts appear as u == v rows
// (nonzero cells only); pair rows carry all T cells.

inline void write_count_table(std::ostream& out, const PathCountTable& pc,
                              const std::vector<std::string>& header_lines = {}) {
    out << "# prep " << kToolVersion << " count-table\n";
    for (const std::string& h : header_lines)
        out << "# " << h << "\n";
    for (int t = 0; t < pc.num_metapaths(); ++t)
        out << "# metapath\t" << (t + 1) << "\t" << pc.metapath_names[static_cast<size_t>(t)]
            << "\t" << (pc.metapath_symmetric[static_cast<size_t>(t)] ? "symmetric" : "asymmetric")
            << "\n";

    struct Row {
        const std::string* u;
        const std::string* v;
        int t;
        double c;
    };
    std::vector<Row> rows;
    rows.reserve(static_cast<size_t>(pc.num_pairs()) * static_cast<size_t>(pc.num_metapaths()));
    for (int s = 0; s < pc.num_pairs(); ++s)
        for (int t = 0; t < pc.num_metapaths(); ++t)
            rows.push_back({&pc.id(pc.pairs[static_cast<size_t>(s)].u),
                            &pc.id(pc.pairs[static_cast<size_t>(s)].v), t + 1,
                            pc.counts(s, t)});
    for (int z = 0; z < pc.num_nodes(); ++z)
        for (int t = 0; t < pc.num_metapaths(); ++t)
            if (pc.cycles(z, t) > 0.0)
                rows.push_back({&pc.id(z), &pc.id(z), t + 1, pc.cycles(z, t)});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (*a.u != *b.u)
            return *a.u < *b.u;
        if (*a.v != *b.v)
            return *a.v < *b.v;
        return a.t < b.t;
    });
    for (const Row& r : rows)
        out << *r.u << "\t" << *r.v << "\t" << r.t << "\t" << fmt_double(r.c) << "\n";
}

inline PathCountTable read_count_table(std::istream& in,
                                       const std::string& name = "<count-table>") {
    PathCountTable pc;
    std::string line;
    size_t lineno = 0;
    struct Row {
        std::string u, v;
        int t;
        double c;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        std::string l{strip_cr(line)};
        if (l.empty())
            continue;
        if (l[0] == '#') {
            std::vector<std::string> f = split(l.size() > 2 ? l.substr(2) : "", '\t');
            if (f.size() == 4 && f[0] == "metapath") {
                pc.metapath_names.push_back(f[2]);
                pc.metapath_symmetric.push_back(f[3] == "symmetric");
            }
            continue;
        }
        std::vector<std::string> f = split(l, '\t');
        const std::string ctx = name + ":" + std::to_string(lineno);
        if (f.size() != 4)
            throw ParseError(ctx + ": expected u<TAB>v<TAB>t<TAB>count");
        rows.push_back({f[0], f[1], static_cast<int>(parse_long(f[2], ctx)),
                        parse_double(f[3], ctx)});
    }
    if (pc.metapath_names.empty()) { // header-less files: infer T
        int maxt = 0;
        for (const Row& r : rows)
            maxt = std::max(maxt, r.t);
        for (int t = 0; t < maxt; ++t) {
            pc.metapath_names.push_back("t" + std::to_string(t + 1));
            pc.metapath_symmetric.push_back(true);
        }
    }
    const int T = pc.num_metapaths();
    auto intern_node = [&](const std::string& node_id) {
        auto [it, fresh] = pc.node_index.try_emplace(node_id, pc.num_nodes());
        if (fresh)
            pc.node_ids.push_back(node_id);
        return it->second;
    };
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<int, double>>> pair_cells;
    std::vector<Row> cycle_rows;
    for (const Row& r : rows) {
        if (r.t < 1 || r.t > T)
            throw ValidationError(name + ": meta-path index " + std::to_string(r.t) +
                                  " out of range 1.." + std::to_string(T));
        if (r.c < 0.0)
            throw ValidationError(name + ": negative count for (" + r.u + ", " + r.v + ")");
        if (r.u == r.v) {
            cycle_rows.push_back(r);
            continue;
        }
        auto k = r.u < r.v ? std::make_pair(r.u, r.v) : std::make_pair(r.v, r.u);
        pair_cells[k].emplace_back(r.t - 1, r.c);
    }
    // Register pair nodes in row order, then cycle-only nodes.
    for (const auto& [ids, cells] : pair_cells) {
        intern_node(ids.first);
        intern_node(ids.second);
    }
    for (const Row& r : cycle_rows)
        intern_node(r.u);

    pc.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pair_cells.size()), T);
    int s = 0;
    for (const auto& [ids, cells] : pair_cells) {
        pc.pairs.push_back({pc.node_index.at(ids.first), pc.node_index.at(ids.second)});
        for (const auto& [t, c] : cells)
            pc.counts(s, t) = c;
        if (pc.counts.row(s).sum() <= 0.0)
            throw ValidationError(name + ": pair (" + ids.first + ", " + ids.second +
                                  ") has no positive count (trivial pairs must be omitted)");
        ++s;
    }
    pc.cycles = Eigen::MatrixXd::Zero(pc.num_nodes(), T);
    for (const Row& r : cycle_rows)
        pc.cycles(pc.node_index.at(r.u), r.t - 1) = r.c;
    pc.rebuild_lookup();
    return pc;
}

inline void write_count_table_file(const std::string& path, const PathCountTable& pc,
                                   const std::vector<std::string>& header_lines = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    write_count_table(out, pc, header_lines);
}

inline PathCountTable read_count_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("count-table file '" + path + "' cannot be opened");
    return read_count_table(in, path);
}

} // namespace prep
