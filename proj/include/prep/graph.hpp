#pragma once

#include "prep/common.hpp"

#include <fstream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace prep {

/// Typed directed multigraph. Node ids are opaque strings mapped to dense
/// indices in first-appearance order; duplicate edges are kept (each one is a
/// distinct path step). An undirected input relation is expected to appear as
/// two directed lines in the edge file.
struct HinGraph {
    struct Edge {
        int src = -1;
        int dst = -1;
        int type = -1;
    };

    std::vector<std::string> node_ids;
    std::vector<int> node_types; // index into node_type_names
    std::vector<std::string> node_type_names;
    std::vector<Edge> edges;
    std::vector<std::string> edge_type_names;

    std::unordered_map<std::string, int> node_index;
    std::unordered_map<std::string, int> node_type_index;
    std::unordered_map<std::string, int> edge_type_index;

    int num_nodes() const { return static_cast<int>(node_ids.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    int add_node(const std::string& id, const std::string& type) {
        auto [it, fresh] = node_index.try_emplace(id, num_nodes());
        if (!fresh)
            throw ValidationError("duplicate node id '" + id + "'");
        node_ids.push_back(id);
        node_types.push_back(intern(node_type_names, node_type_index, type));
        return it->second;
    }

    void add_edge(const std::string& src, const std::string& dst,
                  const std::string& type) {
        auto s = node_index.find(src);
        auto d = node_index.find(dst);
        if (s == node_index.end() || d == node_index.end()) {
            std::string missing;
            if (s == node_index.end())
                missing += "'" + src + "'";
            if (d == node_index.end())
                missing += std::string(missing.empty() ? "" : ", ") + "'" + dst + "'";
            throw ValidationError("edge endpoint(s) not in node list: " + missing);
        }
        edges.push_back({s->second, d->second,
                         intern(edge_type_names, edge_type_index, type)});
    }

    int node_type_of(int node) const { return node_types[static_cast<size_t>(node)]; }

    /// True when some edge realizes (src_type --edge_type--> dst_type).
    bool schema_has(int src_type, int edge_type, int dst_type) const {
        for (const Edge& e : edges)
            if (e.type == edge_type && node_types[static_cast<size_t>(e.src)] == src_type &&
                node_types[static_cast<size_t>(e.dst)] == dst_type)
                return true;
        return false;
    }

  private:
    static int intern(std::vector<std::string>& names,
                      std::unordered_map<std::string, int>& index,
                      const std::string& name) {
        auto [it, fresh] = index.try_emplace(name, static_cast<int>(names.size()));
        if (fresh)
            names.push_back(name);
        return it->second;
    }
};

/// Typed path template: node types joined by edge types,
/// `[A] --e1--> [B] --e2--> [C] ...`. A symmetric meta-path reads identically
/// reversed; cycle counts (and hence PathSim/JoinSim) only make sense for
/// symmetric ones.
struct MetaPath {
    std::string name;                  // as written in the meta-path file
    std::vector<std::string> node_types; // length L+1
    std::vector<std::string> edge_types; // length L
    bool symmetric = false;

    int length() const { return static_cast<int>(edge_types.size()); }

    bool reads_symmetric() const {
        const size_t n = node_types.size();
        for (size_t i = 0; i < n; ++i)
            if (node_types[i] != node_types[n - 1 - i])
                return false;
        const size_t m = edge_types.size();
        for (size_t i = 0; i < m; ++i)
            if (edge_types[i] != edge_types[m - 1 - i])
                return false;
        return true;
    }
};

/// Parses `node_type:edge_type:node_type:...` (odd token count, >= 3).
inline MetaPath parse_metapath(const std::string& text, bool symmetric) {
    std::vector<std::string> toks = split(text, ':');
    if (toks.size() < 3 || toks.size() % 2 == 0)
        throw ParseError("meta-path '" + text +
                         "': want node_type:edge_type:...:node_type");
    MetaPath mp;
    mp.name = text;
    mp.symmetric = symmetric;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].empty())
            throw ParseError("meta-path '" + text + "': empty type label");
        if (i % 2 == 0)
            mp.node_types.push_back(toks[i]);
        else
            mp.edge_types.push_back(toks[i]);
    }
    if (mp.symmetric && !mp.reads_symmetric())
        throw ValidationError("meta-path '" + text +
                              "' is flagged symmetric but does not read "
                              "identically reversed");
    return mp;
}

/// Checks every step against the graph's observed schema.
inline void validate_metapath(const HinGraph& g, const MetaPath& mp) {
    for (const std::string& nt : mp.node_types)
        if (!g.node_type_index.contains(nt))
            throw ValidationError("meta-path '" + mp.name +
                                  "': unknown node type '" + nt + "'");
    for (int i = 0; i < mp.length(); ++i) {
        auto et = g.edge_type_index.find(mp.edge_types[static_cast<size_t>(i)]);
        if (et == g.edge_type_index.end())
            throw ValidationError("meta-path '" + mp.name +
                                  "': unknown edge type '" +
                                  mp.edge_types[static_cast<size_t>(i)] + "'");
        int st = g.node_type_index.at(mp.node_types[static_cast<size_t>(i)]);
        int dt = g.node_type_index.at(mp.node_types[static_cast<size_t>(i) + 1]);
        if (!g.schema_has(st, et->second, dt))
            throw ValidationError(
                "meta-path '" + mp.name + "': no edge realizes step " +
                mp.node_types[static_cast<size_t>(i)] + ":" +
                mp.edge_types[static_cast<size_t>(i)] + ":" +
                mp.node_types[static_cast<size_t>(i) + 1]);
    }
}

namespace detail {

inline std::vector<std::string> read_lines(const std::string& path,
                                           const char* what) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(std::string(what) + " file '" + path + "' cannot be opened");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.emplace_back(strip_cr(line));
    return lines;
}

} // namespace detail

/// Reads `node_id<TAB>node_type` and `src<TAB>dst<TAB>edge_type` files.
/// Blank lines and lines starting with '#' are skipped.
inline HinGraph load_graph(const std::string& node_file,
                           const std::string& edge_file) {
    HinGraph g;
    size_t lineno = 0;
    for (const std::string& line : detail::read_lines(node_file, "node")) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> f = split(line, '\t');
        if (f.size() != 2 || f[0].empty() || f[1].empty())
            throw ParseError(node_file + ":" + std::to_string(lineno) +
                             ": expected node_id<TAB>node_type");
        g.add_node(f[0], f[1]);
    }
    lineno = 0;
    for (const std::string& line : detail::read_lines(edge_file, "edge")) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> f = split(line, '\t');
        if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty())
            throw ParseError(edge_file + ":" + std::to_string(lineno) +
                             ": expected src_id<TAB>dst_id<TAB>edge_type");
        try {
            g.add_edge(f[0], f[1], f[2]);
        } catch (const ValidationError& e) {
            throw ValidationError(edge_file + ":" + std::to_string(lineno) +
                                  ": " + e.what());
        }
    }
    return g;
}

/// Reads `node_type:edge_type:...:node_type<TAB>{symmetric|asymmetric|1|0}`.
inline std::vector<MetaPath> load_metapaths(const std::string& path) {
    std::vector<MetaPath> out;
    size_t lineno = 0;
    for (const std::string& line : detail::read_lines(path, "meta-path")) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> f = split(line, '\t');
        if (f.size() != 2)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected pattern<TAB>symmetric_flag");
        bool sym;
        if (f[1] == "symmetric" || f[1] == "1")
            sym = true;
        else if (f[1] == "asymmetric" || f[1] == "0")
            sym = false;
        else
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": bad symmetric flag '" + f[1] + "'");
        try {
            out.push_back(parse_metapath(f[0], sym));
        } catch (const std::runtime_error& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace prep
