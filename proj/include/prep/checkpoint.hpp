#pragma once

#include "prep/common.hpp"
#include "prep/model.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace prep {

/// Fitted parameters plus the hyperparameters that produced them, as stored
/// in a checkpoint file.
struct Checkpoint {
    Parameters params;
    double alpha = 1.0;
    double beta = 1e-2;
    double delta = 1e-50;
    int num_patterns = 1;
    uint64_t seed = 0;
    std::string variant = "full";
};

/// Plain-text sections keyed by node id (rho) and pair (phi); all doubles are
/// printed with enough digits to round-trip bit-exactly.
inline void write_checkpoint(std::ostream& out, const PathCountTable& pc,
                             const Checkpoint& ck,
                             const std::vector<std::string>& header_lines = {}) {
    check_shapes(pc, ck.params);
    out << "# prep " << kToolVersion << " checkpoint\n";
    for (const std::string& h : header_lines)
        out << "# " << h << "\n";
    out << "[meta]\n";
    out << "alpha\t" << fmt_double(ck.alpha) << "\n";
    out << "beta\t" << fmt_double(ck.beta) << "\n";
    out << "delta\t" << fmt_double(ck.delta) << "\n";
    out << "K\t" << ck.num_patterns << "\n";
    out << "seed\t" << ck.seed << "\n";
    out << "variant\t" << ck.variant << "\n";
    out << "[eta]\n";
    for (int t = 0; t < ck.params.num_metapaths(); ++t)
        out << (t + 1) << "\t" << fmt_double(ck.params.eta(t)) << "\n";
    out << "[rho]\n";
    for (int z = 0; z < pc.num_nodes(); ++z)
        out << pc.id(z) << "\t" << fmt_double(ck.params.rho(z)) << "\n";
    out << "[phi]\n";
    for (int s = 0; s < pc.num_pairs(); ++s) {
        out << pc.id(pc.pairs[static_cast<size_t>(s)].u) << "\t"
            << pc.id(pc.pairs[static_cast<size_t>(s)].v);
        for (int k = 0; k < ck.params.num_patterns(); ++k)
            out << "\t" << fmt_double(ck.params.phi(s, k));
        out << "\n";
    }
    out << "[theta]\n";
    for (int k = 0; k < ck.params.num_patterns(); ++k) {
        out << (k + 1);
        for (int t = 0; t < ck.params.num_metapaths(); ++t)
            out << "\t" << fmt_double(ck.params.theta(k, t));
        out << "\n";
    }
}

inline Checkpoint read_checkpoint(std::istream& in, const PathCountTable& pc,
                                  const std::string& name = "<checkpoint>") {
    Checkpoint ck;
    const int T = pc.num_metapaths();
    ck.params.rho = Eigen::VectorXd::Zero(pc.num_nodes());
    std::vector<bool> rho_seen(static_cast<size_t>(pc.num_nodes()), false);
    std::vector<bool> phi_seen(static_cast<size_t>(pc.num_pairs()), false);
    std::map<int, Eigen::RowVectorXd> theta_rows;
    std::map<int, double> eta_vals;

    std::string section, line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string l{strip_cr(line)};
        if (l.empty() || l[0] == '#')
            continue;
        if (l.front() == '[' && l.back() == ']') {
            section = l.substr(1, l.size() - 2);
            continue;
        }
        std::vector<std::string> f = split(l, '\t');
        const std::string ctx = name + ":" + std::to_string(lineno);
        if (section == "meta") {
            if (f.size() != 2)
                throw ParseError(ctx + ": expected key<TAB>value");
            if (f[0] == "alpha")
                ck.alpha = parse_double(f[1], ctx);
            else if (f[0] == "beta")
                ck.beta = parse_double(f[1], ctx);
            else if (f[0] == "delta")
                ck.delta = parse_double(f[1], ctx);
            else if (f[0] == "K")
                ck.num_patterns = static_cast<int>(parse_long(f[1], ctx));
            else if (f[0] == "seed")
                ck.seed = parse_uint64(f[1], ctx);
            else if (f[0] == "variant")
                ck.variant = f[1];
            else
                throw ParseError(ctx + ": unknown meta key '" + f[0] + "'");
        } else if (section == "eta") {
            if (f.size() != 2)
                throw ParseError(ctx + ": expected t<TAB>value");
            eta_vals[static_cast<int>(parse_long(f[0], ctx))] = parse_double(f[1], ctx);
        } else if (section == "rho") {
            if (f.size() != 2)
                throw ParseError(ctx + ": expected node_id<TAB>value");
            const int z = pc.node_of(f[0]);
            if (z < 0)
                throw ValidationError(ctx + ": node '" + f[0] + "' not in the count table");
            ck.params.rho(z) = parse_double(f[1], ctx);
            rho_seen[static_cast<size_t>(z)] = true;
        } else if (section == "phi") {
            if (static_cast<int>(f.size()) < 3)
                throw ParseError(ctx + ": expected u<TAB>v<TAB>phi values");
            const int s = pc.row_of(pc.node_of(f[0]), pc.node_of(f[1]));
            if (s < 0)
                throw ValidationError(ctx + ": pair (" + f[0] + ", " + f[1] +
                                      ") not in the count table");
            const int K = static_cast<int>(f.size()) - 2;
            if (ck.params.phi.rows() == 0)
                ck.params.phi = Eigen::MatrixXd::Zero(pc.num_pairs(), K);
            if (K != ck.params.phi.cols())
                throw ParseError(ctx + ": inconsistent phi row width");
            for (int k = 0; k < K; ++k)
                ck.params.phi(s, k) = parse_double(f[static_cast<size_t>(k) + 2], ctx);
            phi_seen[static_cast<size_t>(s)] = true;
        } else if (section == "theta") {
            if (static_cast<int>(f.size()) != T + 1)
                throw ParseError(ctx + ": expected k followed by " + std::to_string(T) +
                                 " theta values");
            Eigen::RowVectorXd row(T);
            for (int t = 0; t < T; ++t)
                row(t) = parse_double(f[static_cast<size_t>(t) + 1], ctx);
            theta_rows[static_cast<int>(parse_long(f[0], ctx))] = row;
        } else {
            throw ParseError(ctx + ": content outside a known section");
        }
    }

    if (static_cast<int>(eta_vals.size()) != T)
        throw ValidationError(name + ": eta section must cover all " + std::to_string(T) +
                              " meta-paths");
    ck.params.eta.resize(T);
    for (const auto& [t, v] : eta_vals) {
        if (t < 1 || t > T)
            throw ValidationError(name + ": eta index out of range");
        ck.params.eta(t - 1) = v;
    }
    for (int z = 0; z < pc.num_nodes(); ++z)
        if (!rho_seen[static_cast<size_t>(z)])
            throw ValidationError(name + ": missing rho for node '" + pc.id(z) + "'");
    for (int s = 0; s < pc.num_pairs(); ++s)
        if (!phi_seen[static_cast<size_t>(s)])
            throw ValidationError(name + ": missing phi row for a table pair");
    const int K = static_cast<int>(ck.params.phi.cols());
    if (static_cast<int>(theta_rows.size()) != K)
        throw ValidationError(name + ": theta section must cover all " + std::to_string(K) +
                              " patterns");
    ck.params.theta.resize(K, T);
    for (const auto& [k, row] : theta_rows) {
        if (k < 1 || k > K)
            throw ValidationError(name + ": theta index out of range");
        ck.params.theta.row(k - 1) = row;
    }
    return ck;
}

inline void write_checkpoint_file(const std::string& path, const PathCountTable& pc,
                                  const Checkpoint& ck,
                                  const std::vector<std::string>& header_lines = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    write_checkpoint(out, pc, ck, header_lines);
}

inline Checkpoint read_checkpoint_file(const std::string& path, const PathCountTable& pc) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("checkpoint file '" + path + "' cannot be opened");
    return read_checkpoint(in, pc, path);
}

} // namespace prep
