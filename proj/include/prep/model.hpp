#pragma once

#include "prep/common.hpp"
#include "prep/path_count.hpp"
#include "prep/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace prep {

inline constexpr double kEtaClamp = 1e6;   // selectivity for never-instantiated meta-paths
inline constexpr double kRhoFloor = 1e-12; // visibility floor (positivity)

enum class ConvergenceOn { Objective, Parameters };

/// Model hyperparameters and solver knobs. Defaults are the documented ones;
/// everything is overridable from the CLI/config surface.
struct Hyperparams {
    int num_patterns = 1;     // K
    double alpha = 1.0;       // gamma shape of the visibility prior
    double beta = 1e-2;       // Dirichlet concentration, in (0,1)
    double delta = 1e-50;     // simplex lower bound
    uint64_t seed = 1;

    double outer_tol = 1e-6;
    int max_outer_iters = 500;
    double rho_tol = 1e-6;
    int max_rho_sweeps = 100;
    int max_pgd_steps = 50;
    int max_halvings = 30;
    double armijo_c = 1e-4;
    double pgd_init_step = 1.0;
    ConvergenceOn convergence = ConvergenceOn::Objective;

    void validate() const {
        if (num_patterns < 1)
            throw ValidationError("hyperparams: K must be >= 1");
        if (!(alpha > 0.0))
            throw ValidationError("hyperparams: alpha must be positive");
        if (!(beta > 0.0) || !(beta < 1.0))
            throw ValidationError("hyperparams: beta must lie in (0, 1)");
        if (!(delta > 0.0) || delta * num_patterns >= 1.0)
            throw ValidationError("hyperparams: need 0 < delta < 1/K");
        if (!(outer_tol > 0.0) || !(rho_tol > 0.0))
            throw ValidationError("hyperparams: tolerances must be positive");
        if (max_outer_iters < 1 || max_rho_sweeps < 1 || max_pgd_steps < 1 ||
            max_halvings < 1)
            throw ValidationError("hyperparams: iteration caps must be >= 1");
    }
};

/// Model state: path selectivity eta (T), node visibility rho (|V|), pattern
/// choices Phi (|S| x K, rows in the delta-shrunken simplex) and generating
/// patterns Theta (K x T, rows likewise). Derived quantities (tau, psi, xi)
/// are computed on demand.
struct Parameters {
    Eigen::VectorXd eta;
    Eigen::VectorXd rho;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd theta;

    int num_metapaths() const { return static_cast<int>(eta.size()); }
    int num_nodes() const { return static_cast<int>(rho.size()); }
    int num_patterns() const { return static_cast<int>(theta.rows()); }
    int num_pairs() const { return static_cast<int>(phi.rows()); }

    Eigen::MatrixXd psi() const { return phi * theta; }
};

inline void check_shapes(const PathCountTable& pc, const Parameters& p) {
    if (p.num_metapaths() != pc.num_metapaths() || p.num_nodes() != pc.num_nodes() ||
        p.num_pairs() != pc.num_pairs() || p.theta.cols() != p.eta.size() ||
        p.phi.cols() != p.theta.rows())
        throw ValidationError("parameters do not match the count table's shape");
}

/// Strict invariant check used after fitting and on checkpoint load:
/// positive eta/rho, simplex rows bounded below by delta and summing to 1.
inline void validate_parameters(const PathCountTable& pc, const Parameters& p,
                                const Hyperparams& h) {
    check_shapes(pc, p);
    if ((p.eta.array() <= 0.0).any())
        throw ValidationError("parameters: eta must be positive");
    if ((p.rho.array() <= 0.0).any())
        throw ValidationError("parameters: rho must be positive");
    auto check_rows = [&](const Eigen::MatrixXd& m, const char* what) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if ((m.row(r).array() < h.delta * (1.0 - 1e-9)).any())
                throw ValidationError(std::string("parameters: ") + what +
                                      " row below the delta bound");
            if (std::abs(m.row(r).sum() - 1.0) > 1e-12)
                throw ValidationError(std::string("parameters: ") + what +
                                      " row does not sum to 1");
        }
    };
    check_rows(p.phi, "phi");
    check_rows(p.theta, "theta");
}

inline Eigen::VectorXd pair_visibility(const PathCountTable& pc, const Parameters& p) {
    Eigen::VectorXd tau(pc.num_pairs());
    for (int s = 0; s < pc.num_pairs(); ++s)
        tau(s) = p.rho(pc.pairs[static_cast<size_t>(s)].u) *
                 p.rho(pc.pairs[static_cast<size_t>(s)].v);
    return tau;
}

/// xi_s = sum_t eta_t P_st / psi_st, held fixed through a rho phase.
inline Eigen::VectorXd pair_xi(const PathCountTable& pc, const Parameters& p) {
    return (pc.counts.array() / p.psi().array()).matrix() * p.eta;
}

namespace detail {

/// Data-dependent part of the objective that moves with Theta (and Phi):
/// sum_st [ log psi + eta_t P_st / (tau_s psi_st) ]. Returns +inf off-domain,
/// which makes the line searches reject the step.
inline double coupling_objective(const Eigen::MatrixXd& counts,
                                 const Eigen::VectorXd& tau,
                                 const Eigen::VectorXd& eta,
                                 const Eigen::MatrixXd& psi) {
    if ((psi.array() <= 0.0).any())
        return std::numeric_limits<double>::infinity();
    const double logs = psi.array().log().sum();
    const Eigen::VectorXd xi = (counts.array() / psi.array()).matrix() * eta;
    const double ratio = (xi.array() / tau.array()).sum();
    const double v = logs + ratio;
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// Per-row objective for the parallel Phi updates: the row's Dirichlet term
/// plus its slice of the coupling term.
inline double phi_row_objective(const Eigen::RowVectorXd& count_row, double tau_s,
                                const Eigen::VectorXd& eta,
                                const Eigen::MatrixXd& theta,
                                const Eigen::RowVectorXd& phi_row, double beta) {
    if ((phi_row.array() <= 0.0).any())
        return std::numeric_limits<double>::infinity();
    const Eigen::RowVectorXd psi_row = phi_row * theta;
    if ((psi_row.array() <= 0.0).any())
        return std::numeric_limits<double>::infinity();
    double v = -(beta - 1.0) * phi_row.array().log().sum();
    v += psi_row.array().log().sum();
    v += (count_row.array() * eta.transpose().array() / psi_row.array()).sum() / tau_s;
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Penalized negative log-likelihood of the model (the MAP objective),
/// up to the constant offset of the dropped normalizers.
inline double objective(const PathCountTable& pc, const Parameters& p,
                        const Hyperparams& h) {
    check_shapes(pc, p);
    if ((p.eta.array() <= 0.0).any() || (p.rho.array() <= 0.0).any())
        throw ValidationError("objective: eta and rho must be positive");
    if ((p.phi.array() <= 0.0).any())
        throw ValidationError("objective: phi must be positive (delta bound)");

    const Eigen::MatrixXd psi = p.psi();
    const Eigen::VectorXd tau = pair_visibility(pc, p);

    double o = (p.rho.array() - (h.alpha - 1.0) * p.rho.array().log()).sum();
    o -= (h.beta - 1.0) * p.phi.array().log().sum();
    double logrho_pairs = 0.0;
    for (int s = 0; s < pc.num_pairs(); ++s)
        logrho_pairs += std::log(p.rho(pc.pairs[static_cast<size_t>(s)].u)) +
                        std::log(p.rho(pc.pairs[static_cast<size_t>(s)].v));
    o += pc.num_metapaths() * logrho_pairs;
    o -= pc.num_pairs() * p.eta.array().log().sum();
    o += detail::coupling_objective(pc.counts, tau, p.eta, psi);

    if (!std::isfinite(o)) {
        for (int s = 0; s < pc.num_pairs(); ++s) {
            const double row = psi.row(s).array().log().sum() +
                               (pc.counts.row(s).array() * p.eta.transpose().array() /
                                psi.row(s).array()).sum() / tau(s);
            if (!std::isfinite(row))
                throw NumericError("objective: non-finite contribution at pair index " +
                                   std::to_string(s));
        }
        throw NumericError("objective: non-finite value");
    }
    return o;
}

/// Closed-form block minimizer for eta: the harmonic mean of the normalized
/// counts per meta-path. A meta-path never instantiated among the stored
/// pairs would be unbounded; its selectivity is clamped instead.
inline Eigen::VectorXd update_eta(const PathCountTable& pc, const Parameters& p) {
    const Eigen::MatrixXd psi = p.psi();
    const Eigen::VectorXd tau = pair_visibility(pc, p);
    const int T = pc.num_metapaths();
    Eigen::VectorXd eta(T);
    for (int t = 0; t < T; ++t) {
        const double denom =
            (pc.counts.col(t).array() / (tau.array() * psi.col(t).array())).sum();
        eta(t) = denom > 0.0 ? pc.num_pairs() / denom : kEtaClamp;
    }
    return eta;
}

namespace detail {

/// Positive root of rho^2 + linear_coef * rho - constant = 0, written to
/// avoid cancellation for either sign of the linear coefficient.
inline double rho_coordinate_root(double linear_coef, double constant) {
    if (constant > 0.0) {
        const double disc = std::sqrt(linear_coef * linear_coef + 4.0 * constant);
        return linear_coef >= 0.0 ? 2.0 * constant / (linear_coef + disc)
                                  : 0.5 * (-linear_coef + disc);
    }
    return std::max(-linear_coef, 0.0); // prior-only / degenerate case
}

} // namespace detail

/// One node's closed-form visibility update given the current rho vector and
/// precomputed xi: the positive root of
///   rho^2 + [T*deg(u) - (alpha-1)] rho - sum_{s=(u,v)} xi_s / rho_v = 0,
/// the coordinate minimizer of the objective in rho_u. deg(u) is the number
/// of stored pairs containing u ((|V|-1) when every node pairs with every
/// other). A node with no pairs gets the prior-only minimizer. The result is
/// floored for positivity.
inline double update_rho_node(const PathCountTable& pc, const Eigen::VectorXd& rho,
                              const Eigen::VectorXd& xi, const Hyperparams& h, int u) {
    const auto& rows = pc.pairs_of_node[static_cast<size_t>(u)];
    const double coef =
        pc.num_metapaths() * static_cast<double>(rows.size()) - (h.alpha - 1.0);
    double constant = 0.0;
    for (int s : rows) {
        const auto& pr = pc.pairs[static_cast<size_t>(s)];
        const int other = pr.u == u ? pr.v : pr.u;
        constant += xi(s) / rho(other);
    }
    return std::max(detail::rho_coordinate_root(coef, constant), kRhoFloor);
}

/// Gauss-Seidel sweeps over nodes until the largest relative change drops
/// below rho_tol (or the sweep cap). xi is computed once per call.
inline Eigen::VectorXd update_rho(const PathCountTable& pc, const Parameters& p,
                                  const Hyperparams& h) {
    const Eigen::VectorXd xi = pair_xi(pc, p);
    Eigen::VectorXd rho = p.rho;
    for (int sweep = 0; sweep < h.max_rho_sweeps; ++sweep) {
        double max_rel = 0.0;
        for (int u = 0; u < pc.num_nodes(); ++u) {
            const double next = update_rho_node(pc, rho, xi, h, u);
            max_rel = std::max(max_rel, std::abs(next - rho(u)) /
                                            std::max(std::abs(rho(u)), 1e-300));
            rho(u) = next;
        }
        if (max_rel < h.rho_tol)
            break;
    }
    return rho;
}

namespace detail {

inline Eigen::MatrixXd theta_gradient(const Eigen::MatrixXd& counts,
                                      const Eigen::VectorXd& tau,
                                      const Eigen::VectorXd& eta,
                                      const Eigen::MatrixXd& phi,
                                      const Eigen::MatrixXd& theta) {
    const Eigen::MatrixXd psi = phi * theta;
    const Eigen::MatrixXd denom =
        (tau * eta.cwiseInverse().transpose()).cwiseProduct(psi.cwiseProduct(psi));
    const Eigen::MatrixXd inner = psi.cwiseInverse() - counts.cwiseQuotient(denom);
    return phi.transpose() * inner;
}

inline Eigen::RowVectorXd phi_row_gradient(const Eigen::RowVectorXd& count_row,
                                           double tau_s, const Eigen::VectorXd& eta,
                                           const Eigen::MatrixXd& theta,
                                           const Eigen::RowVectorXd& phi_row,
                                           double beta) {
    const Eigen::RowVectorXd psi_row = phi_row * theta;
    const Eigen::RowVectorXd denom =
        (eta.cwiseInverse().transpose() * tau_s).cwiseProduct(psi_row.cwiseProduct(psi_row));
    const Eigen::RowVectorXd inner = psi_row.cwiseInverse() - count_row.cwiseQuotient(denom);
    return inner * theta.transpose() - (beta - 1.0) * phi_row.cwiseInverse();
}

} // namespace detail

/// d O / d Theta: Phi^T [ 1/(Phi Theta) - P / ((tau eta^{-1}^T) o (Phi Theta)^2) ].
inline Eigen::MatrixXd grad_theta(const PathCountTable& pc, const Parameters& p) {
    Eigen::MatrixXd g = detail::theta_gradient(pc.counts, pair_visibility(pc, p),
                                               p.eta, p.phi, p.theta);
    if (!g.allFinite())
        throw NumericError("grad_theta: non-finite gradient entry");
    return g;
}

/// d O / d Phi_{s,:}: the row-s slice of the Phi gradient, including the
/// Dirichlet term -(beta-1)/phi.
inline Eigen::VectorXd grad_phi_row(const PathCountTable& pc, const Parameters& p,
                                    const Hyperparams& h, int s) {
    if (s < 0 || s >= pc.num_pairs())
        throw ValidationError("grad_phi_row: pair index out of range");
    const double tau_s = p.rho(pc.pairs[static_cast<size_t>(s)].u) *
                         p.rho(pc.pairs[static_cast<size_t>(s)].v);
    Eigen::VectorXd g = detail::phi_row_gradient(pc.counts.row(s), tau_s, p.eta,
                                                 p.theta, p.phi.row(s), h.beta)
                            .transpose();
    if (!g.allFinite())
        throw NumericError("grad_phi_row: non-finite gradient entry at pair " +
                           std::to_string(s));
    return g;
}

/// Method-of-moments gamma shape fit over the positive node totals,
/// clamped to [0.1, 1e4]. All-equal totals fall back to alpha = mean.
inline double estimate_alpha(const Eigen::VectorXd& totals) {
    std::vector<double> pos;
    pos.reserve(static_cast<size_t>(totals.size()));
    for (Eigen::Index i = 0; i < totals.size(); ++i)
        if (totals(i) > 0.0)
            pos.push_back(totals(i));
    if (pos.size() < 2)
        throw ValidationError("estimate_alpha: need >= 2 nodes with positive totals");
    double mean = 0.0;
    for (double v : pos)
        mean += v;
    mean /= static_cast<double>(pos.size());
    double var = 0.0;
    for (double v : pos)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(pos.size()); // population variance
    const double est = var > 0.0 ? mean * mean / var : mean;
    return std::clamp(est, 0.1, 1e4);
}

/// Draws a synthetic count table from the generative process:
/// P_st ~ Exp(eta_t / (tau_s psi_st)), independently per cell. Cycle counts
/// are left at zero; this is a test oracle and demo generator.
inline PathCountTable sample_from_model(const Parameters& p, const Hyperparams& h,
                                        const std::vector<std::pair<int, int>>& pairs,
                                        std::vector<std::string> node_ids = {}) {
    const int T = p.num_metapaths();
    const int V = p.num_nodes();
    if (node_ids.empty()) {
        int width = 1;
        for (int n = V - 1; n >= 10; n /= 10)
            ++width;
        for (int z = 0; z < V; ++z) {
            std::string num = std::to_string(z);
            node_ids.push_back("n" + std::string(static_cast<size_t>(width) - num.size(), '0') + num);
        }
    }
    if (static_cast<int>(node_ids.size()) != V)
        throw ValidationError("sample_from_model: node id list does not match rho");

    PathCountTable pc;
    pc.node_ids = node_ids;
    for (int z = 0; z < V; ++z)
        pc.node_index.emplace(node_ids[static_cast<size_t>(z)], z);
    for (int t = 0; t < T; ++t) {
        pc.metapath_names.push_back("t" + std::to_string(t + 1));
        pc.metapath_symmetric.push_back(true);
    }
    const Eigen::MatrixXd psi = p.psi();
    if (static_cast<int>(pairs.size()) != p.num_pairs())
        throw ValidationError("sample_from_model: pair list does not match phi");

    Rng rng(h.seed);
    pc.counts.resize(static_cast<Eigen::Index>(pairs.size()), T);
    for (size_t s = 0; s < pairs.size(); ++s) {
        auto [u, v] = pairs[s];
        if (u == v || u < 0 || v < 0 || u >= V || v >= V)
            throw ValidationError("sample_from_model: bad pair at index " + std::to_string(s));
        if (!(pc.node_ids[static_cast<size_t>(u)] < pc.node_ids[static_cast<size_t>(v)]))
            std::swap(u, v);
        pc.pairs.push_back({u, v});
        const double tau_s = p.rho(u) * p.rho(v);
        for (int t = 0; t < T; ++t) {
            const double rate = p.eta(t) / (tau_s * psi(static_cast<Eigen::Index>(s), t));
            pc.counts(static_cast<Eigen::Index>(s), t) = rng.exponential(rate);
        }
    }
    pc.cycles = Eigen::MatrixXd::Zero(V, T);
    pc.rebuild_lookup();
    return pc;
}

} // namespace prep
