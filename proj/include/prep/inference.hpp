#pragma once

#include "prep/model.hpp"
#include "prep/projection.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prep {

/// Which blocks an ablation variant freezes (at the stated constants).
enum class Variant { Full, NoNodeVisibility, NoPathSelectivity, NoSynergy };

inline const char* variant_name(Variant v) {
    switch (v) {
    case Variant::Full: return "full";
    case Variant::NoNodeVisibility: return "no-nv";
    case Variant::NoPathSelectivity: return "no-ps";
    case Variant::NoSynergy: return "no-cs";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no-nv") return Variant::NoNodeVisibility;
    if (s == "no-ps") return Variant::NoPathSelectivity;
    if (s == "no-cs") return Variant::NoSynergy;
    return std::nullopt;
}

struct TraceRow {
    int iteration = 0;
    double objective = 0.0;
    double d_eta = 0.0;
    double d_rho = 0.0;
    double d_phi = 0.0;
    double d_theta = 0.0;
};

struct FitResult {
    Parameters params;
    std::vector<TraceRow> trace;
    int outer_iterations = 0;
    bool converged = false;
    double alpha_used = 0.0;
    WarningList warnings;
};

namespace detail {

/// Armijo backtracking for one projected-gradient step. Returns the accepted
/// iterate, or nullopt when max_halvings exhausts without acceptance.
/// The acceptance rule is the proximal form
///   f(cand) <= f(x) - (c/step) * ||cand - x||^2,
/// which guarantees monotone non-increase for any accepted step.
template <typename Mat, typename Objective>
std::optional<std::pair<Mat, double>>
pgd_line_search(const Mat& x, double fx, const Mat& grad, const Hyperparams& h,
                double delta, Objective&& f) {
    double step = h.pgd_init_step;
    for (int halving = 0; halving <= h.max_halvings; ++halving) {
        Mat cand = x - step * grad;
        if constexpr (Mat::RowsAtCompileTime == 1) {
            Eigen::VectorXd proj = project_shrunken_simplex(cand.transpose(), delta);
            cand = proj.transpose();
        } else {
            project_rows_shrunken_simplex(cand, delta);
        }
        const double move2 = (cand - x).squaredNorm();
        const double fc = f(cand);
        if (fc <= fx - h.armijo_c / step * move2)
            return std::make_pair(std::move(cand), fc);
        step *= 0.5;
    }
    return std::nullopt;
}

} // namespace detail

/// Projected-gradient block update for Theta. Every accepted step does not
/// increase the objective; a stalled line search keeps the iterate and logs.
inline Eigen::MatrixXd pgd_update_theta(const PathCountTable& pc, const Parameters& p,
                                        const Hyperparams& h,
                                        WarningList* warnings = nullptr) {
    const Eigen::VectorXd tau = pair_visibility(pc, p);
    Eigen::MatrixXd theta = p.theta;
    double obj = detail::coupling_objective(pc.counts, tau, p.eta, p.phi * theta);
    for (int step = 0; step < h.max_pgd_steps; ++step) {
        const Eigen::MatrixXd grad =
            detail::theta_gradient(pc.counts, tau, p.eta, p.phi, theta);
        if (!grad.allFinite()) {
            if (warnings)
                warnings->push_back("theta PGD: non-finite gradient, iterate kept");
            break;
        }
        auto next = detail::pgd_line_search(
            theta, obj, grad, h, h.delta, [&](const Eigen::MatrixXd& cand) {
                return detail::coupling_objective(pc.counts, tau, p.eta, p.phi * cand);
            });
        if (!next) {
            if (warnings)
                warnings->push_back("theta PGD: line search stalled at step " +
                                    std::to_string(step));
            break;
        }
        const double moved = (next->first - theta).lpNorm<Eigen::Infinity>();
        theta = std::move(next->first);
        obj = next->second;
        if (moved < 1e-12)
            break;
    }
    return theta;
}

/// Projected-gradient block update for Phi. Rows are independent and updated
/// in parallel; each row runs its own backtracking on its own objective slice.
inline Eigen::MatrixXd pgd_update_phi(const PathCountTable& pc, const Parameters& p,
                                      const Hyperparams& h,
                                      WarningList* warnings = nullptr) {
    const Eigen::VectorXd tau = pair_visibility(pc, p);
    Eigen::MatrixXd phi = p.phi;
    std::vector<int> stalled;
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<int> local_stalled;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (int s = 0; s < pc.num_pairs(); ++s) {
            Eigen::RowVectorXd row = phi.row(s);
            const Eigen::RowVectorXd counts_row = pc.counts.row(s);
            double obj = detail::phi_row_objective(counts_row, tau(s), p.eta, p.theta,
                                                   row, h.beta);
            for (int step = 0; step < h.max_pgd_steps; ++step) {
                const Eigen::RowVectorXd grad = detail::phi_row_gradient(
                    counts_row, tau(s), p.eta, p.theta, row, h.beta);
                if (!grad.allFinite()) {
                    local_stalled.push_back(s);
                    break;
                }
                auto next = detail::pgd_line_search(
                    row, obj, grad, h, h.delta, [&](const Eigen::RowVectorXd& cand) {
                        return detail::phi_row_objective(counts_row, tau(s), p.eta,
                                                         p.theta, cand, h.beta);
                    });
                if (!next) {
                    local_stalled.push_back(s);
                    break;
                }
                const double moved = (next->first - row).lpNorm<Eigen::Infinity>();
                row = std::move(next->first);
                obj = next->second;
                if (moved < 1e-12)
                    break;
            }
            phi.row(s) = row;
        }
#ifdef _OPENMP
#pragma omp critical
#endif
        stalled.insert(stalled.end(), local_stalled.begin(), local_stalled.end());
    }
    if (warnings && !stalled.empty())
        warnings->push_back("phi PGD: line search stalled on " +
                            std::to_string(stalled.size()) + " row(s)");
    return phi;
}

/// Draws the documented initialization: rho from its gamma prior, Phi rows
/// uniform over the simplex, the first min(K, T) Theta rows as the identity
/// pattern and the rest uniform, all projected to the delta-shrunken simplex.
inline Parameters initialize_parameters(const PathCountTable& pc, const Hyperparams& h,
                                        Rng& rng) {
    const int T = pc.num_metapaths();
    const int K = h.num_patterns;
    Parameters p;
    p.eta = Eigen::VectorXd::Ones(T); // overwritten by the first eta block
    p.rho.resize(pc.num_nodes());
    for (int z = 0; z < pc.num_nodes(); ++z)
        p.rho(z) = std::max(rng.gamma(h.alpha), kRhoFloor);
    p.phi.resize(pc.num_pairs(), K);
    for (int s = 0; s < pc.num_pairs(); ++s) {
        std::vector<double> row = rng.dirichlet(K, 1.0);
        for (int k = 0; k < K; ++k)
            p.phi(s, k) = row[static_cast<size_t>(k)];
    }
    project_rows_shrunken_simplex(p.phi, h.delta);
    p.theta = Eigen::MatrixXd::Zero(K, T);
    for (int k = 0; k < K; ++k) {
        if (k < T) {
            p.theta(k, k) = 1.0;
        } else {
            std::vector<double> row = rng.dirichlet(T, 1.0);
            for (int t = 0; t < T; ++t)
                p.theta(k, t) = row[static_cast<size_t>(t)];
        }
    }
    project_rows_shrunken_simplex(p.theta, h.delta);
    return p;
}

/// Block-coordinate MAP inference: eta (closed form), rho (inner sweeps),
/// Phi (parallel row PGD), Theta (PGD), until the relative objective change
/// (or, optionally, the largest relative parameter change) drops below
/// outer_tol. Deterministic given the seed.
inline FitResult fit(const PathCountTable& pc, const Hyperparams& h,
                     Variant variant = Variant::Full) {
    h.validate();
    if (pc.num_pairs() == 0)
        throw ValidationError("fit: count table has no pairs");
    if (h.delta * pc.num_metapaths() >= 1.0)
        throw ValidationError("fit: delta too large for the theta simplex (delta*T >= 1)");

    const int T = pc.num_metapaths();
    const int K = h.num_patterns;
    FitResult res;
    res.alpha_used = h.alpha;

    Rng rng(h.seed);
    Parameters p = initialize_parameters(pc, h, rng);
    if (variant == Variant::NoNodeVisibility)
        p.rho = Eigen::VectorXd::Ones(pc.num_nodes());
    if (variant == Variant::NoPathSelectivity)
        p.eta = Eigen::VectorXd::Ones(T);
    if (variant == Variant::NoSynergy) {
        p.phi = Eigen::MatrixXd::Constant(pc.num_pairs(), K, 1.0 / K);
        p.theta = Eigen::MatrixXd::Constant(K, T, 1.0 / T);
    }

    const bool update_eta_block = variant != Variant::NoPathSelectivity;
    const bool update_rho_block = variant != Variant::NoNodeVisibility;
    const bool update_synergy_blocks = variant != Variant::NoSynergy;

    double prev_obj = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= h.max_outer_iters; ++iter) {
        double max_param_rel = 0.0;
        auto track = [&max_param_rel](const auto& before, const auto& after) {
            const double denom = std::max(before.template lpNorm<Eigen::Infinity>(), 1e-300);
            max_param_rel = std::max(max_param_rel,
                                     (after - before).template lpNorm<Eigen::Infinity>() / denom);
        };

        TraceRow row;
        row.iteration = iter;
        auto eval_obj = [&]() {
            try {
                return objective(pc, p, h);
            } catch (const NumericError& e) {
                throw NumericError("fit: outer iteration " + std::to_string(iter) +
                                   ": " + e.what());
            }
        };
        double obj = prev_obj;
        if (!std::isfinite(obj))
            obj = eval_obj();

        if (update_eta_block) {
            const Eigen::VectorXd eta = update_eta(pc, p);
            track(p.eta, eta);
            p.eta = eta;
            const double after = eval_obj();
            row.d_eta = after - obj;
            obj = after;
        }
        if (update_rho_block) {
            const Eigen::VectorXd rho = update_rho(pc, p, h);
            track(p.rho, rho);
            p.rho = rho;
            const double after = eval_obj();
            row.d_rho = after - obj;
            obj = after;
        }
        if (update_synergy_blocks) {
            const Eigen::MatrixXd phi = pgd_update_phi(pc, p, h, &res.warnings);
            track(p.phi, phi);
            p.phi = phi;
            double after = eval_obj();
            row.d_phi = after - obj;
            obj = after;

            const Eigen::MatrixXd theta = pgd_update_theta(pc, p, h, &res.warnings);
            track(p.theta, theta);
            p.theta = theta;
            after = eval_obj();
            row.d_theta = after - obj;
            obj = after;
        }

        row.objective = obj;
        res.trace.push_back(row);
        res.outer_iterations = iter;

        if (std::isfinite(prev_obj)) {
            const bool obj_converged =
                std::abs(prev_obj - obj) <= h.outer_tol * std::max(std::abs(prev_obj), 1e-300);
            const bool param_converged = max_param_rel < h.outer_tol;
            if (h.convergence == ConvergenceOn::Objective ? obj_converged : param_converged) {
                res.converged = true;
                prev_obj = obj;
                break;
            }
        }
        prev_obj = obj;
    }

    // Collapse repeated stall messages (a converged block stalls every
    // remaining iteration by construction).
    WarningList deduped;
    std::map<std::string, int> counts;
    for (const std::string& w : res.warnings)
        if (++counts[w] == 1)
            deduped.push_back(w);
    for (std::string& w : deduped)
        if (counts[w] > 1)
            w += " (x" + std::to_string(counts[w]) + ")";
    res.warnings = std::move(deduped);

    res.params = std::move(p);
    return res;
}

/// Runs fit() with one component knocked out at the stated constants.
inline FitResult prep_ablation(const PathCountTable& pc, const Hyperparams& h,
                               Variant variant) {
    return fit(pc, h, variant);
}

} // namespace prep
