#pragma once

#include "prep/common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace prep {

/// Euclidean projection onto the shrunken simplex
/// { x : x_i >= delta, sum_i x_i = 1 } by the sort-and-threshold scheme.
///
/// Sort z descending into u, pick the largest j with
/// u_j + (1/j)(1 - delta*K - sum_{i<=j} u_i) > 0, set
/// lambda = (1/rho)(1 - delta*K - sum_{i<=rho} u_i) and return
/// max(z_i + lambda, 0) + delta. delta = 0 recovers the standard simplex.
inline Eigen::VectorXd project_shrunken_simplex(const Eigen::VectorXd& z, double delta) {
    const int k = static_cast<int>(z.size());
    if (k == 0)
        throw ValidationError("project_shrunken_simplex: empty vector");
    if (delta < 0.0 || delta * k >= 1.0)
        throw ValidationError("project_shrunken_simplex: need 0 <= delta < 1/K");

    std::vector<double> u(z.data(), z.data() + k);
    std::sort(u.begin(), u.end(), std::greater<>());

    const double budget = 1.0 - delta * k;
    double prefix = 0.0, prefix_at_rho = 0.0;
    int rho = 0;
    for (int j = 1; j <= k; ++j) {
        prefix += u[static_cast<size_t>(j - 1)];
        if (u[static_cast<size_t>(j - 1)] + (budget - prefix) / j > 0.0) {
            rho = j;
            prefix_at_rho = prefix;
        }
    }
    // rho >= 1 always: at j = 1 the test value is budget > 0.
    const double lambda = (budget - prefix_at_rho) / rho;

    Eigen::VectorXd x(k);
    for (int i = 0; i < k; ++i)
        x(i) = std::max(z(i) + lambda, 0.0) + delta;
    return x;
}

/// Row-wise projection, in place.
inline void project_rows_shrunken_simplex(Eigen::MatrixXd& m, double delta) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        m.row(r) = project_shrunken_simplex(m.row(r).transpose(), delta).transpose();
}

} // namespace prep
