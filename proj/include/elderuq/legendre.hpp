#pragma once

#include <stdexcept>
#include <vector>

namespace elderuq {

/// Legendre polynomial psi_n(x) by the three-term recurrence
///   (n+1) psi_{n+1} = (2n+1) x psi_n - n psi_{n-1},  psi_0 = 1, psi_1 = x.
inline double legendre_1d(int n, double x) {
    if (n < 0)
        throw std::invalid_argument("legendre_1d: degree must be >= 0");
    double p0 = 1.0;
    if (n == 0) return p0;
    double p1 = x;
    for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// All values psi_0(x) .. psi_max_degree(x) in one sweep.
inline void legendre_all(int max_degree, double x, std::vector<double>& out) {
    out.resize(max_degree + 1);
    out[0] = 1.0;
    if (max_degree == 0) return;
    out[1] = x;
    for (int k = 1; k < max_degree; ++k)
        out[k + 1] = ((2.0 * k + 1.0) * x * out[k] - k * out[k - 1]) / (k + 1.0);
}

using MultiIndex = std::vector<int>;

/// Multivariate basis value Psi_beta(theta) = prod_j psi_{beta_j}(theta_j).
inline double psi(const MultiIndex& beta, const std::vector<double>& theta) {
    if (beta.size() != theta.size())
        throw std::invalid_argument("psi: index/theta dimension mismatch");
    double prod = 1.0;
    for (size_t j = 0; j < beta.size(); ++j) prod *= legendre_1d(beta[j], theta[j]);
    return prod;
}

/// Normalization constant Q_beta = E[Psi_beta^2] = prod_j 1/(2 beta_j + 1).
inline double psi_norm_sq(const MultiIndex& beta) {
    double q = 1.0;
    for (int b : beta) q /= (2.0 * b + 1.0);
    return q;
}

} // namespace elderuq
