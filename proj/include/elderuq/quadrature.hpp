#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

enum class RuleKind { gauss_legendre, clenshaw_curtis, tensor, smolyak, halton };

/// Nodes and weights on [-1,1]^M. Deterministic rules carry Lebesgue weights
/// (sum 2^M); Halton carries probability weights (sum 1). Consumers that need
/// the uniform density fold in the 0.5^M factor themselves.
struct QuadratureRule {
    size_t dimension = 1;
    std::vector<std::vector<double>> nodes;
    std::vector<double> weights;
    RuleKind kind = RuleKind::gauss_legendre;
    std::string description;

    size_t size() const { return nodes.size(); }

    double weight_sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    bool is_probability_weighted() const { return kind == RuleKind::halton; }
};

namespace detail {

/// Legendre P_n and its derivative at x via the three-term recurrence.
inline void legendre_pair(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) { p = p0; dp = 0.0; return; }
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1,1]; exact for degree <= 2n-1.
/// Nodes by Newton iteration on P_n, stored in ascending order; the rule is
/// symmetrized exactly about 0.
inline QuadratureRule gauss_legendre_1d(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_legendre_1d: need at least one node");
    QuadratureRule rule;
    rule.dimension = 1;
    rule.kind = RuleKind::gauss_legendre;
    rule.description = "gauss-legendre n=" + std::to_string(n);
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p, dp;
        for (int it = 0; it < 100; ++it) {
            detail::legendre_pair(n, x, p, dp);
            const double step = p / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        detail::legendre_pair(n, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i counts from the node closest to +1 downwards
        const int hi = n - 1 - i;
        const int lo = i;
        if (lo == hi) {
            rule.nodes[lo] = {0.0};
            rule.weights[lo] = w;
        } else {
            rule.nodes[hi] = {x};
            rule.nodes[lo] = {-x};
            rule.weights[hi] = w;
            rule.weights[lo] = w;
        }
    }
    return rule;
}

/// Nested Clenshaw-Curtis rule at the given level: n = 2^level + 1 nodes for
/// level >= 1 and the single-node midpoint rule at level 0. Nodes are the
/// Chebyshev extrema -cos(pi k / (n-1)) in ascending order; weights are positive
/// and sum to 2.
inline QuadratureRule clenshaw_curtis_1d(int level) {
    if (level < 0)
        throw std::invalid_argument("clenshaw_curtis_1d: level must be >= 0");
    QuadratureRule rule;
    rule.dimension = 1;
    rule.kind = RuleKind::clenshaw_curtis;
    rule.description = "clenshaw-curtis level=" + std::to_string(level);
    if (level == 0) {
        rule.nodes = {{0.0}};
        rule.weights = {2.0};
        return rule;
    }
    const int N = 1 << level; // n - 1, even
    const int n = N + 1;
    rule.nodes.resize(n);
    rule.weights.assign(n, 0.0);
    for (int k = 0; k <= N; ++k)
        rule.nodes[k] = {-std::cos(M_PI * k / N)};
    // Endpoint weights, then the interior cosine series (N even).
    rule.weights[0] = rule.weights[N] = 1.0 / (N * N - 1.0);
    for (int k = 1; k < N; ++k) {
        const double theta = M_PI * k / N;
        double v = 1.0;
        for (int j = 1; j < N / 2; ++j)
            v -= 2.0 * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
        v -= std::cos(N * theta) / (N * N - 1.0);
        rule.weights[k] = 2.0 * v / N;
    }
    return rule;
}

/// Full tensor product of 1D rules; nodes ordered with the last dimension fastest.
inline QuadratureRule tensor_product(const std::vector<QuadratureRule>& rules) {
    if (rules.empty())
        throw std::invalid_argument("tensor_product: need at least one rule");
    QuadratureRule prod;
    prod.dimension = rules.size();
    prod.kind = RuleKind::tensor;
    prod.description = "tensor";
    size_t total = 1;
    for (const auto& r : rules) {
        if (r.dimension != 1)
            throw std::invalid_argument("tensor_product: factors must be 1D rules");
        total *= r.size();
        prod.description += " x " + r.description;
    }
    prod.nodes.reserve(total);
    prod.weights.reserve(total);
    std::vector<size_t> idx(rules.size(), 0);
    for (size_t flat = 0; flat < total; ++flat) {
        std::vector<double> node(rules.size());
        double w = 1.0;
        for (size_t d = 0; d < rules.size(); ++d) {
            node[d] = rules[d].nodes[idx[d]][0];
            w *= rules[d].weights[idx[d]];
        }
        prod.nodes.push_back(std::move(node));
        prod.weights.push_back(w);
        for (size_t d = rules.size(); d-- > 0;) {
            if (++idx[d] < rules[d].size()) break;
            idx[d] = 0;
        }
    }
    return prod;
}

namespace detail {

inline int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Canonical integer position of node k of the nested CC level l on the finest
/// level L: ascending nodes share keys across levels, so duplicate detection is
/// exact integer arithmetic.
inline int64_t cc_node_key(int level, int k, int max_level) {
    if (max_level == 0) return 0;
    if (level == 0) return int64_t{1} << (max_level - 1); // midpoint
    return static_cast<int64_t>(k) << (max_level - level);
}

} // namespace detail

/// Isotropic Smolyak sparse grid on nested Clenshaw-Curtis levels with the
/// standard combination-technique coefficients
///   sum over |l|_1 in [level-M+1, level] of (-1)^(level-|l|) C(M-1, level-|l|) tensor(CC(l_j)).
/// Duplicate nodes are merged by index arithmetic of the nested family.
inline QuadratureRule smolyak_sparse(int M, int level) {
    if (M < 1)
        throw std::invalid_argument("smolyak_sparse: dimension must be >= 1");
    if (level < 0)
        throw std::invalid_argument("smolyak_sparse: level must be >= 0");
    std::vector<QuadratureRule> rules_1d;
    for (int l = 0; l <= level; ++l) rules_1d.push_back(clenshaw_curtis_1d(l));

    std::map<std::vector<int64_t>, double> merged;
    std::vector<int> lv(M, 0);
    // enumerate level multi-indices with |lv| <= level, keep |lv| >= level-M+1
    const auto visit = [&](const std::vector<int>& lvls) {
        int sum = 0;
        for (int l : lvls) sum += l;
        const int r = level - sum;
        if (r < 0 || r > M - 1) return;
        const double coeff = ((r % 2 == 0) ? 1.0 : -1.0) *
                             static_cast<double>(detail::binomial(M - 1, r));
        std::vector<size_t> idx(M, 0);
        size_t total = 1;
        for (int d = 0; d < M; ++d) total *= rules_1d[lvls[d]].size();
        std::vector<int64_t> key(M);
        for (size_t flat = 0; flat < total; ++flat) {
            double w = coeff;
            for (int d = 0; d < M; ++d) {
                key[d] = detail::cc_node_key(lvls[d], static_cast<int>(idx[d]), level);
                w *= rules_1d[lvls[d]].weights[idx[d]];
            }
            merged[key] += w;
            for (int d = M; d-- > 0;) {
                if (++idx[d] < rules_1d[lvls[d]].size()) break;
                idx[d] = 0;
            }
        }
    };
    // odometer over levels bounded by |lv| <= level
    while (true) {
        visit(lv);
        int d = M - 1;
        while (d >= 0) {
            ++lv[d];
            int sum = 0;
            for (int l : lv) sum += l;
            if (sum <= level) break;
            lv[d] = 0;
            --d;
        }
        if (d < 0) break;
    }

    QuadratureRule rule;
    rule.dimension = static_cast<size_t>(M);
    rule.kind = RuleKind::smolyak;
    rule.description =
        "smolyak-cc M=" + std::to_string(M) + " level=" + std::to_string(level);
    const double denom = static_cast<double>(int64_t{1} << level);
    rule.nodes.reserve(merged.size());
    rule.weights.reserve(merged.size());
    for (const auto& [key, w] : merged) {
        std::vector<double> node(M);
        for (int d = 0; d < M; ++d) {
            // key/2^level in [0,1] is exact in binary; map to the CC abscissa
            if (level == 0)
                node[d] = 0.0;
            else
                node[d] = -std::cos(M_PI * (static_cast<double>(key[d]) / denom));
        }
        rule.nodes.push_back(std::move(node));
        rule.weights.push_back(w);
    }
    return rule;
}

namespace detail {

inline int nth_prime(int idx) { // idx from 0
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
    if (idx < 0 || idx >= static_cast<int>(sizeof(primes) / sizeof(primes[0])))
        throw std::invalid_argument("halton: dimension exceeds the prime table");
    return primes[idx];
}

/// Digit reversal as an exact rational, rounded once at the end.
inline double radical_inverse(uint64_t i, int base) {
    uint64_t num = 0, den = 1;
    while (i > 0) {
        if (den > (uint64_t{1} << 62) / static_cast<uint64_t>(base))
            throw std::invalid_argument("radical_inverse: index too large for exact arithmetic");
        num = num * base + i % base;
        den *= base;
        i /= base;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace detail

/// First N Halton points in dimension M (bases = first M primes, index starting
/// at 1), affinely mapped from (0,1)^M to (-1,1)^M, with probability weights 1/N.
inline QuadratureRule halton(int M, int N) {
    if (M < 1)
        throw std::invalid_argument("halton: dimension must be >= 1");
    if (N < 0)
        throw std::invalid_argument("halton: sample count must be >= 0");
    QuadratureRule rule;
    rule.dimension = static_cast<size_t>(M);
    rule.kind = RuleKind::halton;
    rule.description = "halton M=" + std::to_string(M) + " N=" + std::to_string(N);
    rule.nodes.reserve(N);
    rule.weights.assign(N, N > 0 ? 1.0 / N : 0.0);
    for (int i = 1; i <= N; ++i) {
        std::vector<double> node(M);
        for (int d = 0; d < M; ++d)
            node[d] = 2.0 * detail::radical_inverse(static_cast<uint64_t>(i),
                                                    detail::nth_prime(d)) -
                      1.0;
        rule.nodes.push_back(std::move(node));
    }
    return rule;
}

} // namespace elderuq
