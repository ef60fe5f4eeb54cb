#pragma once

#include "elderuq/legendre.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

/// Truncation strategies for the gPC index set J_{M,p}:
///   total_degree:   sum_j beta_j <= p          (default)
///   max_degree:     max_j beta_j <= p
///   product_degree: prod over nonzero beta_j <= p (hyperbolic cross; the zero
///                   index always belongs, with the empty product read as 1)
enum class TruncationStrategy { total_degree, max_degree, product_degree };

inline TruncationStrategy truncation_from_string(const std::string& s) {
    if (s == "total-degree") return TruncationStrategy::total_degree;
    if (s == "max-degree") return TruncationStrategy::max_degree;
    if (s == "product-degree") return TruncationStrategy::product_degree;
    throw std::invalid_argument("unknown truncation strategy: " + s);
}

/// Truncated multi-index set defining the gPC basis, lexicographically ordered.
struct MultiIndexSet {
    size_t M = 0;
    int poly_order = 0;
    TruncationStrategy strategy = TruncationStrategy::total_degree;
    std::vector<MultiIndex> indices;

    size_t size() const { return indices.size(); }
    const MultiIndex& operator[](size_t i) const { return indices[i]; }

    int total_degree(size_t i) const {
        int s = 0;
        for (int b : indices[i]) s += b;
        return s;
    }

    bool same_basis(const MultiIndexSet& other) const {
        return M == other.M && indices == other.indices;
    }
};

namespace detail {

inline bool admits(const MultiIndex& beta, int p, TruncationStrategy strategy) {
    switch (strategy) {
        case TruncationStrategy::total_degree: {
            long s = 0;
            for (int b : beta) s += b;
            return s <= p;
        }
        case TruncationStrategy::max_degree: {
            for (int b : beta)
                if (b > p) return false;
            return true;
        }
        case TruncationStrategy::product_degree: {
            long prod = 1;
            bool any = false;
            for (int b : beta)
                if (b > 0) {
                    any = true;
                    prod *= b;
                    if (prod > p) return false;
                }
            return !any || prod <= p;
        }
    }
    return false;
}

} // namespace detail

/// Complete enumeration of J_{M,p} under the strategy predicate.
inline MultiIndexSet build_multi_index_set(size_t M, int p, TruncationStrategy strategy =
                                                                TruncationStrategy::total_degree) {
    if (M < 1)
        throw std::invalid_argument("build_multi_index_set: M must be >= 1");
    if (p < 0)
        throw std::invalid_argument("build_multi_index_set: poly order must be >= 0");
    MultiIndexSet set;
    set.M = M;
    set.poly_order = p;
    set.strategy = strategy;
    // every admissible index has all components <= p, so a bounded odometer
    // enumerates candidates in lexicographic order
    MultiIndex beta(M, 0);
    while (true) {
        if (detail::admits(beta, p, strategy)) set.indices.push_back(beta);
        size_t d = M;
        while (d-- > 0) {
            if (++beta[d] <= p) break;
            beta[d] = 0;
            if (d == 0) return set;
        }
    }
}

} // namespace elderuq
