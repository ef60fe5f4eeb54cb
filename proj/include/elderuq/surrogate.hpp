#pragma once

#include "elderuq/legendre.hpp"
#include "elderuq/multi_index.hpp"
#include "elderuq/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

/// Truncated gPC expansion c(t, x, theta) ~= sum_beta c_beta(t, x) Psi_beta(theta).
/// Coefficient fields are stored per snapshot time over the grid vertices (a
/// "field" of size 1 models a scalar quantity of interest).
struct SurrogateModel {
    MultiIndexSet basis;
    std::vector<double> times;                            // seconds, ascending
    std::vector<std::vector<std::vector<double>>> coeff;  // [time][beta][vertex]
    std::vector<double> norm_sq;                          // Q_beta per basis index
    std::string rule_description;
    std::string provenance;

    size_t num_times() const { return times.size(); }
    size_t field_size() const {
        return coeff.empty() || coeff.front().empty() ? 0 : coeff.front().front().size();
    }

    /// Index of the stored time closest to t (exact matches win).
    size_t nearest_time(double t) const {
        if (times.empty()) throw std::runtime_error("SurrogateModel: no stored times");
        size_t best = 0;
        for (size_t i = 1; i < times.size(); ++i)
            if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
        return best;
    }
};

/// gPC coefficients by discrete projection of per-node realization values:
///   c_beta = (0.5^M / Q_beta) sum_i values_i Psi_beta(theta_i) w_i
/// for Lebesgue-weight rules; the 0.5^M factor is dropped for probability-weight
/// (Halton) rules. `values[i][k]` is the field of realization i; every node of
/// the rule must have exactly one value array.
inline SurrogateModel project_coefficients(
    const std::vector<std::vector<double>>& values_per_node, const QuadratureRule& rule,
    const MultiIndexSet& basis) {
    if (values_per_node.size() != rule.size())
        throw std::invalid_argument("project_coefficients: one value array per node required");
    if (rule.dimension != basis.M)
        throw std::invalid_argument("project_coefficients: rule/basis dimension mismatch");
    const size_t n_nodes = rule.size();
    if (n_nodes == 0)
        throw std::invalid_argument("project_coefficients: empty rule");
    const size_t n_field = values_per_node.front().size();
    for (const auto& v : values_per_node)
        if (v.size() != n_field)
            throw std::invalid_argument("project_coefficients: ragged value arrays");

    SurrogateModel model;
    model.basis = basis;
    model.rule_description = rule.description;
    model.times = {0.0};
    model.norm_sq.resize(basis.size());
    for (size_t b = 0; b < basis.size(); ++b) model.norm_sq[b] = psi_norm_sq(basis[b]);

    const double density_factor =
        rule.is_probability_weighted() ? 1.0 : std::pow(0.5, static_cast<double>(basis.M));

    auto& c = model.coeff.emplace_back(basis.size(), std::vector<double>(n_field, 0.0));
    for (size_t i = 0; i < n_nodes; ++i) {
        const auto& theta = rule.nodes[i];
        const double wi = rule.weights[i];
        for (size_t b = 0; b < basis.size(); ++b) {
            const double scale = wi * psi(basis[b], theta) * density_factor / model.norm_sq[b];
            if (scale == 0.0) continue;
            const auto& vals = values_per_node[i];
            auto& acc = c[b];
            for (size_t k = 0; k < n_field; ++k) acc[k] += scale * vals[k];
        }
    }
    return model;
}

/// Evaluate the expansion at theta for one stored time; returns the full field.
inline std::vector<double> surrogate_eval(const SurrogateModel& model,
                                          const std::vector<double>& theta,
                                          size_t time_index = 0) {
    if (theta.size() != model.basis.M)
        throw std::invalid_argument("surrogate_eval: theta dimension mismatch");
    if (time_index >= model.num_times())
        throw std::out_of_range("surrogate_eval: time index out of range");
    const auto& c = model.coeff[time_index];
    std::vector<double> out(model.field_size(), 0.0);
    for (size_t b = 0; b < model.basis.size(); ++b) {
        const double pb = psi(model.basis[b], theta);
        if (pb == 0.0) continue;
        const auto& cb = c[b];
        for (size_t k = 0; k < out.size(); ++k) out[k] += pb * cb[k];
    }
    return out;
}

/// Fast point evaluator at a fixed vertex: precomputes nothing but reuses a
/// per-dimension Legendre table, which matters when sampling 10^6 thetas.
class SurrogatePointEvaluator {
  public:
    SurrogatePointEvaluator(const SurrogateModel& model, size_t time_index, size_t vertex)
        : basis_(model.basis) {
        if (time_index >= model.num_times())
            throw std::out_of_range("SurrogatePointEvaluator: time index out of range");
        if (vertex >= model.field_size())
            throw std::out_of_range("SurrogatePointEvaluator: vertex out of range");
        coeff_.resize(basis_.size());
        for (size_t b = 0; b < basis_.size(); ++b)
            coeff_[b] = model.coeff[time_index][b][vertex];
        max_degree_ = 0;
        for (const auto& beta : basis_.indices)
            for (int d : beta) max_degree_ = std::max(max_degree_, d);
        table_.assign(basis_.M, std::vector<double>(max_degree_ + 1, 0.0));
    }

    double operator()(const std::vector<double>& theta) {
        for (size_t j = 0; j < basis_.M; ++j) legendre_all(max_degree_, theta[j], table_[j]);
        double sum = 0.0;
        for (size_t b = 0; b < basis_.size(); ++b) {
            double prod = coeff_[b];
            const auto& beta = basis_.indices[b];
            for (size_t j = 0; j < beta.size(); ++j) prod *= table_[j][beta[j]];
            sum += prod;
        }
        return sum;
    }

  private:
    MultiIndexSet basis_;
    std::vector<double> coeff_;
    int max_degree_ = 0;
    std::vector<std::vector<double>> table_;
};

/// Mean field: the coefficient of the constant basis function.
inline std::vector<double> surrogate_mean(const SurrogateModel& model, size_t time_index = 0) {
    if (model.coeff.empty() || model.basis.size() == 0)
        throw std::runtime_error("surrogate_mean: empty model");
    for (int b : model.basis[0])
        if (b != 0) throw std::runtime_error("surrogate_mean: basis lacks the zero index");
    return model.coeff.at(time_index)[0];
}

/// Variance field: sum over beta != 0 of Q_beta c_beta^2, pointwise.
inline std::vector<double> surrogate_variance(const SurrogateModel& model,
                                              size_t time_index = 0) {
    if (model.coeff.empty()) throw std::runtime_error("surrogate_variance: empty model");
    const auto& c = model.coeff.at(time_index);
    std::vector<double> var(model.field_size(), 0.0);
    for (size_t b = 0; b < model.basis.size(); ++b) {
        if (model.basis.total_degree(b) == 0) continue;
        const double q = model.norm_sq[b];
        const auto& cb = c[b];
        for (size_t k = 0; k < var.size(); ++k) var[k] += q * cb[k] * cb[k];
    }
    return var;
}

/// Plug-in sampling estimators over a probability-weighted node set:
///   mean = sum w_i f_i,   var = sum w_i (mean - f_i)^2   (no Bessel correction).
struct SampleMoments {
    std::vector<double> mean;
    std::vector<double> variance;
};

inline SampleMoments qmc_moments(const std::vector<std::vector<double>>& values_per_node,
                                 const QuadratureRule& rule) {
    if (!rule.is_probability_weighted())
        throw std::invalid_argument("qmc_moments: rule must carry probability weights");
    if (rule.size() == 0)
        throw std::invalid_argument("qmc_moments: empty rule");
    if (values_per_node.size() != rule.size())
        throw std::invalid_argument("qmc_moments: one value array per node required");
    const size_t n_field = values_per_node.front().size();
    SampleMoments m;
    m.mean.assign(n_field, 0.0);
    m.variance.assign(n_field, 0.0);
    for (size_t i = 0; i < rule.size(); ++i)
        for (size_t k = 0; k < n_field; ++k) m.mean[k] += rule.weights[i] * values_per_node[i][k];
    for (size_t i = 0; i < rule.size(); ++i)
        for (size_t k = 0; k < n_field; ++k) {
            const double d = m.mean[k] - values_per_node[i][k];
            m.variance[k] += rule.weights[i] * d * d;
        }
    return m;
}

/// Approximation-error estimate between two models sharing a basis:
///   E_a = sqrt( sum_beta Q_beta || c_beta^fine - c_beta^coarse ||^2_{L2(D)} )
/// with the spatial norm weighted by the control-volume areas (pass unit areas
/// for plain Euclidean fields). One value per stored time of the fine model.
inline std::vector<double> approximation_error_estimate(const SurrogateModel& fine,
                                                        const SurrogateModel& coarse,
                                                        const std::vector<double>& areas) {
    if (!fine.basis.same_basis(coarse.basis))
        throw std::invalid_argument("approximation_error_estimate: index sets differ");
    if (fine.num_times() != coarse.num_times())
        throw std::invalid_argument("approximation_error_estimate: stored times differ");
    if (areas.size() != fine.field_size())
        throw std::invalid_argument("approximation_error_estimate: area vector size mismatch");
    std::vector<double> err(fine.num_times(), 0.0);
    for (size_t t = 0; t < fine.num_times(); ++t) {
        double acc = 0.0;
        for (size_t b = 0; b < fine.basis.size(); ++b) {
            const auto& cf = fine.coeff[t][b];
            const auto& cc = coarse.coeff[t][b];
            double l2 = 0.0;
            for (size_t k = 0; k < cf.size(); ++k) {
                const double d = cf[k] - cc[k];
                l2 += d * d * areas[k];
            }
            acc += fine.norm_sq[b] * l2;
        }
        err[t] = std::sqrt(acc);
    }
    return err;
}

/// Tail-energy truncation indicator: spectral energy of the highest total
/// degree relative to the total variance energy, per stored time. Returns 0 for
/// a deterministic (zero-variance) model.
inline std::vector<double> truncation_indicator(const SurrogateModel& model,
                                                const std::vector<double>& areas) {
    if (areas.size() != model.field_size())
        throw std::invalid_argument("truncation_indicator: area vector size mismatch");
    int pmax = 0;
    for (size_t b = 0; b < model.basis.size(); ++b)
        pmax = std::max(pmax, model.basis.total_degree(b));
    std::vector<double> out(model.num_times(), 0.0);
    for (size_t t = 0; t < model.num_times(); ++t) {
        double tail = 0.0, total = 0.0;
        for (size_t b = 0; b < model.basis.size(); ++b) {
            const int deg = model.basis.total_degree(b);
            if (deg == 0) continue;
            const auto& cb = model.coeff[t][b];
            double l2 = 0.0;
            for (size_t k = 0; k < cb.size(); ++k) l2 += cb[k] * cb[k] * areas[k];
            const double energy = model.norm_sq[b] * l2;
            total += energy;
            if (deg == pmax) tail += energy;
        }
        out[t] = total > 0.0 ? tail / total : 0.0;
    }
    return out;
}

} // namespace elderuq
