#pragma once

#include "elderuq/rng.hpp"
#include "elderuq/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace elderuq {

struct HistogramBin {
    double center;
    double density;
};

struct ExceedanceEntry {
    double threshold;
    double probability;
};

/// Sampling statistics of the surrogate at one space-time point.
struct PointStatistics {
    double time = 0.0;       // seconds
    double x = 0.0, y = 0.0; // point actually used (nearest vertex)
    size_t sample_count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> quantile_levels;
    std::vector<double> quantiles;
    std::vector<ExceedanceEntry> exceedance;
    std::vector<HistogramBin> pdf;
    double bin_width = 0.0;
};

inline const std::vector<double>& default_quantile_levels() {
    static const std::vector<double> levels = {0.025, 0.25, 0.5, 0.75, 0.975};
    return levels;
}

namespace detail {

/// Type-1 empirical inverse cdf: the ceil(alpha N)-th order statistic.
inline double order_statistic_quantile(const std::vector<double>& sorted, double alpha) {
    const size_t n = sorted.size();
    size_t k = static_cast<size_t>(std::ceil(alpha * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n) k = n;
    return sorted[k - 1];
}

/// Freedman-Diaconis histogram over [min, max]; degenerate samples collapse to
/// a single unit-mass bin.
inline void build_histogram(const std::vector<double>& sorted, PointStatistics& stats) {
    const size_t n = sorted.size();
    const double lo = sorted.front(), hi = sorted.back();
    const double iqr =
        order_statistic_quantile(sorted, 0.75) - order_statistic_quantile(sorted, 0.25);
    double h = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    if (!(h > 0.0)) h = (hi - lo) / std::max<size_t>(1, static_cast<size_t>(std::sqrt(n)));
    if (!(h > 0.0)) { // all samples equal
        stats.bin_width = 1.0;
        stats.pdf = {{lo, 1.0}};
        return;
    }
    size_t bins = static_cast<size_t>(std::ceil((hi - lo) / h));
    bins = std::max<size_t>(1, std::min<size_t>(bins, 4096));
    h = (hi - lo) / static_cast<double>(bins);
    std::vector<size_t> counts(bins, 0);
    for (double v : sorted) {
        size_t b = static_cast<size_t>((v - lo) / h);
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    stats.bin_width = h;
    stats.pdf.resize(bins);
    for (size_t b = 0; b < bins; ++b) {
        stats.pdf[b].center = lo + (b + 0.5) * h;
        stats.pdf[b].density = static_cast<double>(counts[b]) / (static_cast<double>(n) * h);
    }
}

} // namespace detail

/// Sample the point surrogate N_s times with iid uniform theta (counter-based,
/// reproducible from the seed) and derive mean, standard deviation, order
/// statistic quantiles, exceedance probabilities P(c > c*), and a histogram pdf.
inline PointStatistics point_statistics(const SurrogateModel& model, size_t time_index,
                                        size_t vertex, size_t sample_count,
                                        const std::vector<double>& quantile_levels,
                                        const std::vector<double>& thresholds, uint64_t seed) {
    if (model.basis.size() == 0 || model.coeff.empty())
        throw std::invalid_argument("point_statistics: empty model");
    if (sample_count < 1)
        throw std::invalid_argument("point_statistics: need at least one sample");
    for (size_t i = 1; i < quantile_levels.size(); ++i)
        if (quantile_levels[i] <= quantile_levels[i - 1])
            throw std::invalid_argument("point_statistics: quantile levels must increase");

    SurrogatePointEvaluator eval(model, time_index, vertex);
    CounterRng rng(seed);
    const size_t M = model.basis.M;

    std::vector<double> samples(sample_count);
    std::vector<double> theta(M);
    double sum = 0.0, sum_sq = 0.0;
    for (size_t s = 0; s < sample_count; ++s) {
        for (size_t j = 0; j < M; ++j)
            theta[j] = rng.uniform_sym(static_cast<uint64_t>(s) * M + j);
        const double v = eval(theta);
        samples[s] = v;
        sum += v;
        sum_sq += v * v;
    }

    PointStatistics stats;
    stats.time = model.times[time_index];
    stats.sample_count = sample_count;
    stats.mean = sum / static_cast<double>(sample_count);
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(sample_count) - stats.mean * stats.mean);
    stats.stddev = std::sqrt(var);

    for (double c_star : thresholds) {
        size_t count = 0;
        for (double v : samples)
            if (v > c_star) ++count;
        stats.exceedance.push_back(
            {c_star, static_cast<double>(count) / static_cast<double>(sample_count)});
    }

    std::sort(samples.begin(), samples.end());
    stats.quantile_levels = quantile_levels;
    stats.quantiles.reserve(quantile_levels.size());
    for (double alpha : quantile_levels)
        stats.quantiles.push_back(detail::order_statistic_quantile(samples, alpha));

    detail::build_histogram(samples, stats);
    return stats;
}

} // namespace elderuq
