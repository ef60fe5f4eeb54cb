#include "elderuq/point_statistics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace elderuq;

namespace {

// Single-vertex model with prescribed coefficients over the given basis.
SurrogateModel analytic_model(const MultiIndexSet& basis,
                              const std::vector<double>& coefficients) {
    SurrogateModel m;
    m.basis = basis;
    m.times = {0.0};
    m.norm_sq.resize(basis.size());
    for (size_t b = 0; b < basis.size(); ++b) m.norm_sq[b] = psi_norm_sq(basis[b]);
    m.coeff.resize(1);
    m.coeff[0].resize(basis.size());
    for (size_t b = 0; b < basis.size(); ++b) m.coeff[0][b] = {coefficients[b]};
    return m;
}

} // namespace

TEST_CASE("constant surrogate: degenerate statistics") {
    const auto basis = build_multi_index_set(2, 1);
    std::vector<double> coeffs(basis.size(), 0.0);
    coeffs[0] = 0.5;
    const auto model = analytic_model(basis, coeffs);
    const auto stats = point_statistics(model, 0, 0, 10000, default_quantile_levels(),
                                        {0.4, 0.6}, 99);
    CHECK_THAT(stats.mean, Catch::Matchers::WithinAbs(0.5, 1e-14));
    CHECK_THAT(stats.stddev, Catch::Matchers::WithinAbs(0.0, 1e-14));
    REQUIRE(stats.exceedance.size() == 2);
    CHECK(stats.exceedance[0].probability == 1.0);
    CHECK(stats.exceedance[1].probability == 0.0);
    for (double q : stats.quantiles) CHECK(q == 0.5);
    // histogram mass
    double mass = 0.0;
    for (const auto& bin : stats.pdf) mass += bin.density * stats.bin_width;
    CHECK_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("linear surrogate f = theta_1: uniform law statistics") {
    const auto basis = build_multi_index_set(3, 1);
    std::vector<double> coeffs(basis.size(), 0.0);
    for (size_t b = 0; b < basis.size(); ++b)
        if (basis[b] == MultiIndex{1, 0, 0}) coeffs[b] = 1.0;
    const auto model = analytic_model(basis, coeffs);

    const size_t n_s = 1000000;
    const auto stats =
        point_statistics(model, 0, 0, n_s, default_quantile_levels(), {0.0}, 12345);
    const double band = 3.0 / std::sqrt(double(n_s));

    CHECK_THAT(stats.mean, Catch::Matchers::WithinAbs(0.0, band));
    CHECK_THAT(stats.stddev, Catch::Matchers::WithinAbs(1.0 / std::sqrt(3.0), 2e-3));
    CHECK_THAT(stats.quantiles[2], Catch::Matchers::WithinAbs(0.0, band)); // median
    CHECK_THAT(stats.exceedance[0].probability, Catch::Matchers::WithinAbs(0.5, 2.0 / std::sqrt(double(n_s))));
    // uniform quantiles: alpha-quantile of U(-1,1) is 2 alpha - 1
    for (size_t i = 0; i < stats.quantile_levels.size(); ++i)
        CHECK_THAT(stats.quantiles[i],
                   Catch::Matchers::WithinAbs(2.0 * stats.quantile_levels[i] - 1.0, 5e-3));
    // quantiles nondecreasing
    for (size_t i = 1; i < stats.quantiles.size(); ++i)
        CHECK(stats.quantiles[i] >= stats.quantiles[i - 1]);
    // histogram integrates to one and approximates the flat density 1/2
    double mass = 0.0;
    for (const auto& bin : stats.pdf) mass += bin.density * stats.bin_width;
    CHECK_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-12));
    for (const auto& bin : stats.pdf)
        if (bin.center > -0.9 && bin.center < 0.9)
            CHECK_THAT(bin.density, Catch::Matchers::WithinAbs(0.5, 0.05));
}

TEST_CASE("sampling is reproducible from the seed") {
    const auto basis = build_multi_index_set(2, 2);
    std::vector<double> coeffs(basis.size());
    for (size_t b = 0; b < basis.size(); ++b) coeffs[b] = 0.1 * double(b + 1);
    const auto model = analytic_model(basis, coeffs);
    const auto s1 = point_statistics(model, 0, 0, 5000, default_quantile_levels(), {0.2}, 777);
    const auto s2 = point_statistics(model, 0, 0, 5000, default_quantile_levels(), {0.2}, 777);
    CHECK(s1.mean == s2.mean);
    CHECK(s1.stddev == s2.stddev);
    CHECK(s1.quantiles == s2.quantiles);
    CHECK(s1.exceedance[0].probability == s2.exceedance[0].probability);
    const auto s3 = point_statistics(model, 0, 0, 5000, default_quantile_levels(), {0.2}, 778);
    CHECK(s1.mean != s3.mean);
}

TEST_CASE("argument validation") {
    const auto basis = build_multi_index_set(2, 1);
    std::vector<double> coeffs(basis.size(), 0.0);
    const auto model = analytic_model(basis, coeffs);
    CHECK_THROWS_AS(point_statistics(model, 0, 0, 0, default_quantile_levels(), {}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(point_statistics(model, 0, 0, 10, {0.5, 0.25}, {}, 1),
                    std::invalid_argument);
    SurrogateModel empty;
    CHECK_THROWS_AS(point_statistics(empty, 0, 0, 10, default_quantile_levels(), {}, 1),
                    std::invalid_argument);
}
