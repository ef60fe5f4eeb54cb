#include "elderuq/random_fields.hpp"

#include "elderuq/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace elderuq;

TEST_CASE("smooth3 field: reference values and bounds") {
    const ThetaVector zero = ThetaVector::zeros(3);
    CHECK(porosity_smooth3(0.0, 0.0, zero) == 0.1);
    CHECK(porosity_smooth3(300.0, 75.0, zero) == 0.1);

    const ThetaVector e1{{1.0, 0.0, 0.0}};
    CHECK_THAT(porosity_smooth3(0.0, 0.0, e1), Catch::Matchers::WithinAbs(0.105, 1e-15));

    CHECK_THROWS_AS(porosity_smooth3(-1.0, 0.0, zero), std::domain_error);
    CHECK_THROWS_AS(porosity_smooth3(0.0, 151.0, zero), std::domain_error);
}

TEST_CASE("layered5 field: bases per layer and the mid-domain value") {
    const ThetaVector zero = ThetaVector::zeros(5);
    CHECK(porosity_layered5(300.0, 130.0, zero) == 0.08);
    CHECK(porosity_layered5(300.0, 75.0, zero) == 0.06);
    CHECK(porosity_layered5(300.0, 25.0, zero) == 0.09);
    // half-open intervals as printed: y = 120 belongs to the top layer, y = 50 to the middle
    CHECK(porosity_layered5(10.0, 120.0, zero) == 0.08);
    CHECK(porosity_layered5(10.0, 50.0, zero) == 0.06);

    // (300,75): sin(i pi/2)^2 is 1 for odd i, 0 for even i
    const ThetaVector ones{{1.0, 1.0, 1.0, 1.0, 1.0}};
    CHECK_THAT(porosity_layered5(300.0, 75.0, ones), Catch::Matchers::WithinAbs(0.09, 1e-15));
}

TEST_CASE("appendix-B field: plain-radian wavenumbers") {
    const ThetaVector zero = ThetaVector::zeros(3);
    CHECK(porosity_appendix_b(250.0, 10.0, zero) == 0.1);
    const ThetaVector t{{0.7, -0.3, 0.5}};
    // at the origin cos(0)=1 and both sines vanish
    CHECK_THAT(porosity_appendix_b(0.0, 0.0, t), Catch::Matchers::WithinAbs(0.1 + 0.01 * 0.7, 1e-15));
}

TEST_CASE("fields are affine in theta: phi(x,-t) + phi(x,t) = 2 phi(x,0)") {
    CounterRng rng(7001);
    uint64_t ctr = 0;
    for (const auto variant :
         {PorosityVariant::smooth3, PorosityVariant::layered5, PorosityVariant::appendix_b}) {
        const auto spec = PorosityFieldSpec::make(variant);
        for (int trial = 0; trial < 200; ++trial) {
            const double x = 600.0 * rng.uniform01(ctr++);
            const double y = 150.0 * rng.uniform01(ctr++);
            ThetaVector t, tneg;
            for (size_t j = 0; j < spec.dim(); ++j) {
                t.values.push_back(rng.uniform_sym(ctr++));
                tneg.values.push_back(-t.values.back());
            }
            const ThetaVector zero = ThetaVector::zeros(spec.dim());
            const double lhs = spec.evaluate(x, y, t) + spec.evaluate(x, y, tneg);
            const double rhs = 2.0 * spec.evaluate(x, y, zero);
            CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-15));
        }
    }
}

TEST_CASE("worst-case bounds hold over random samples") {
    CounterRng rng(7002);
    uint64_t ctr = 0;
    struct Expected {
        PorosityVariant variant;
        double lo, hi;
    };
    const Expected cases[] = {{PorosityVariant::smooth3, 0.085, 0.115},
                              {PorosityVariant::layered5, 0.01, 0.14},
                              {PorosityVariant::appendix_b, 0.07, 0.13}};
    for (const auto& c : cases) {
        const auto spec = PorosityFieldSpec::make(c.variant);
        double lo, hi;
        spec.worst_case_bounds(lo, hi);
        CHECK_THAT(lo, Catch::Matchers::WithinAbs(c.lo, 1e-12));
        CHECK_THAT(hi, Catch::Matchers::WithinAbs(c.hi, 1e-12));
        double seen_lo = 1.0, seen_hi = 0.0;
        for (int trial = 0; trial < 100000; ++trial) {
            const double x = 600.0 * rng.uniform01(ctr++);
            const double y = 150.0 * rng.uniform01(ctr++);
            ThetaVector t;
            for (size_t j = 0; j < spec.dim(); ++j) t.values.push_back(rng.uniform_sym(ctr++));
            const double v = spec.evaluate(x, y, t);
            seen_lo = std::min(seen_lo, v);
            seen_hi = std::max(seen_hi, v);
            if (!(v >= lo && v <= hi)) {
                CHECK(v >= lo);
                CHECK(v <= hi);
                break;
            }
        }
        CHECK(seen_lo >= lo);
        CHECK(seen_hi <= hi);
    }
}

TEST_CASE("evaluation is deterministic") {
    const auto spec = PorosityFieldSpec::make(PorosityVariant::layered5);
    const ThetaVector t{{0.3, -0.8, 0.1, 0.99, -0.5}};
    const double a = spec.evaluate(123.0, 88.0, t);
    const double b = spec.evaluate(123.0, 88.0, t);
    CHECK(a == b);
}

TEST_CASE("generic variant reproduces a layered trigonometric expansion") {
    PorosityFieldSpec spec;
    spec.variant = PorosityVariant::generic;
    spec.amplitude = 0.01;
    spec.layer_tops = {50.0, 120.0};
    spec.layer_values = {0.09, 0.06, 0.08};
    // one sin(x pi/600) sin(y pi/150) term, phases shift the cosines into sines
    spec.terms.push_back({M_PI / 600.0, -M_PI / 2.0, M_PI / 150.0, -M_PI / 2.0});
    CHECK_NOTHROW(spec.validate());
    const ThetaVector t{{1.0}};
    const double got = spec.evaluate(300.0, 75.0, t);
    CHECK_THAT(got, Catch::Matchers::WithinAbs(0.06 + 0.01, 1e-12));

    // theta dimension must match the term count
    CHECK_THROWS_AS(spec.evaluate(0.0, 0.0, ThetaVector::zeros(2)), std::invalid_argument);
}

TEST_CASE("validation rejects fields that can leave (0,1)") {
    PorosityFieldSpec spec;
    spec.variant = PorosityVariant::generic;
    spec.amplitude = 0.2;
    spec.layer_values = {0.1};
    spec.terms.resize(3); // spread 0.6 > base 0.1
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    PorosityFieldSpec bad_layers;
    bad_layers.variant = PorosityVariant::generic;
    bad_layers.amplitude = 0.001;
    bad_layers.layer_tops = {120.0, 50.0};
    bad_layers.layer_values = {0.1, 0.1, 0.1};
    bad_layers.terms.resize(1);
    CHECK_THROWS_AS(bad_layers.validate(), std::invalid_argument);
}

TEST_CASE("theta validation") {
    ThetaVector t{{0.5, 1.5}};
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    ThetaVector empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}
