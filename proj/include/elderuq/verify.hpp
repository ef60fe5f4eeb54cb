#pragma once

#include "elderuq/flow_solver.hpp"
#include "elderuq/quadrature.hpp"
#include "elderuq/rng.hpp"
#include "elderuq/surrogate.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <string>

namespace elderuq {

/// Fast self-check battery behind the `verify` CLI subcommand: one pass/fail
/// line per invariant, true when everything holds. Not a replacement for the
/// full test suite; a smoke test for installed binaries.
inline bool run_invariant_suite(std::ostream& out) {
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok) {
        out << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
        if (!ok) ++failures;
    };

    check("smolyak-cc node counts (M=3: 69, M=5: 241 at level 3)",
          smolyak_sparse(3, 3).size() == 69 && smolyak_sparse(5, 3).size() == 241);

    {
        bool ok = true;
        for (int level = 0; level <= 5 && ok; ++level)
            ok = std::abs(clenshaw_curtis_1d(level).weight_sum() - 2.0) < 1e-13;
        check("clenshaw-curtis weights sum to 2", ok);
    }

    {
        const auto rule = gauss_legendre_1d(3);
        double s = 0.0;
        for (size_t i = 0; i < rule.size(); ++i)
            s += rule.weights[i] * std::pow(rule.nodes[i][0], 4);
        check("gauss-legendre n=3 integrates x^4 exactly", std::abs(s - 0.4) < 1e-14);
    }

    {
        const auto rule = gauss_legendre_1d(64);
        bool ok = true;
        for (int n = 0; n <= 10 && ok; ++n)
            for (int m = 0; m <= 10 && ok; ++m) {
                double s = 0.0;
                for (size_t i = 0; i < rule.size(); ++i)
                    s += 0.5 * rule.weights[i] * legendre_1d(n, rule.nodes[i][0]) *
                         legendre_1d(m, rule.nodes[i][0]);
                const double expected = n == m ? 1.0 / (2.0 * n + 1.0) : 0.0;
                ok = std::abs(s - expected) < 1e-12;
            }
        check("legendre orthogonality delta_nm/(2n+1) for n,m <= 10", ok);
    }

    {
        const auto h = halton(1, 3);
        check("halton base-2 prefix {0, -1/2, 1/2}",
              std::abs(h.nodes[0][0]) < 1e-15 && std::abs(h.nodes[1][0] + 0.5) < 1e-15 &&
                  std::abs(h.nodes[2][0] - 0.5) < 1e-15);
    }

    {
        const auto basis = build_multi_index_set(3, 2);
        const auto rule = smolyak_sparse(3, 2);
        std::vector<std::vector<double>> vals;
        for (const auto& node : rule.nodes) vals.push_back({node[0] * node[0]});
        const auto model = project_coefficients(vals, rule, basis);
        const double mean = surrogate_mean(model)[0];
        const double var = surrogate_variance(model)[0];
        check("gpc projection of theta_1^2: mean 1/3, variance 4/45",
              std::abs(mean - 1.0 / 3.0) < 1e-12 && std::abs(var - 4.0 / 45.0) < 1e-12);
    }

    {
        StructuredGrid grid(16, 8, 600.0, 150.0);
        double area = 0.0;
        for (int v = 0; v < grid.num_vertices(); ++v) area += grid.volume(v);
        check("control volumes tile the domain", std::abs(area - 90000.0) < 1e-6);
    }

    {
        StructuredGrid grid(8, 4, 600.0, 150.0);
        auto spec = PorosityFieldSpec::make(PorosityVariant::smooth3);
        spec.amplitude = 0.0;
        const auto tags = tag_boundaries(grid, 150.0, 450.0, 0.0);
        const auto pb =
            FlowProblem::create(grid, tags, PhysicalParams{}, spec, ThetaVector::zeros(3));
        SolverControls controls;
        controls.dt = 0.01 * seconds_per_year;
        controls.t_end = 10 * controls.dt;
        controls.linear.preconditioner = PreconditionerKind::ilu0;
        const auto res = time_march(pb, controls, {controls.t_end}, ThetaVector::zeros(3));
        double cmax = 0.0;
        for (double c : res.snapshots[0].c) cmax = std::max(cmax, std::abs(c));
        check("hydrostatic rest state is preserved", cmax <= 1e-10);
    }

    out << (failures == 0 ? "verify: all invariants hold\n"
                          : "verify: " + std::to_string(failures) + " failure(s)\n");
    return failures == 0;
}

} // namespace elderuq
