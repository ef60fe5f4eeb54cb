#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

/// Point in the stochastic parameter cube [-1,1]^M.
struct ThetaVector {
    std::vector<double> values;

    size_t dim() const { return values.size(); }
    double operator[](size_t i) const { return values[i]; }

    void validate() const {
        if (values.empty())
            throw std::invalid_argument("ThetaVector: dimension must be >= 1");
        for (double v : values)
            if (!(v >= -1.0 && v <= 1.0))
                throw std::invalid_argument("ThetaVector: component outside [-1,1]");
    }

    static ThetaVector zeros(size_t m) { return {std::vector<double>(m, 0.0)}; }
};

namespace detail {
inline void check_domain(double x, double y, double Lx, double Ly) {
    if (!(x >= 0.0 && x <= Lx && y >= 0.0 && y <= Ly))
        throw std::domain_error("porosity field: point outside the reservoir domain");
}
inline void check_theta(const ThetaVector& theta, size_t m) {
    if (theta.dim() != m)
        throw std::invalid_argument("porosity field: theta dimension mismatch");
    theta.validate();
}
} // namespace detail

/// Smooth 3-parameter field on [0,600]x[0,150]:
///   0.1 + a (th1 cos(pi x/600) + th2 sin(2 pi y/150) + th3 cos(4 pi x/600)),  a = 0.005.
inline double porosity_smooth3(double x, double y, const ThetaVector& theta,
                               double amplitude = 0.005) {
    detail::check_domain(x, y, 600.0, 150.0);
    detail::check_theta(theta, 3);
    const double pi = M_PI;
    return 0.1 + amplitude * (theta[0] * std::cos(pi * x / 600.0) +
                              theta[1] * std::sin(2.0 * pi * y / 150.0) +
                              theta[2] * std::cos(4.0 * pi * x / 600.0));
}

/// Three-layer 5-parameter field: bases 0.08 / 0.06 / 0.09 on y in [120,150] /
/// [50,120) / [0,50), plus a (default 0.01) times sum th_i sin(i pi x/600) sin(i pi y/150).
/// Ties at y = 50 and y = 120 take the branch of the interval they open.
inline double porosity_layered5(double x, double y, const ThetaVector& theta,
                                double amplitude = 0.01) {
    detail::check_domain(x, y, 600.0, 150.0);
    detail::check_theta(theta, 5);
    double base;
    if (y >= 120.0)
        base = 0.08;
    else if (y >= 50.0)
        base = 0.06;
    else
        base = 0.09;
    const double pi = M_PI;
    double sum = 0.0;
    for (int i = 1; i <= 5; ++i)
        sum += theta[i - 1] * std::sin(i * x * pi / 600.0) * std::sin(i * y * pi / 150.0);
    return base + amplitude * sum;
}

/// 3-parameter field with non-pi wavenumbers (arguments in plain radians):
///   0.1 + a (th1 cos(x/1200) + th2 sin(y/300) + th3 sin(x/2400)),  a = 0.01.
inline double porosity_appendix_b(double x, double y, const ThetaVector& theta,
                                  double amplitude = 0.01) {
    detail::check_domain(x, y, 600.0, 150.0);
    detail::check_theta(theta, 3);
    return 0.1 + amplitude * (theta[0] * std::cos(x / 1200.0) + theta[1] * std::sin(y / 300.0) +
                              theta[2] * std::sin(x / 2400.0));
}

enum class PorosityVariant { smooth3, layered5, appendix_b, generic };

/// One term of the generic trigonometric expansion:
///   f_i(x, y) = cos(wx x + px) * cos(wy y + py).
struct GenericTerm {
    double wx = 0.0, px = 0.0;
    double wy = 0.0, py = 0.0;
};

/// Configurable porosity parameterization phi(x, theta) = base(y) + a * sum th_i f_i(x,y).
/// The paper variants are built in; `generic` takes its base layering and term table
/// from the configuration. All variants are affine in theta.
struct PorosityFieldSpec {
    PorosityVariant variant = PorosityVariant::smooth3;
    double amplitude = 0.005; // defaults per variant; see make()
    // generic variant only:
    std::vector<double> layer_tops;    // ascending y-values closing each layer from below
    std::vector<double> layer_values;  // size layer_tops.size() + 1, bottom layer first
    std::vector<GenericTerm> terms;

    static PorosityFieldSpec make(PorosityVariant v) {
        PorosityFieldSpec s;
        s.variant = v;
        s.amplitude = (v == PorosityVariant::smooth3) ? 0.005 : 0.01;
        return s;
    }

    size_t dim() const {
        switch (variant) {
            case PorosityVariant::smooth3: return 3;
            case PorosityVariant::layered5: return 5;
            case PorosityVariant::appendix_b: return 3;
            case PorosityVariant::generic: return terms.size();
        }
        return 0;
    }

    double base(double y) const {
        switch (variant) {
            case PorosityVariant::smooth3: return 0.1;
            case PorosityVariant::appendix_b: return 0.1;
            case PorosityVariant::layered5:
                return y >= 120.0 ? 0.08 : (y >= 50.0 ? 0.06 : 0.09);
            case PorosityVariant::generic: {
                size_t k = 0;
                while (k < layer_tops.size() && y >= layer_tops[k]) ++k;
                return layer_values[k];
            }
        }
        return 0.0;
    }

    double evaluate(double x, double y, const ThetaVector& theta) const {
        switch (variant) {
            case PorosityVariant::smooth3: return porosity_smooth3(x, y, theta, amplitude);
            case PorosityVariant::layered5: return porosity_layered5(x, y, theta, amplitude);
            case PorosityVariant::appendix_b: return porosity_appendix_b(x, y, theta, amplitude);
            case PorosityVariant::generic: {
                detail::check_theta(theta, terms.size());
                double sum = 0.0;
                for (size_t i = 0; i < terms.size(); ++i) {
                    const GenericTerm& t = terms[i];
                    sum += theta[i] * std::cos(t.wx * x + t.px) * std::cos(t.wy * y + t.py);
                }
                return base(y) + amplitude * sum;
            }
        }
        return 0.0;
    }

    /// Worst-case bounds over theta in [-1,1]^M by the triangle inequality.
    /// Each term of every built-in variant has unit sup-norm, so the bound is
    /// base +- amplitude * M.
    void worst_case_bounds(double& lo, double& hi) const {
        double base_lo, base_hi;
        switch (variant) {
            case PorosityVariant::smooth3:
            case PorosityVariant::appendix_b: base_lo = base_hi = 0.1; break;
            case PorosityVariant::layered5: base_lo = 0.06; base_hi = 0.09; break;
            case PorosityVariant::generic: {
                base_lo = base_hi = layer_values.at(0);
                for (double v : layer_values) {
                    base_lo = std::min(base_lo, v);
                    base_hi = std::max(base_hi, v);
                }
                break;
            }
        }
        const double spread = std::abs(amplitude) * static_cast<double>(dim());
        lo = base_lo - spread;
        hi = base_hi + spread;
    }

    void validate(double domain_Ly = 150.0) const {
        if (dim() == 0)
            throw std::invalid_argument("PorosityFieldSpec: stochastic dimension is zero");
        if (variant == PorosityVariant::generic) {
            if (layer_values.size() != layer_tops.size() + 1)
                throw std::invalid_argument(
                    "PorosityFieldSpec: need one more layer value than layer boundary");
            for (size_t k = 0; k < layer_tops.size(); ++k) {
                if (k > 0 && !(layer_tops[k] > layer_tops[k - 1]))
                    throw std::invalid_argument(
                        "PorosityFieldSpec: layer boundaries must be strictly increasing");
                if (!(layer_tops[k] > 0.0 && layer_tops[k] < domain_Ly))
                    throw std::invalid_argument(
                        "PorosityFieldSpec: layer boundary outside (0, Ly)");
            }
        }
        double lo, hi;
        worst_case_bounds(lo, hi);
        if (!(lo > 0.0 && hi < 1.0))
            throw std::invalid_argument(
                "PorosityFieldSpec: worst-case porosity bound [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "] leaves (0,1)");
    }
};

} // namespace elderuq
