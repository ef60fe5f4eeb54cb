#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace elderuq {

/// Constitutive laws and physical constants of the density-driven flow model.
/// All quantities are SI: m, s, kg, Pa.
struct PhysicalParams {
    double mean_porosity = 0.1;            // E[phi], dimensionless
    double molecular_diffusion = 0.565e-6; // D_m, m^2/s
    double mean_permeability = 4.845e-13;  // E[K], m^2
    double gravity = 9.81;                 // |g|, m/s^2
    double density_pure = 1000.0;          // rho_0, kg/m^3
    double density_brine = 1200.0;         // rho_1, kg/m^3
    double viscosity = 1e-3;               // mu, kg/(m s), constant

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0))
                throw std::invalid_argument(std::string("PhysicalParams: ") + name +
                                            " must be strictly positive");
        };
        positive(mean_porosity, "mean_porosity");
        positive(molecular_diffusion, "molecular_diffusion");
        positive(mean_permeability, "mean_permeability");
        positive(gravity, "gravity");
        positive(density_pure, "density_pure");
        positive(density_brine, "density_brine");
        positive(viscosity, "viscosity");
        if (!(mean_porosity < 1.0))
            throw std::invalid_argument("PhysicalParams: mean_porosity must lie in (0,1)");
        if (!(density_brine > density_pure))
            throw std::invalid_argument("PhysicalParams: density_brine must exceed density_pure");
    }
};

/// rho(c) = rho_0 + (rho_1 - rho_0) c for mass fraction c in [0,1].
inline double density(double c, const PhysicalParams& p) {
    if (!(c >= 0.0 && c <= 1.0))
        throw std::domain_error("density: mass fraction outside [0,1]");
    return p.density_pure + (p.density_brine - p.density_pure) * c;
}

/// Permeability closure K(phi) = kappa_kc * phi^3 / (1 - phi^2).
struct KozenyCarmanClosure {
    double kappa_kc; // m^2
};

/// Scaling factor chosen so that K(E[phi]) equals E[K] exactly.
inline KozenyCarmanClosure calibrate_kozeny_carman(double mean_porosity,
                                                   double mean_permeability) {
    if (!(mean_porosity > 0.0 && mean_porosity < 1.0))
        throw std::invalid_argument("calibrate_kozeny_carman: mean porosity outside (0,1)");
    if (!(mean_permeability > 0.0))
        throw std::invalid_argument("calibrate_kozeny_carman: mean permeability must be positive");
    const double phi = mean_porosity;
    return {mean_permeability * (1.0 - phi * phi) / (phi * phi * phi)};
}

inline double permeability(double phi, const KozenyCarmanClosure& closure) {
    if (!(phi > 0.0 && phi < 1.0))
        throw std::domain_error("permeability: porosity outside (0,1)");
    return closure.kappa_kc * phi * phi * phi / (1.0 - phi * phi);
}

/// Darcy velocity q = -(K/mu) (grad p - rho g), gravity vector g = (0, -g).
inline std::array<double, 2> darcy_velocity(double K, double mu,
                                            const std::array<double, 2>& grad_p, double rho,
                                            double gravity_magnitude) {
    const double lambda = K / mu;
    return {-lambda * grad_p[0], -lambda * (grad_p[1] + rho * gravity_magnitude)};
}

} // namespace elderuq
