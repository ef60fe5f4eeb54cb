#pragma once

#include "elderuq/grid.hpp"
#include "elderuq/linear_solver.hpp"
#include "elderuq/physics.hpp"
#include "elderuq/random_fields.hpp"
#include "elderuq/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

/// Nodal state at one time: mass fraction c and pressure p per vertex, plus the
/// parameter vector that produced it. Times are SI seconds.
struct FieldSnapshot {
    double time = 0.0;
    std::vector<double> c;
    std::vector<double> p;
    ThetaVector theta;
};

constexpr double seconds_per_year = 3.1536e7; // 365-day year

struct SolverControls {
    double dt = 0.007 * seconds_per_year;
    double t_end = 7.0 * seconds_per_year;
    double newton_tol = 1e-8;        // relative residual reduction
    double newton_abs_tol = 0.0;     // optional absolute floor on ||r||
    double scaled_floor = 1e-12;     // floor on max_i |r_i| / scale_i
    int newton_max_iter = 12;
    double line_search_factor = 0.5;
    int line_search_max_trials = 8;
    int max_dt_halvings = 3;
    LinearSolverControls linear;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("SolverControls: dt must be positive");
        if (!(t_end >= 0.0)) throw std::invalid_argument("SolverControls: t_end must be >= 0");
        if (!(newton_tol > 0.0) || !(linear.tol > 0.0))
            throw std::invalid_argument("SolverControls: tolerances must be positive");
    }
};

/// Discrete problem: grid, boundary tags, physics, and the per-vertex porosity
/// and mobility (K(phi)/mu) fields of one realization.
struct FlowProblem {
    const StructuredGrid* grid = nullptr;
    BoundaryTags tags;
    PhysicalParams params;
    std::vector<double> porosity;
    std::vector<double> mobility; // K(phi)/mu
    double min_porosity = 0.0;
    double max_porosity = 0.0;

    static FlowProblem create(const StructuredGrid& grid, const BoundaryTags& tags,
                              const PhysicalParams& params,
                              const PorosityFieldSpec& field, const ThetaVector& theta) {
        params.validate();
        FlowProblem pb;
        pb.grid = &grid;
        pb.tags = tags;
        pb.params = params;
        const auto closure =
            calibrate_kozeny_carman(params.mean_porosity, params.mean_permeability);
        pb.porosity.resize(grid.num_vertices());
        pb.mobility.resize(grid.num_vertices());
        pb.min_porosity = 1.0;
        pb.max_porosity = 0.0;
        for (int v = 0; v < grid.num_vertices(); ++v) {
            const auto xy = grid.coords(v);
            const double phi = field.evaluate(xy[0], xy[1], theta);
            if (!(phi > 0.0 && phi < 1.0))
                throw std::runtime_error("FlowProblem: porosity " + std::to_string(phi) +
                                         " outside (0,1) at vertex " + std::to_string(v));
            pb.porosity[v] = phi;
            pb.mobility[v] = permeability(phi, closure) / params.viscosity;
            pb.min_porosity = std::min(pb.min_porosity, phi);
            pb.max_porosity = std::max(pb.max_porosity, phi);
        }
        return pb;
    }

    /// Initial condition: pure water at rest, hydrostatic pressure with rho_0.
    FieldSnapshot initial_state(const ThetaVector& theta) const {
        FieldSnapshot s;
        s.time = 0.0;
        s.theta = theta;
        const int n = grid->num_vertices();
        s.c.assign(n, 0.0);
        s.p.resize(n);
        for (int v = 0; v < n; ++v) {
            const auto xy = grid->coords(v);
            s.p[v] = params.density_pure * params.gravity * (grid->Ly() - xy[1]);
        }
        return s;
    }
};

namespace detail {

inline double clamp01(double c) { return c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c); }
inline double clamp01_active(double c) { return (c >= 0.0 && c <= 1.0) ? 1.0 : 0.0; }

} // namespace detail

/// Pack (p, c) arrays into the interleaved unknown vector and back.
inline std::vector<double> pack_state(const FieldSnapshot& s) {
    std::vector<double> u(2 * s.c.size());
    for (size_t v = 0; v < s.c.size(); ++v) {
        u[2 * v] = s.p[v];
        u[2 * v + 1] = s.c[v];
    }
    return u;
}

inline void unpack_state(const std::vector<double>& u, FieldSnapshot& s) {
    const size_t n = u.size() / 2;
    s.p.resize(n);
    s.c.resize(n);
    for (size_t v = 0; v < n; ++v) {
        s.p[v] = u[2 * v];
        s.c[v] = u[2 * v + 1];
    }
}

/// Implicit-Euler finite-volume residual of the coupled mass/salt system, with
/// optional analytic Jacobian and per-row magnitude scales.
///
/// Per control volume V_i the mass row is
///   [ (phi rho)^{n+1} - (phi rho)^n ] |V|/dt + sum_faces rho_f q.n l
/// and the salt row is
///   [ (phi rho c)^{n+1} - (phi rho c)^n ] |V|/dt
///     + sum_faces ( rho_f c_up q.n - rho_f phi_f D_m grad c . n ) l,
/// with two-point fluxes, arithmetic face averages of rho and K/mu, and full
/// upwinding of c. Dirichlet rows (salt at tagged boundaries, pressure at the
/// two anchors) are replaced by (value - target). Density is evaluated on c
/// clamped to [0,1]; the stored state itself is never clamped.
inline void assemble_system(const FlowProblem& pb, const std::vector<double>& u,
                            const std::vector<double>& u_old, double dt,
                            std::vector<double>& residual, BlockCsr* jacobian = nullptr,
                            std::vector<double>* row_scale = nullptr) {
    const StructuredGrid& grid = *pb.grid;
    const int n = grid.num_vertices();
    if (u.size() != size_t(2 * n) || u_old.size() != size_t(2 * n))
        throw std::invalid_argument("assemble_system: state size mismatch");
    for (int v = 0; v < n; ++v) {
        if (std::isnan(u[2 * v]) || std::isnan(u[2 * v + 1]) || std::isnan(u_old[2 * v]) ||
            std::isnan(u_old[2 * v + 1]))
            throw std::runtime_error("assemble_system: NaN state at vertex " +
                                     std::to_string(v));
    }
    const double rho0 = pb.params.density_pure;
    const double drho = pb.params.density_brine - pb.params.density_pure;
    const double g = pb.params.gravity;
    const double Dm = pb.params.molecular_diffusion;

    residual.assign(2 * n, 0.0);
    if (jacobian) jacobian->set_zero();
    if (row_scale) row_scale->assign(2 * n, 0.0);

    const auto rho_of = [&](double c) { return rho0 + drho * detail::clamp01(c); };

    // storage terms and replaced rows
    for (int v = 0; v < n; ++v) {
        const double p_v = u[2 * v];
        const double c_v = u[2 * v + 1];
        const double c_o = u_old[2 * v + 1];
        const bool anchor = pb.tags.is_pressure_anchor(v);
        const bool dirichlet_c = pb.tags.is_dirichlet_c(v);
        const double vol_dt = grid.volume(v) / dt;
        const double phi = pb.porosity[v];

        if (anchor) {
            residual[2 * v] = p_v;
            if (jacobian) jacobian->diag(v).a[0] = 1.0;
            if (row_scale) (*row_scale)[2 * v] = 1.0;
        } else {
            const double term = phi * (rho_of(c_v) - rho_of(c_o)) * vol_dt;
            residual[2 * v] += term;
            if (jacobian)
                jacobian->diag(v).a[1] += phi * drho * detail::clamp01_active(c_v) * vol_dt;
            if (row_scale) (*row_scale)[2 * v] += phi * rho_of(c_v) * vol_dt;
        }

        if (dirichlet_c) {
            residual[2 * v + 1] = c_v - pb.tags.dirichlet_c(v);
            if (jacobian) jacobian->diag(v).a[3] = 1.0;
            if (row_scale) (*row_scale)[2 * v + 1] = 1.0;
        } else {
            const double term = phi * (rho_of(c_v) * c_v - rho_of(c_o) * c_o) * vol_dt;
            residual[2 * v + 1] += term;
            if (jacobian)
                jacobian->diag(v).a[3] +=
                    phi * (drho * detail::clamp01_active(c_v) * c_v + rho_of(c_v)) * vol_dt;
            if (row_scale)
                (*row_scale)[2 * v + 1] += phi * rho_of(c_v) * std::max(1.0, std::abs(c_v)) * vol_dt;
        }
    }

    // face fluxes
    for (const auto& face : grid.faces()) {
        const int a = face.a, b = face.b;
        const double pa = u[2 * a], pb_ = u[2 * b];
        const double ca = u[2 * a + 1], cb = u[2 * b + 1];
        const double ell = face.length;
        const double inv_d = 1.0 / face.distance;
        const double ny = face.normal[1]; // gravity couples through g.n = -g*ny

        const double lam = 0.5 * (pb.mobility[a] + pb.mobility[b]);
        const double rho_a = rho_of(ca), rho_b = rho_of(cb);
        const double rho_f = 0.5 * (rho_a + rho_b);
        const double dra = 0.5 * drho * detail::clamp01_active(ca);
        const double drb = 0.5 * drho * detail::clamp01_active(cb);

        // q.n = -lam ( (pb - pa)/d + rho_f g ny )
        const double qn = -lam * ((pb_ - pa) * inv_d + rho_f * g * ny);
        const double dqn_dpa = lam * inv_d;
        const double dqn_dpb = -lam * inv_d;
        const double dqn_dca = -lam * g * ny * dra;
        const double dqn_dcb = -lam * g * ny * drb;

        const bool a_mass = !pb.tags.is_pressure_anchor(a);
        const bool b_mass = !pb.tags.is_pressure_anchor(b);
        const bool a_salt = !pb.tags.is_dirichlet_c(a);
        const bool b_salt = !pb.tags.is_dirichlet_c(b);

        // liquid mass flux rho_f q.n l out of a into b
        const double f_mass = rho_f * qn * ell;
        if (a_mass) residual[2 * a] += f_mass;
        if (b_mass) residual[2 * b] -= f_mass;
        if (row_scale) {
            if (a_mass) (*row_scale)[2 * a] += std::abs(f_mass);
            if (b_mass) (*row_scale)[2 * b] += std::abs(f_mass);
        }

        // upwind salt convection + central diffusion
        const bool up_a = qn >= 0.0;
        const double cup = up_a ? ca : cb;
        const double f_conv = rho_f * cup * qn * ell;
        const double gamma = 0.5 * (pb.porosity[a] + pb.porosity[b]) * Dm * ell * inv_d;
        const double f_diff = -gamma * rho_f * (cb - ca);
        const double f_salt = f_conv + f_diff;
        if (a_salt) residual[2 * a + 1] += f_salt;
        if (b_salt) residual[2 * b + 1] -= f_salt;
        if (row_scale) {
            const double mag = std::abs(f_conv) + std::abs(f_diff);
            if (a_salt) (*row_scale)[2 * a + 1] += mag;
            if (b_salt) (*row_scale)[2 * b + 1] += mag;
        }

        if (!jacobian) continue;

        const double dm_dpa = rho_f * dqn_dpa * ell;
        const double dm_dpb = rho_f * dqn_dpb * ell;
        const double dm_dca = (dra * qn + rho_f * dqn_dca) * ell;
        const double dm_dcb = (drb * qn + rho_f * dqn_dcb) * ell;

        const double dc_dpa = rho_f * cup * dqn_dpa * ell;
        const double dc_dpb = rho_f * cup * dqn_dpb * ell;
        double dc_dca = (dra * cup * qn + rho_f * cup * dqn_dca) * ell + gamma * rho_f -
                        gamma * dra * (cb - ca);
        double dc_dcb = (drb * cup * qn + rho_f * cup * dqn_dcb) * ell - gamma * rho_f -
                        gamma * drb * (cb - ca);
        if (up_a)
            dc_dca += rho_f * qn * ell;
        else
            dc_dcb += rho_f * qn * ell;

        Block2& Aaa = jacobian->diag(a);
        Block2& Abb = jacobian->diag(b);
        Block2& Aab = jacobian->at(a, b);
        Block2& Aba = jacobian->at(b, a);
        if (a_mass) {
            Aaa.a[0] += dm_dpa;
            Aaa.a[1] += dm_dca;
            Aab.a[0] += dm_dpb;
            Aab.a[1] += dm_dcb;
        }
        if (b_mass) {
            Abb.a[0] -= dm_dpb;
            Abb.a[1] -= dm_dcb;
            Aba.a[0] -= dm_dpa;
            Aba.a[1] -= dm_dca;
        }
        if (a_salt) {
            Aaa.a[2] += dc_dpa;
            Aaa.a[3] += dc_dca;
            Aab.a[2] += dc_dpb;
            Aab.a[3] += dc_dcb;
        }
        if (b_salt) {
            Abb.a[2] -= dc_dpb;
            Abb.a[3] -= dc_dcb;
            Aba.a[2] -= dc_dpa;
            Aba.a[3] -= dc_dca;
        }
    }
}

/// Jacobian sparsity pattern of the five-point stencil.
inline BlockCsr make_jacobian_pattern(const StructuredGrid& grid) {
    std::vector<std::vector<int>> adj(grid.num_vertices());
    for (const auto& f : grid.faces()) {
        adj[f.a].push_back(f.b);
        adj[f.b].push_back(f.a);
    }
    return BlockCsr::from_adjacency(grid.num_vertices(), adj);
}

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_norms; // including the initial one
    bool line_search_failed = false;
    bool linear_failed = false;
};

/// One implicit-Euler step by Newton's method with backtracking line search.
/// The iteration starts from `initial_guess` when given, otherwise from the
/// previous state.
class FlowStepper {
  public:
    FlowStepper(const FlowProblem& pb, const SolverControls& controls)
        : pb_(&pb), controls_(controls), jac_(make_jacobian_pattern(*pb.grid)) {
        controls.validate();
    }

    NewtonReport step(const std::vector<double>& u_old, double dt, std::vector<double>& u,
                      const std::vector<double>* initial_guess = nullptr) {
        NewtonReport rep;
        u = initial_guess ? *initial_guess : u_old;

        assemble_system(*pb_, u, u_old, dt, residual_, nullptr, &scale_);
        double rnorm = detail::norm2(residual_);
        const double r0 = rnorm;
        rep.residual_norms.push_back(rnorm);

        for (int it = 0; it < controls_.newton_max_iter; ++it) {
            if (converged(rnorm, r0)) {
                rep.converged = true;
                return rep;
            }
            assemble_system(*pb_, u, u_old, dt, residual_, &jac_, nullptr);
            for (auto& r : residual_) r = -r;
            const auto lin = linear_solve(jac_, residual_, du_, controls_.linear,
                                          pb_->grid->nx(), pb_->grid->ny());
            if (!lin.converged) {
                rep.linear_failed = true;
                return rep;
            }

            // backtracking on ||r|| with a sufficient-decrease condition
            double alpha = 1.0;
            bool accepted = false;
            for (int trial = 0; trial < controls_.line_search_max_trials; ++trial) {
                trial_.resize(u.size());
                for (size_t k = 0; k < u.size(); ++k) trial_[k] = u[k] + alpha * du_[k];
                assemble_system(*pb_, trial_, u_old, dt, residual_, nullptr, &scale_);
                const double rn = detail::norm2(residual_);
                if (rn <= (1.0 - 1e-4 * alpha) * rnorm) {
                    u.swap(trial_);
                    rnorm = rn;
                    accepted = true;
                    break;
                }
                alpha *= controls_.line_search_factor;
            }
            ++rep.iterations;
            if (!accepted) {
                rep.line_search_failed = true;
                return rep;
            }
            rep.residual_norms.push_back(rnorm);
        }
        rep.converged = converged(rnorm, r0);
        return rep;
    }

  private:
    bool converged(double rnorm, double r0) const {
        if (r0 == 0.0) return true;
        if (rnorm <= controls_.newton_tol * r0) return true;
        if (controls_.newton_abs_tol > 0.0 && rnorm <= controls_.newton_abs_tol) return true;
        if (controls_.scaled_floor > 0.0) {
            double worst = 0.0;
            for (size_t k = 0; k < residual_.size(); ++k) {
                const double s = std::max(scale_[k], 1e-300);
                worst = std::max(worst, std::abs(residual_[k]) / s);
            }
            if (worst <= controls_.scaled_floor) return true;
        }
        return false;
    }

    const FlowProblem* pb_;
    SolverControls controls_;
    BlockCsr jac_;
    std::vector<double> residual_, scale_, du_, trial_;
};

/// Result of one deterministic realization: snapshots at requested times plus
/// bookkeeping for diagnostics.
struct Realization {
    ThetaVector theta;
    std::vector<FieldSnapshot> snapshots;
    double min_porosity = 0.0;
    double max_porosity = 0.0;
    double min_c = 0.0; // over all accepted states, not just snapshots
    double max_c = 0.0;
    long total_steps = 0;
    long total_newton_iterations = 0;
    int dt_halvings = 0;
};

/// March the implicit-Euler scheme from t = 0 to t_end, storing snapshots at
/// the requested times (seconds). Requested times beyond t_end are dropped;
/// an empty schedule stores the final state. Steps shrink to land exactly on
/// snapshot times. A failed step retries with dt/2 (up to max_dt_halvings)
/// before the realization is abandoned with a diagnostic.
inline Realization time_march(const FlowProblem& pb, const SolverControls& controls,
                              std::vector<double> snapshot_times, const ThetaVector& theta) {
    controls.validate();
    Realization result;
    result.theta = theta;
    result.min_porosity = pb.min_porosity;
    result.max_porosity = pb.max_porosity;

    std::sort(snapshot_times.begin(), snapshot_times.end());
    snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()),
                         snapshot_times.end());
    while (!snapshot_times.empty() && snapshot_times.back() > controls.t_end)
        snapshot_times.pop_back();
    if (snapshot_times.empty()) snapshot_times.push_back(controls.t_end);

    FieldSnapshot state = pb.initial_state(theta);
    std::vector<double> u = pack_state(state);
    std::vector<double> u_next;

    FlowStepper stepper(pb, controls);
    const double t_tiny = 1e-9 * std::max(controls.dt, 1.0);

    size_t next_snap = 0;
    if (snapshot_times[0] <= t_tiny) {
        state.time = snapshot_times[0];
        result.snapshots.push_back(state);
        ++next_snap;
    }

    double t = 0.0;
    while (next_snap < snapshot_times.size()) {
        const double target = snapshot_times[next_snap];
        while (t < target - t_tiny) {
            const double dt_nominal = std::min(controls.dt, target - t);
            double dt = dt_nominal;
            int halvings = 0;
            while (true) {
                const auto rep = stepper.step(u, dt, u_next);
                result.total_newton_iterations += rep.iterations;
                if (rep.converged) break;
                if (halvings >= controls.max_dt_halvings)
                    throw std::runtime_error(
                        "time_march: step failed at t = " + std::to_string(t / seconds_per_year) +
                        " years after " + std::to_string(halvings) +
                        " dt halvings (dt = " + std::to_string(dt) + " s)");
                dt *= 0.5;
                ++halvings;
                ++result.dt_halvings;
            }
            u.swap(u_next);
            t += dt;
            ++result.total_steps;
            for (size_t v = 0; v < u.size(); v += 2) {
                result.min_c = std::min(result.min_c, u[v + 1]);
                result.max_c = std::max(result.max_c, u[v + 1]);
            }
        }
        unpack_state(u, state);
        state.time = target;
        state.theta = theta;
        result.snapshots.push_back(state);
        ++next_snap;
    }
    return result;
}

/// Salt bookkeeping for one accepted step: rate of change of dissolved salt in
/// the non-Dirichlet control volumes versus the net convective+diffusive flux
/// entering them across faces from Dirichlet vertices. Both in kg/s; they agree
/// up to the converged Newton residual.
struct SaltBalance {
    double storage_change_rate = 0.0;
    double boundary_influx = 0.0;
};

inline SaltBalance salt_balance(const FlowProblem& pb, const std::vector<double>& u_old,
                                const std::vector<double>& u_new, double dt) {
    const StructuredGrid& grid = *pb.grid;
    const double rho0 = pb.params.density_pure;
    const double drho = pb.params.density_brine - pb.params.density_pure;
    const double g = pb.params.gravity;
    const double Dm = pb.params.molecular_diffusion;
    const auto rho_of = [&](double c) { return rho0 + drho * detail::clamp01(c); };

    SaltBalance bal;
    for (int v = 0; v < grid.num_vertices(); ++v) {
        if (pb.tags.is_dirichlet_c(v)) continue;
        const double cn = u_new[2 * v + 1], co = u_old[2 * v + 1];
        bal.storage_change_rate +=
            pb.porosity[v] * (rho_of(cn) * cn - rho_of(co) * co) * grid.volume(v) / dt;
    }
    for (const auto& face : grid.faces()) {
        const bool a_dir = pb.tags.is_dirichlet_c(face.a);
        const bool b_dir = pb.tags.is_dirichlet_c(face.b);
        if (a_dir == b_dir) continue;
        const double pa = u_new[2 * face.a], pb_ = u_new[2 * face.b];
        const double ca = u_new[2 * face.a + 1], cb = u_new[2 * face.b + 1];
        const double lam = 0.5 * (pb.mobility[face.a] + pb.mobility[face.b]);
        const double rho_f = 0.5 * (rho_of(ca) + rho_of(cb));
        const double inv_d = 1.0 / face.distance;
        const double qn = -lam * ((pb_ - pa) * inv_d + rho_f * g * face.normal[1]);
        const double cup = qn >= 0.0 ? ca : cb;
        const double gamma = 0.5 * (pb.porosity[face.a] + pb.porosity[face.b]) * Dm *
                             face.length * inv_d;
        const double flux_ab = rho_f * cup * qn * face.length - gamma * rho_f * (cb - ca);
        // flux_ab leaves a and enters b
        bal.boundary_influx += a_dir ? flux_ab : -flux_ab;
    }
    return bal;
}

} // namespace elderuq
