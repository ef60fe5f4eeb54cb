#pragma once

#include "elderuq/sparse.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

enum class PreconditionerKind { multigrid, ilu0, jacobi };

inline PreconditionerKind preconditioner_from_string(const std::string& s) {
    if (s == "multigrid") return PreconditionerKind::multigrid;
    if (s == "ilu0") return PreconditionerKind::ilu0;
    if (s == "jacobi") return PreconditionerKind::jacobi;
    throw std::invalid_argument("unknown preconditioner: " + s);
}

struct LinearSolverControls {
    double tol = 1e-10;
    int max_iter = 300;
    PreconditionerKind preconditioner = PreconditionerKind::multigrid;
    int mg_levels = 8;          // cap; coarsening stops when cell counts go odd
    int mg_smooth_sweeps = 2;   // pre- and post-smoothing sweeps
    double jacobi_omega = 0.8;  // damping of the Jacobi smoother
    int coarsest_size = 64;     // stop coarsening below this many vertices
};

struct LinearSolveReport {
    bool converged = false;
    int iterations = 0;
    double rel_residual = 0.0;
    bool used_fallback = false;
};

namespace detail {

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Dense LU with partial pivoting over the expanded 2n x 2n matrix; used for
/// the multigrid coarsest level.
class DenseLu {
  public:
    explicit DenseLu(const BlockCsr& A) : n_(2 * A.rows()), lu_(size_t(n_) * n_, 0.0), piv_(n_) {
        for (int i = 0; i < A.rows(); ++i)
            for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
                const int j = A.col_idx()[k];
                const Block2& b = A.blocks()[k];
                lu_[size_t(2 * i) * n_ + 2 * j] = b.a[0];
                lu_[size_t(2 * i) * n_ + 2 * j + 1] = b.a[1];
                lu_[size_t(2 * i + 1) * n_ + 2 * j] = b.a[2];
                lu_[size_t(2 * i + 1) * n_ + 2 * j + 1] = b.a[3];
            }
        factor();
    }

    void solve(const std::vector<double>& b, std::vector<double>& x) const {
        x = b;
        for (int i = 0; i < n_; ++i) std::swap(x[i], x[piv_[i]]);
        for (int i = 1; i < n_; ++i) {
            double s = x[i];
            for (int j = 0; j < i; ++j) s -= lu_[size_t(i) * n_ + j] * x[j];
            x[i] = s;
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = x[i];
            for (int j = i + 1; j < n_; ++j) s -= lu_[size_t(i) * n_ + j] * x[j];
            x[i] = s / lu_[size_t(i) * n_ + i];
        }
    }

  private:
    void factor() {
        for (int k = 0; k < n_; ++k) {
            int p = k;
            double best = std::abs(lu_[size_t(k) * n_ + k]);
            for (int i = k + 1; i < n_; ++i) {
                const double v = std::abs(lu_[size_t(i) * n_ + k]);
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best == 0.0) throw std::runtime_error("DenseLu: singular matrix");
            piv_[k] = p;
            if (p != k)
                for (int j = 0; j < n_; ++j)
                    std::swap(lu_[size_t(k) * n_ + j], lu_[size_t(p) * n_ + j]);
            const double inv = 1.0 / lu_[size_t(k) * n_ + k];
            for (int i = k + 1; i < n_; ++i) {
                const double f = lu_[size_t(i) * n_ + k] * inv;
                lu_[size_t(i) * n_ + k] = f;
                if (f == 0.0) continue;
                for (int j = k + 1; j < n_; ++j)
                    lu_[size_t(i) * n_ + j] -= f * lu_[size_t(k) * n_ + j];
            }
        }
    }

    int n_;
    std::vector<double> lu_;
    std::vector<int> piv_;
};

} // namespace detail

/// Abstract left-applied preconditioner: z ~= A^{-1} v.
class Preconditioner {
  public:
    virtual ~Preconditioner() = default;
    virtual void apply(const std::vector<double>& v, std::vector<double>& z) const = 0;
};

/// Damped block-Jacobi: z = omega D^{-1} v.
class JacobiPreconditioner : public Preconditioner {
  public:
    JacobiPreconditioner(const BlockCsr& A, double omega) : omega_(omega) {
        diag_inv_.reserve(A.rows());
        for (int i = 0; i < A.rows(); ++i) diag_inv_.push_back(A.diag(i).inverse());
    }

    void apply(const std::vector<double>& v, std::vector<double>& z) const override {
        z.resize(v.size());
        for (size_t i = 0; i < diag_inv_.size(); ++i) {
            const Block2& d = diag_inv_[i];
            const double v0 = v[2 * i], v1 = v[2 * i + 1];
            z[2 * i] = omega_ * (d.a[0] * v0 + d.a[1] * v1);
            z[2 * i + 1] = omega_ * (d.a[2] * v0 + d.a[3] * v1);
        }
    }

  private:
    double omega_;
    std::vector<Block2> diag_inv_;
};

/// Block ILU(0): incomplete factorization on the existing sparsity pattern with
/// 2x2 block pivots.
class Ilu0Preconditioner : public Preconditioner {
  public:
    explicit Ilu0Preconditioner(const BlockCsr& A)
        : n_(A.rows()), row_ptr_(A.row_ptr()), col_idx_(A.col_idx()), blocks_(A.blocks()) {
        diag_ptr_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            int d = -1;
            for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                if (col_idx_[k] == i) d = k;
            if (d < 0) throw std::logic_error("Ilu0: missing diagonal");
            diag_ptr_[i] = d;
        }
        factor();
    }

    void apply(const std::vector<double>& v, std::vector<double>& z) const override {
        z = v;
        // forward: (L+I) y = v with strictly-lower L
        for (int i = 0; i < n_; ++i) {
            double z0 = z[2 * i], z1 = z[2 * i + 1];
            for (int k = row_ptr_[i]; k < diag_ptr_[i]; ++k) {
                const int j = col_idx_[k];
                const Block2& b = blocks_[k];
                z0 -= b.a[0] * z[2 * j] + b.a[1] * z[2 * j + 1];
                z1 -= b.a[2] * z[2 * j] + b.a[3] * z[2 * j + 1];
            }
            z[2 * i] = z0;
            z[2 * i + 1] = z1;
        }
        // backward: U z = y with the factored diagonal blocks
        for (int i = n_ - 1; i >= 0; --i) {
            double z0 = z[2 * i], z1 = z[2 * i + 1];
            for (int k = diag_ptr_[i] + 1; k < row_ptr_[i + 1]; ++k) {
                const int j = col_idx_[k];
                const Block2& b = blocks_[k];
                z0 -= b.a[0] * z[2 * j] + b.a[1] * z[2 * j + 1];
                z1 -= b.a[2] * z[2 * j] + b.a[3] * z[2 * j + 1];
            }
            const Block2& dinv = diag_inv_[i];
            z[2 * i] = dinv.a[0] * z0 + dinv.a[1] * z1;
            z[2 * i + 1] = dinv.a[2] * z0 + dinv.a[3] * z1;
        }
    }

  private:
    void factor() {
        diag_inv_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            for (int k = row_ptr_[i]; k < diag_ptr_[i]; ++k) {
                const int j = col_idx_[k]; // j < i already factored
                Block2& Lij = blocks_[k];
                Lij = multiply(Lij, diag_inv_[j]);
                // eliminate within the retained pattern of row i
                for (int q = diag_ptr_[j] + 1; q < row_ptr_[j + 1]; ++q) {
                    const int col = col_idx_[q];
                    for (int t = k + 1; t < row_ptr_[i + 1]; ++t) {
                        if (col_idx_[t] == col) {
                            const Block2 upd = multiply(Lij, blocks_[q]);
                            for (int s = 0; s < 4; ++s) blocks_[t].a[s] -= upd.a[s];
                            break;
                        }
                    }
                }
            }
            diag_inv_[i] = blocks_[diag_ptr_[i]].inverse();
        }
    }

    int n_;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<Block2> blocks_;
    std::vector<int> diag_ptr_;
    std::vector<Block2> diag_inv_;
};

/// Geometric multigrid V-cycle on the structured vertex hierarchy with Galerkin
/// coarse operators, damped block-Jacobi smoothing and a direct coarsest solve.
class MultigridPreconditioner : public Preconditioner {
  public:
    MultigridPreconditioner(const BlockCsr& A, int nx, int ny,
                            const LinearSolverControls& controls)
        : sweeps_(controls.mg_smooth_sweeps), omega_(controls.jacobi_omega) {
        ops_.push_back(A);
        int cx = nx, cy = ny;
        while (static_cast<int>(ops_.size()) < controls.mg_levels && cx % 2 == 0 &&
               cy % 2 == 0 && cx >= 2 && cy >= 2 &&
               (cx + 1) * (cy + 1) > controls.coarsest_size) {
            prolong_.push_back(bilinear_prolongation(cx, cy));
            ops_.push_back(galerkin_product(ops_.back(), prolong_.back()));
            cx /= 2;
            cy /= 2;
        }
        for (const auto& op : ops_) {
            std::vector<Block2> dinv;
            dinv.reserve(op.rows());
            for (int i = 0; i < op.rows(); ++i) dinv.push_back(op.diag(i).inverse());
            diag_inv_.push_back(std::move(dinv));
        }
        coarse_lu_ = std::make_unique<detail::DenseLu>(ops_.back());
    }

    size_t levels() const { return ops_.size(); }

    void apply(const std::vector<double>& v, std::vector<double>& z) const override {
        z.assign(v.size(), 0.0);
        cycle(0, v, z);
    }

  private:
    void smooth(size_t level, const std::vector<double>& b, std::vector<double>& x) const {
        const BlockCsr& A = ops_[level];
        std::vector<double> r;
        for (int s = 0; s < sweeps_; ++s) {
            A.residual(x, b, r);
            const auto& dinv = diag_inv_[level];
            for (size_t i = 0; i < dinv.size(); ++i) {
                const Block2& d = dinv[i];
                const double r0 = r[2 * i], r1 = r[2 * i + 1];
                x[2 * i] += omega_ * (d.a[0] * r0 + d.a[1] * r1);
                x[2 * i + 1] += omega_ * (d.a[2] * r0 + d.a[3] * r1);
            }
        }
    }

    void cycle(size_t level, const std::vector<double>& b, std::vector<double>& x) const {
        if (level == ops_.size() - 1) {
            coarse_lu_->solve(b, x);
            return;
        }
        smooth(level, b, x);
        std::vector<double> r, rc, ec;
        ops_[level].residual(x, b, r);
        restrict_vec(prolong_[level], r, rc);
        ec.assign(rc.size(), 0.0);
        cycle(level + 1, rc, ec);
        prolongate_add(prolong_[level], ec, x);
        smooth(level, b, x);
    }

    std::vector<BlockCsr> ops_;
    std::vector<Prolongation> prolong_;
    std::vector<std::vector<Block2>> diag_inv_;
    std::unique_ptr<detail::DenseLu> coarse_lu_;
    int sweeps_;
    double omega_;
};

/// Preconditioned BiCGStab; returns the achieved relative residual. Breakdown
/// or stagnation leaves `converged == false`.
inline LinearSolveReport bicgstab(const BlockCsr& A, const std::vector<double>& b,
                                  std::vector<double>& x, const Preconditioner& M,
                                  double tol, int max_iter) {
    LinearSolveReport rep;
    const double bnorm = detail::norm2(b);
    x.assign(b.size(), 0.0);
    if (bnorm == 0.0) {
        rep.converged = true;
        return rep;
    }
    std::vector<double> r = b; // r = b - A*0
    std::vector<double> r_hat = r;
    std::vector<double> p(b.size(), 0.0), v(b.size(), 0.0);
    std::vector<double> p_hat, s, s_hat, t;
    double rho_old = 1.0, alpha = 1.0, omega = 1.0;
    bool fresh = true;

    double rnorm = bnorm;
    for (int it = 1; it <= max_iter; ++it) {
        double rho = detail::dot(r_hat, r);
        if (std::abs(rho) <= 1e-30 * rnorm * rnorm && !fresh) {
            // (r_hat, r) vanished before convergence: restart with a new shadow
            r_hat = r;
            rho = rnorm * rnorm;
            fresh = true;
        }
        if (std::abs(rho) < 1e-300) break; // breakdown
        if (fresh) {
            p = r;
            fresh = false;
        } else {
            const double beta = (rho / rho_old) * (alpha / omega);
            for (size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        M.apply(p, p_hat);
        A.multiply_vec(p_hat, v);
        const double rv = detail::dot(r_hat, v);
        if (std::abs(rv) < 1e-300) break;
        alpha = rho / rv;
        s = r;
        for (size_t i = 0; i < s.size(); ++i) s[i] -= alpha * v[i];
        if (detail::norm2(s) <= tol * bnorm) {
            for (size_t i = 0; i < x.size(); ++i) x[i] += alpha * p_hat[i];
            rep.iterations = it;
            rep.rel_residual = detail::norm2(s) / bnorm;
            rep.converged = true;
            return rep;
        }
        M.apply(s, s_hat);
        A.multiply_vec(s_hat, t);
        const double tt = detail::dot(t, t);
        if (tt == 0.0) break;
        omega = detail::dot(t, s) / tt;
        if (omega == 0.0) break;
        for (size_t i = 0; i < x.size(); ++i) x[i] += alpha * p_hat[i] + omega * s_hat[i];
        r = s;
        for (size_t i = 0; i < r.size(); ++i) r[i] -= omega * t[i];
        rho_old = rho;
        rnorm = detail::norm2(r);
        rep.iterations = it;
        if (rnorm <= tol * bnorm) {
            rep.rel_residual = rnorm / bnorm;
            rep.converged = true;
            return rep;
        }
    }
    rep.rel_residual = rnorm / bnorm;
    return rep;
}

/// Solve A x = b to the requested relative residual. The multigrid
/// preconditioner needs the structured grid dimensions; on breakdown or
/// stagnation it falls back to ILU(0) before giving up.
inline LinearSolveReport linear_solve(const BlockCsr& A, const std::vector<double>& b,
                                      std::vector<double>& x,
                                      const LinearSolverControls& controls, int nx = 0,
                                      int ny = 0) {
    std::unique_ptr<Preconditioner> M;
    PreconditionerKind kind = controls.preconditioner;
    if (kind == PreconditionerKind::multigrid && (nx <= 0 || ny <= 0))
        kind = PreconditionerKind::ilu0;
    switch (kind) {
        case PreconditionerKind::multigrid:
            M = std::make_unique<MultigridPreconditioner>(A, nx, ny, controls);
            break;
        case PreconditionerKind::ilu0: M = std::make_unique<Ilu0Preconditioner>(A); break;
        case PreconditionerKind::jacobi:
            M = std::make_unique<JacobiPreconditioner>(A, controls.jacobi_omega);
            break;
    }
    LinearSolveReport rep = bicgstab(A, b, x, *M, controls.tol, controls.max_iter);
    if (!rep.converged && kind == PreconditionerKind::multigrid) {
        Ilu0Preconditioner fallback(A);
        rep = bicgstab(A, b, x, fallback, controls.tol, controls.max_iter);
        rep.used_fallback = true;
    }
    return rep;
}

} // namespace elderuq
