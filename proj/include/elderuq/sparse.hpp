#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace elderuq {

/// Dense 2x2 block, row-major: a[0]=d(r0)/d(u0), a[1]=d(r0)/d(u1), a[2], a[3].
struct Block2 {
    double a[4] = {0.0, 0.0, 0.0, 0.0};

    void zero() { a[0] = a[1] = a[2] = a[3] = 0.0; }

    Block2 inverse() const {
        const double det = a[0] * a[3] - a[1] * a[2];
        if (det == 0.0) throw std::runtime_error("Block2: singular diagonal block");
        const double s = 1.0 / det;
        Block2 inv;
        inv.a[0] = a[3] * s;
        inv.a[1] = -a[1] * s;
        inv.a[2] = -a[2] * s;
        inv.a[3] = a[0] * s;
        return inv;
    }
};

inline Block2 multiply(const Block2& x, const Block2& y) {
    Block2 r;
    r.a[0] = x.a[0] * y.a[0] + x.a[1] * y.a[2];
    r.a[1] = x.a[0] * y.a[1] + x.a[1] * y.a[3];
    r.a[2] = x.a[2] * y.a[0] + x.a[3] * y.a[2];
    r.a[3] = x.a[2] * y.a[1] + x.a[3] * y.a[3];
    return r;
}

/// Sparse matrix of 2x2 blocks in CSR layout with sorted column indices.
/// Vectors interleave the two unknowns per block row: u = (p_0, c_0, p_1, c_1, ...).
class BlockCsr {
  public:
    BlockCsr() = default;

    /// Build the sparsity pattern from an adjacency list; the diagonal entry is
    /// always present. Neighbor lists need not be sorted.
    static BlockCsr from_adjacency(int n_rows, const std::vector<std::vector<int>>& neighbors) {
        BlockCsr m;
        m.n_ = n_rows;
        m.row_ptr_.assign(n_rows + 1, 0);
        std::vector<int> cols;
        for (int i = 0; i < n_rows; ++i) {
            cols.assign(neighbors[i].begin(), neighbors[i].end());
            cols.push_back(i);
            std::sort(cols.begin(), cols.end());
            cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
            m.col_idx_.insert(m.col_idx_.end(), cols.begin(), cols.end());
            m.row_ptr_[i + 1] = static_cast<int>(m.col_idx_.size());
        }
        m.blocks_.assign(m.col_idx_.size(), Block2{});
        m.build_diag_ptr();
        return m;
    }

    int rows() const { return n_; }
    size_t nnz() const { return blocks_.size(); }

    void set_zero() {
        for (auto& b : blocks_) b.zero();
    }

    /// Entry lookup; throws if (i,j) is outside the pattern.
    Block2& at(int i, int j) {
        const int k = find(i, j);
        if (k < 0) throw std::out_of_range("BlockCsr: entry outside sparsity pattern");
        return blocks_[k];
    }
    const Block2& diag(int i) const { return blocks_[diag_ptr_[i]]; }
    Block2& diag(int i) { return blocks_[diag_ptr_[i]]; }

    int find(int i, int j) const {
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (col_idx_[k] == j) return k;
        return -1;
    }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<Block2>& blocks() const { return blocks_; }
    std::vector<Block2>& blocks() { return blocks_; }

    /// y = A x
    void multiply_vec(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(2 * n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            double y0 = 0.0, y1 = 0.0;
            for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                const int j = col_idx_[k];
                const Block2& b = blocks_[k];
                const double x0 = x[2 * j], x1 = x[2 * j + 1];
                y0 += b.a[0] * x0 + b.a[1] * x1;
                y1 += b.a[2] * x0 + b.a[3] * x1;
            }
            y[2 * i] = y0;
            y[2 * i + 1] = y1;
        }
    }

    /// r = b - A x
    void residual(const std::vector<double>& x, const std::vector<double>& b,
                  std::vector<double>& r) const {
        multiply_vec(x, r);
        for (size_t k = 0; k < r.size(); ++k) r[k] = b[k] - r[k];
    }

  private:
    void build_diag_ptr() {
        diag_ptr_.assign(n_, -1);
        for (int i = 0; i < n_; ++i) {
            diag_ptr_[i] = find(i, i);
            if (diag_ptr_[i] < 0)
                throw std::logic_error("BlockCsr: missing diagonal entry");
        }
    }

    int n_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<Block2> blocks_;
    std::vector<int> diag_ptr_;
};

/// Scalar interpolation operator (fine rows, coarse columns) in CSR form;
/// the same weights apply to both unknowns of a block row.
struct Prolongation {
    int n_fine = 0;
    int n_coarse = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> weight;
};

/// Bilinear interpolation from the (nx/2, ny/2) vertex grid to the (nx, ny) one.
/// Requires even nx, ny.
inline Prolongation bilinear_prolongation(int nx, int ny) {
    if (nx % 2 != 0 || ny % 2 != 0)
        throw std::invalid_argument("bilinear_prolongation: cell counts must be even");
    const int cx = nx / 2, cy = ny / 2;
    Prolongation P;
    P.n_fine = (nx + 1) * (ny + 1);
    P.n_coarse = (cx + 1) * (cy + 1);
    P.row_ptr.reserve(P.n_fine + 1);
    P.row_ptr.push_back(0);
    const auto coarse_vertex = [cx](int I, int J) { return J * (cx + 1) + I; };
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const int I = i / 2, J = j / 2;
            if (i % 2 == 0 && j % 2 == 0) {
                P.col_idx.push_back(coarse_vertex(I, J));
                P.weight.push_back(1.0);
            } else if (i % 2 == 1 && j % 2 == 0) {
                P.col_idx.push_back(coarse_vertex(I, J));
                P.col_idx.push_back(coarse_vertex(I + 1, J));
                P.weight.push_back(0.5);
                P.weight.push_back(0.5);
            } else if (i % 2 == 0 && j % 2 == 1) {
                P.col_idx.push_back(coarse_vertex(I, J));
                P.col_idx.push_back(coarse_vertex(I, J + 1));
                P.weight.push_back(0.5);
                P.weight.push_back(0.5);
            } else {
                P.col_idx.push_back(coarse_vertex(I, J));
                P.col_idx.push_back(coarse_vertex(I + 1, J));
                P.col_idx.push_back(coarse_vertex(I, J + 1));
                P.col_idx.push_back(coarse_vertex(I + 1, J + 1));
                for (int k = 0; k < 4; ++k) P.weight.push_back(0.25);
            }
            P.row_ptr.push_back(static_cast<int>(P.col_idx.size()));
        }
    }
    return P;
}

/// x_fine += P x_coarse (per unknown component).
inline void prolongate_add(const Prolongation& P, const std::vector<double>& xc,
                           std::vector<double>& xf) {
    for (int i = 0; i < P.n_fine; ++i)
        for (int k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
            const int J = P.col_idx[k];
            const double w = P.weight[k];
            xf[2 * i] += w * xc[2 * J];
            xf[2 * i + 1] += w * xc[2 * J + 1];
        }
}

/// r_coarse = P^T r_fine.
inline void restrict_vec(const Prolongation& P, const std::vector<double>& rf,
                         std::vector<double>& rc) {
    rc.assign(2 * P.n_coarse, 0.0);
    for (int i = 0; i < P.n_fine; ++i)
        for (int k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k) {
            const int J = P.col_idx[k];
            const double w = P.weight[k];
            rc[2 * J] += w * rf[2 * i];
            rc[2 * J + 1] += w * rf[2 * i + 1];
        }
}

/// Galerkin coarse operator A_c = P^T A P.
inline BlockCsr galerkin_product(const BlockCsr& A, const Prolongation& P) {
    const int nc = P.n_coarse;
    // per coarse row: unsorted (column, block) contributions, merged on compression
    std::vector<std::vector<int>> cols(nc);
    std::vector<std::vector<Block2>> vals(nc);

    // for every fine row i: row_i(AP) = sum_k A(i,k) P(k,:), deduplicated with a
    // marker, then P(i,I)^T row_i scatters into coarse row I
    std::vector<int> ap_cols;
    std::vector<Block2> ap_vals;
    std::vector<int> ap_marker(nc, -1);
    for (int i = 0; i < A.rows(); ++i) {
        ap_cols.clear();
        ap_vals.clear();
        for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
            const int j = A.col_idx()[k];
            const Block2& Aij = A.blocks()[k];
            for (int q = P.row_ptr[j]; q < P.row_ptr[j + 1]; ++q) {
                const int J = P.col_idx[q];
                const double w = P.weight[q];
                int slot = ap_marker[J];
                if (slot < 0) {
                    slot = static_cast<int>(ap_cols.size());
                    ap_marker[J] = slot;
                    ap_cols.push_back(J);
                    ap_vals.push_back(Block2{});
                }
                Block2& acc = ap_vals[slot];
                for (int t = 0; t < 4; ++t) acc.a[t] += w * Aij.a[t];
            }
        }
        for (int q = P.row_ptr[i]; q < P.row_ptr[i + 1]; ++q) {
            const int I = P.col_idx[q];
            const double w = P.weight[q];
            for (size_t s = 0; s < ap_cols.size(); ++s) {
                cols[I].push_back(ap_cols[s]);
                Block2 scaled;
                for (int t = 0; t < 4; ++t) scaled.a[t] = w * ap_vals[s].a[t];
                vals[I].push_back(scaled);
            }
        }
        for (int J : ap_cols) ap_marker[J] = -1;
    }

    // compress to CSR with sorted, unique columns; duplicates accumulate
    BlockCsr C = BlockCsr::from_adjacency(nc, cols);
    C.set_zero();
    for (int I = 0; I < nc; ++I)
        for (size_t s = 0; s < cols[I].size(); ++s) {
            Block2& dst = C.at(I, cols[I][s]);
            for (int t = 0; t < 4; ++t) dst.a[t] += vals[I][s].a[t];
        }
    return C;
}

} // namespace elderuq
