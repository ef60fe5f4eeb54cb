#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace elderuq {

/// One face of the dual (control-volume) mesh separating two adjacent vertices.
/// The unit normal points from vertex `a` to vertex `b`.
struct DualFace {
    int a;                         // vertex index on the negative side
    int b;                         // vertex index on the positive side
    double length;                 // face length, m
    double distance;               // |x_b - x_a|, m
    std::array<double, 2> normal;  // unit normal, axis aligned
    std::array<double, 2> midpoint;
};

/// Uniform tensor grid over (0,Lx) x (0,Ly) with vertex-centered control volumes
/// (dual boxes of the primal quadrilateral mesh).
class StructuredGrid {
  public:
    StructuredGrid(int nx, int ny, double Lx, double Ly)
        : nx_(nx), ny_(ny), Lx_(Lx), Ly_(Ly) {
        if (nx < 1 || ny < 1)
            throw std::invalid_argument("StructuredGrid: cell counts must be >= 1");
        if (!(Lx > 0.0) || !(Ly > 0.0))
            throw std::invalid_argument("StructuredGrid: domain extents must be positive");
        dx_ = Lx / nx;
        dy_ = Ly / ny;
        const int nvx = nx + 1, nvy = ny + 1;
        volumes_.resize(static_cast<size_t>(nvx) * nvy);
        for (int j = 0; j < nvy; ++j) {
            const double hy = (j == 0 || j == ny) ? 0.5 * dy_ : dy_;
            for (int i = 0; i < nvx; ++i) {
                const double hx = (i == 0 || i == nx) ? 0.5 * dx_ : dx_;
                volumes_[vertex(i, j)] = hx * hy;
            }
        }
        // Dual faces at primal cell midlines: one per adjacent vertex pair.
        faces_.reserve(static_cast<size_t>(nx) * nvy + static_cast<size_t>(ny) * nvx);
        for (int j = 0; j < nvy; ++j) {
            const double len = (j == 0 || j == ny) ? 0.5 * dy_ : dy_;
            for (int i = 0; i < nx; ++i) {
                DualFace f;
                f.a = vertex(i, j);
                f.b = vertex(i + 1, j);
                f.length = len;
                f.distance = dx_;
                f.normal = {1.0, 0.0};
                f.midpoint = {(i + 0.5) * dx_, j * dy_};
                faces_.push_back(f);
            }
        }
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nvx; ++i) {
                DualFace f;
                f.a = vertex(i, j);
                f.b = vertex(i, j + 1);
                f.length = (i == 0 || i == nx) ? 0.5 * dx_ : dx_;
                f.distance = dy_;
                f.normal = {0.0, 1.0};
                f.midpoint = {i * dx_, (j + 0.5) * dy_};
                faces_.push_back(f);
            }
        }
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double Lx() const { return Lx_; }
    double Ly() const { return Ly_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    int num_vertices() const { return (nx_ + 1) * (ny_ + 1); }
    int num_cells() const { return nx_ * ny_; }

    int vertex(int i, int j) const { return j * (nx_ + 1) + i; }
    double x(int i) const { return i * dx_; }
    double y(int j) const { return j * dy_; }
    std::array<double, 2> coords(int v) const {
        return {x(v % (nx_ + 1)), y(v / (nx_ + 1))};
    }

    /// Control-volume area of vertex v, m^2.
    double volume(int v) const { return volumes_[v]; }
    const std::vector<double>& volumes() const { return volumes_; }

    const std::vector<DualFace>& faces() const { return faces_; }

    /// Index of the vertex closest to (px, py).
    int nearest_vertex(double px, double py) const {
        int i = static_cast<int>(px / dx_ + 0.5);
        int j = static_cast<int>(py / dy_ + 0.5);
        i = i < 0 ? 0 : (i > nx_ ? nx_ : i);
        j = j < 0 ? 0 : (j > ny_ ? ny_ : j);
        return vertex(i, j);
    }

  private:
    int nx_, ny_;
    double Lx_, Ly_;
    double dx_, dy_;
    std::vector<double> volumes_;
    std::vector<DualFace> faces_;
};

enum class BoundaryKind : unsigned char {
    interior,    // no Dirichlet value; flux balance everywhere
    top_inflow,  // Dirichlet c = inflow value on the top segment
    bottom       // Dirichlet c = 0
};

/// Boundary classification: Dirichlet salt rows on the tagged top segment and the
/// whole bottom, no-flux elsewhere, pressure anchored at the two upper corners.
struct BoundaryTags {
    std::vector<BoundaryKind> kind;  // per vertex
    std::array<int, 2> pressure_anchors;
    double inflow_c = 1.0;

    bool is_dirichlet_c(int v) const { return kind[v] != BoundaryKind::interior; }
    double dirichlet_c(int v) const {
        return kind[v] == BoundaryKind::top_inflow ? inflow_c : 0.0;
    }
    bool is_pressure_anchor(int v) const {
        return v == pressure_anchors[0] || v == pressure_anchors[1];
    }
};

/// Tag the top vertices with x in [inflow_x_min, inflow_x_max] as salt inflow
/// (c = inflow_c), the whole bottom as c = 0, and anchor p = 0 at the two upper
/// corners. The inflow range must cut the top boundary in at least one vertex.
inline BoundaryTags tag_boundaries(const StructuredGrid& grid, double inflow_x_min,
                                   double inflow_x_max, double inflow_c = 1.0) {
    if (!(inflow_x_min >= 0.0 && inflow_x_max <= grid.Lx() && inflow_x_min <= inflow_x_max))
        throw std::invalid_argument("tag_boundaries: inflow range must be a subset of [0, Lx]");
    BoundaryTags tags;
    tags.kind.assign(grid.num_vertices(), BoundaryKind::interior);
    tags.inflow_c = inflow_c;
    const double tol = 1e-9 * grid.Lx();
    int tagged = 0;
    for (int i = 0; i <= grid.nx(); ++i) {
        tags.kind[grid.vertex(i, 0)] = BoundaryKind::bottom;
        const double xi = grid.x(i);
        if (xi >= inflow_x_min - tol && xi <= inflow_x_max + tol) {
            tags.kind[grid.vertex(i, grid.ny())] = BoundaryKind::top_inflow;
            ++tagged;
        }
    }
    if (tagged == 0)
        throw std::invalid_argument("tag_boundaries: inflow range contains no top vertex");
    tags.pressure_anchors = {grid.vertex(0, grid.ny()), grid.vertex(grid.nx(), grid.ny())};
    return tags;
}

} // namespace elderuq
