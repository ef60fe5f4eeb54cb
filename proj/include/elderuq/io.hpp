#pragma once

#include "elderuq/flow_solver.hpp"
#include "elderuq/grid.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

/// Legacy-ASCII VTK structured points file with one double scalar per vertex.
inline void write_vtk_scalar(const std::string& path, const StructuredGrid& grid,
                             const std::string& name, const std::vector<double>& values) {
    if (values.size() != size_t(grid.num_vertices()))
        throw std::invalid_argument("write_vtk_scalar: field size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_vtk_scalar: cannot open " + path);
    char buf[64];
    out << "# vtk DataFile Version 3.0\n";
    out << name << "\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << grid.nx() + 1 << " " << grid.ny() + 1 << " 1\n";
    out << "ORIGIN 0 0 0\n";
    std::snprintf(buf, sizeof(buf), "SPACING %.17g %.17g 1\n", grid.dx(), grid.dy());
    out << buf;
    out << "POINT_DATA " << grid.num_vertices() << "\n";
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : values) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    }
}

/// Per-vertex CSV dump with x,y,value rows.
inline void write_csv_field(const std::string& path, const StructuredGrid& grid,
                            const std::vector<double>& values) {
    if (values.size() != size_t(grid.num_vertices()))
        throw std::invalid_argument("write_csv_field: field size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv_field: cannot open " + path);
    out << "x,y,value\n";
    char buf[96];
    for (int v = 0; v < grid.num_vertices(); ++v) {
        const auto xy = grid.coords(v);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", xy[0], xy[1], values[v]);
        out << buf;
    }
}

namespace detail {

constexpr char realization_magic[8] = {'E', 'U', 'Q', 'R', 'E', 'A', 'L', '1'};
constexpr uint32_t realization_version = 1;

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
void read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("realization file: truncated read");
}

} // namespace detail

/// Fixed little-endian binary realization file: a self-describing header (grid
/// dims and extents, theta, porosity range, snapshot times) followed by the
/// 64-bit c and p arrays of each snapshot.
inline void write_realization(const std::string& path, const StructuredGrid& grid,
                              const Realization& real) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_realization: cannot open " + path);
    out.write(detail::realization_magic, 8);
    detail::write_pod(out, detail::realization_version);
    detail::write_pod(out, static_cast<uint32_t>(grid.nx()));
    detail::write_pod(out, static_cast<uint32_t>(grid.ny()));
    detail::write_pod(out, grid.Lx());
    detail::write_pod(out, grid.Ly());
    detail::write_pod(out, static_cast<uint32_t>(real.theta.dim()));
    for (double t : real.theta.values) detail::write_pod(out, t);
    detail::write_pod(out, real.min_porosity);
    detail::write_pod(out, real.max_porosity);
    detail::write_pod(out, static_cast<uint32_t>(real.snapshots.size()));
    for (const auto& snap : real.snapshots) detail::write_pod(out, snap.time);
    for (const auto& snap : real.snapshots) {
        out.write(reinterpret_cast<const char*>(snap.c.data()),
                  std::streamsize(snap.c.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(snap.p.data()),
                  std::streamsize(snap.p.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write_realization: short write to " + path);
}

inline Realization read_realization(const std::string& path, uint32_t* nx_out = nullptr,
                                    uint32_t* ny_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_realization: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::realization_magic, 8) != 0)
        throw std::runtime_error("read_realization: bad magic in " + path);
    uint32_t version;
    detail::read_pod(in, version);
    if (version != detail::realization_version)
        throw std::runtime_error("read_realization: unsupported version in " + path);
    uint32_t nx, ny;
    detail::read_pod(in, nx);
    detail::read_pod(in, ny);
    double Lx, Ly;
    detail::read_pod(in, Lx);
    detail::read_pod(in, Ly);
    Realization real;
    uint32_t m;
    detail::read_pod(in, m);
    real.theta.values.resize(m);
    for (auto& t : real.theta.values) detail::read_pod(in, t);
    detail::read_pod(in, real.min_porosity);
    detail::read_pod(in, real.max_porosity);
    uint32_t n_snaps;
    detail::read_pod(in, n_snaps);
    std::vector<double> times(n_snaps);
    for (auto& t : times) detail::read_pod(in, t);
    const size_t nv = size_t(nx + 1) * (ny + 1);
    real.snapshots.resize(n_snaps);
    for (uint32_t s = 0; s < n_snaps; ++s) {
        auto& snap = real.snapshots[s];
        snap.time = times[s];
        snap.theta = real.theta;
        snap.c.resize(nv);
        snap.p.resize(nv);
        in.read(reinterpret_cast<char*>(snap.c.data()), std::streamsize(nv * sizeof(double)));
        in.read(reinterpret_cast<char*>(snap.p.data()), std::streamsize(nv * sizeof(double)));
        if (!in) throw std::runtime_error("read_realization: truncated payload in " + path);
    }
    if (nx_out) *nx_out = nx;
    if (ny_out) *ny_out = ny;
    return real;
}

/// Write-then-rename so readers never observe a partially written file.
inline void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write_text: cannot open " + tmp);
        out << content;
        if (!out) throw std::runtime_error("atomic_write_text: short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace elderuq
