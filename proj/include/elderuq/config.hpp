#pragma once

#include "elderuq/flow_solver.hpp"
#include "elderuq/grid.hpp"
#include "elderuq/multi_index.hpp"
#include "elderuq/physics.hpp"
#include "elderuq/random_fields.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace elderuq {

/// Configuration problem with the offending field path in the message.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class StochasticMethod { gpc, qmc };
enum class QuadratureChoice { smolyak_cc, tensor_cc, tensor_gl };

/// Everything a campaign needs, parsed from a dotted key = value text file.
/// Unknown keys are errors; all paper parameters default to their Table values.
struct CampaignConfig {
    // grid
    int nx = 0, ny = 0;
    double Lx = 600.0, Ly = 150.0;
    double inflow_x_min = 150.0, inflow_x_max = 450.0;
    double inflow_c = 1.0;
    // physics
    PhysicalParams physics;
    // porosity field
    PorosityFieldSpec porosity = PorosityFieldSpec::make(PorosityVariant::smooth3);
    // solver
    SolverControls solver;
    // stochastic section
    StochasticMethod method = StochasticMethod::gpc;
    size_t dimension = 3;
    int poly_order = 3;
    TruncationStrategy truncation = TruncationStrategy::total_degree;
    QuadratureChoice quadrature = QuadratureChoice::smolyak_cc;
    int level = 2;       // Smolyak/CC level, or nodes per dimension for tensor-gl
    int qmc_samples = 0; // qmc only
    uint64_t seed = 2025;
    // outputs
    std::vector<double> snapshot_times; // seconds, ascending
    std::vector<double> point_x, point_y;
    size_t sample_count = 1000000;
    std::vector<double> quantile_levels = {0.025, 0.25, 0.5, 0.75, 0.975};
    std::vector<double> thresholds;
    std::string output_dir = "out";
    int workers = 1;

    static CampaignConfig parse_file(const std::string& path);
    static CampaignConfig parse_text(const std::string& text, const std::string& origin);

    void validate() const;

    /// Stable hash of the campaign-defining keys (not workers/output paths).
    std::string content_hash() const;
};

namespace detail {

class KeyValueReader {
  public:
    KeyValueReader(const std::string& text, const std::string& origin) : origin_(origin) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (trim(line).empty()) continue;
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + trim(line) + "'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (!entries_.emplace(key, value).second)
                throw ConfigError(origin + ": duplicate key '" + key + "'");
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    std::string require_string(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigError(origin_ + ": missing required key '" + key + "'");
        consumed_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        return to_double(key, it->second);
    }

    double require_double(const std::string& key) { return to_double(key, require_string(key)); }

    int get_int(const std::string& key, int fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        return to_int(key, it->second);
    }

    int require_int(const std::string& key) { return to_int(key, require_string(key)); }

    uint64_t get_u64(const std::string& key, uint64_t fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "': not an unsigned integer: '" +
                              it->second + "'");
        }
    }

    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        std::vector<double> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty()) continue;
            out.push_back(to_double(key, t));
        }
        return out;
    }

    void check_all_consumed() const {
        std::string unknown;
        for (const auto& [key, value] : entries_)
            if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
        if (!unknown.empty())
            throw ConfigError(origin_ + ": unknown keys: " + unknown);
    }

  private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    double to_double(const std::string& key, const std::string& v) const {
        try {
            size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "': not a number: '" + v + "'");
        }
    }

    int to_int(const std::string& key, const std::string& v) const {
        try {
            size_t pos = 0;
            const int i = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return i;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "': not an integer: '" + v + "'");
        }
    }

    std::string origin_;
    std::map<std::string, std::string> entries_;
    std::set<std::string> consumed_;
};

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace detail

inline CampaignConfig CampaignConfig::parse_text(const std::string& text,
                                                 const std::string& origin) {
    detail::KeyValueReader kv(text, origin);
    CampaignConfig cfg;

    cfg.nx = kv.require_int("grid.nx");
    cfg.ny = kv.require_int("grid.ny");
    cfg.Lx = kv.get_double("grid.Lx", cfg.Lx);
    cfg.Ly = kv.get_double("grid.Ly", cfg.Ly);
    cfg.inflow_x_min = kv.get_double("grid.inflow_x_min", cfg.inflow_x_min);
    cfg.inflow_x_max = kv.get_double("grid.inflow_x_max", cfg.inflow_x_max);
    cfg.inflow_c = kv.get_double("grid.inflow_c", cfg.inflow_c);

    cfg.physics.mean_porosity = kv.get_double("physics.mean_porosity", 0.1);
    cfg.physics.molecular_diffusion = kv.get_double("physics.molecular_diffusion", 0.565e-6);
    cfg.physics.mean_permeability = kv.get_double("physics.mean_permeability", 4.845e-13);
    cfg.physics.gravity = kv.get_double("physics.gravity", 9.81);
    cfg.physics.density_pure = kv.get_double("physics.density_pure", 1000.0);
    cfg.physics.density_brine = kv.get_double("physics.density_brine", 1200.0);
    cfg.physics.viscosity = kv.get_double("physics.viscosity", 1e-3);

    const std::string variant = kv.get_string("porosity.variant", "smooth3");
    if (variant == "smooth3")
        cfg.porosity = PorosityFieldSpec::make(PorosityVariant::smooth3);
    else if (variant == "layered5")
        cfg.porosity = PorosityFieldSpec::make(PorosityVariant::layered5);
    else if (variant == "appendix-b")
        cfg.porosity = PorosityFieldSpec::make(PorosityVariant::appendix_b);
    else if (variant == "generic")
        cfg.porosity.variant = PorosityVariant::generic;
    else
        throw ConfigError(origin + ": porosity.variant: unknown variant '" + variant + "'");
    cfg.porosity.amplitude = kv.get_double("porosity.amplitude", cfg.porosity.amplitude);
    if (cfg.porosity.variant == PorosityVariant::generic) {
        cfg.porosity.layer_tops = kv.get_double_list("porosity.layer_tops", {});
        cfg.porosity.layer_values =
            kv.get_double_list("porosity.layer_values", {cfg.physics.mean_porosity});
        const auto wx = kv.get_double_list("porosity.term_wx", {});
        const auto px = kv.get_double_list("porosity.term_px", {});
        const auto wy = kv.get_double_list("porosity.term_wy", {});
        const auto py = kv.get_double_list("porosity.term_py", {});
        if (wx.size() != wy.size() || (!px.empty() && px.size() != wx.size()) ||
            (!py.empty() && py.size() != wx.size()))
            throw ConfigError(origin + ": porosity.term_*: lists must have equal length");
        for (size_t i = 0; i < wx.size(); ++i)
            cfg.porosity.terms.push_back({wx[i], px.empty() ? 0.0 : px[i], wy[i],
                                          py.empty() ? 0.0 : py[i]});
    }

    cfg.solver.dt = kv.require_double("solver.dt_years") * seconds_per_year;
    cfg.solver.t_end = kv.require_double("solver.t_end_years") * seconds_per_year;
    cfg.solver.newton_tol = kv.get_double("solver.newton_tol", cfg.solver.newton_tol);
    cfg.solver.newton_abs_tol = kv.get_double("solver.newton_abs_tol", cfg.solver.newton_abs_tol);
    cfg.solver.scaled_floor = kv.get_double("solver.scaled_floor", cfg.solver.scaled_floor);
    cfg.solver.newton_max_iter = kv.get_int("solver.newton_max_iter", cfg.solver.newton_max_iter);
    cfg.solver.line_search_factor =
        kv.get_double("solver.line_search_factor", cfg.solver.line_search_factor);
    cfg.solver.line_search_max_trials =
        kv.get_int("solver.line_search_max_trials", cfg.solver.line_search_max_trials);
    cfg.solver.max_dt_halvings = kv.get_int("solver.max_dt_halvings", cfg.solver.max_dt_halvings);
    cfg.solver.linear.tol = kv.get_double("solver.linear_tol", cfg.solver.linear.tol);
    cfg.solver.linear.max_iter = kv.get_int("solver.linear_max_iter", cfg.solver.linear.max_iter);
    cfg.solver.linear.preconditioner =
        preconditioner_from_string(kv.get_string("solver.preconditioner", "multigrid"));
    cfg.solver.linear.mg_levels = kv.get_int("solver.mg_levels", cfg.solver.linear.mg_levels);
    cfg.solver.linear.mg_smooth_sweeps =
        kv.get_int("solver.mg_smooth_sweeps", cfg.solver.linear.mg_smooth_sweeps);
    cfg.solver.linear.jacobi_omega =
        kv.get_double("solver.jacobi_omega", cfg.solver.linear.jacobi_omega);

    const std::string method = kv.get_string("stochastic.method", "gpc");
    if (method == "gpc")
        cfg.method = StochasticMethod::gpc;
    else if (method == "qmc")
        cfg.method = StochasticMethod::qmc;
    else
        throw ConfigError(origin + ": stochastic.method: must be gpc or qmc");
    cfg.dimension = static_cast<size_t>(kv.get_int("stochastic.dimension", 3));
    cfg.poly_order = kv.get_int("stochastic.poly_order", cfg.poly_order);
    cfg.truncation =
        truncation_from_string(kv.get_string("stochastic.truncation", "total-degree"));
    const std::string quad = kv.get_string("stochastic.quadrature", "smolyak-cc");
    if (quad == "smolyak-cc")
        cfg.quadrature = QuadratureChoice::smolyak_cc;
    else if (quad == "tensor-cc")
        cfg.quadrature = QuadratureChoice::tensor_cc;
    else if (quad == "tensor-gl")
        cfg.quadrature = QuadratureChoice::tensor_gl;
    else
        throw ConfigError(origin + ": stochastic.quadrature: unknown rule '" + quad + "'");
    cfg.level = kv.get_int("stochastic.level", cfg.level);
    cfg.qmc_samples = kv.get_int("stochastic.qmc_samples", cfg.qmc_samples);
    cfg.seed = kv.get_u64("stochastic.seed", cfg.seed);

    const auto snap_years = kv.get_double_list("snapshots.times_years", {});
    for (double t : snap_years) cfg.snapshot_times.push_back(t * seconds_per_year);

    cfg.point_x = kv.get_double_list("points.x", {});
    cfg.point_y = kv.get_double_list("points.y", {});
    cfg.sample_count = static_cast<size_t>(
        kv.get_double("point_stats.samples", static_cast<double>(cfg.sample_count)));
    cfg.quantile_levels = kv.get_double_list("point_stats.quantiles", cfg.quantile_levels);
    cfg.thresholds = kv.get_double_list("point_stats.thresholds", cfg.thresholds);

    cfg.output_dir = kv.get_string("output.dir", cfg.output_dir);
    cfg.workers = kv.get_int("campaign.workers", cfg.workers);

    kv.check_all_consumed();
    cfg.validate();
    return cfg;
}

inline CampaignConfig CampaignConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str(), path);
}

inline void CampaignConfig::validate() const {
    if (nx < 1 || ny < 1) throw ConfigError("grid.nx/grid.ny: must be >= 1");
    if (!(Lx > 0.0 && Ly > 0.0)) throw ConfigError("grid.Lx/grid.Ly: must be positive");
    physics.validate();
    porosity.validate(Ly);
    if (porosity.dim() != dimension)
        throw ConfigError("stochastic.dimension: " + std::to_string(dimension) +
                          " does not match the porosity variant arity " +
                          std::to_string(porosity.dim()));
    solver.validate();
    if (method == StochasticMethod::qmc && qmc_samples < 1)
        throw ConfigError("stochastic.qmc_samples: required for the qmc method");
    if (method == StochasticMethod::gpc && poly_order < 0)
        throw ConfigError("stochastic.poly_order: must be >= 0");
    if (level < 0) throw ConfigError("stochastic.level: must be >= 0");
    for (double t : snapshot_times)
        if (t > solver.t_end * (1.0 + 1e-12))
            throw ConfigError("snapshots.times_years: time beyond solver.t_end_years");
    if (point_x.size() != point_y.size())
        throw ConfigError("points.x/points.y: lists must have equal length");
    for (size_t i = 1; i < quantile_levels.size(); ++i)
        if (quantile_levels[i] <= quantile_levels[i - 1])
            throw ConfigError("point_stats.quantiles: levels must be strictly increasing");
    for (double q : quantile_levels)
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("point_stats.quantiles: levels in (0,1)");
    if (workers < 1) throw ConfigError("campaign.workers: must be >= 1");
    if (sample_count < 1) throw ConfigError("point_stats.samples: must be >= 1");
}

inline std::string CampaignConfig::content_hash() const {
    char buf[128];
    std::string s;
    const auto add = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s=%.17g\n", key, v);
        s += buf;
    };
    add("nx", nx);
    add("ny", ny);
    add("Lx", Lx);
    add("Ly", Ly);
    add("ix0", inflow_x_min);
    add("ix1", inflow_x_max);
    add("ic", inflow_c);
    add("phi", physics.mean_porosity);
    add("dm", physics.molecular_diffusion);
    add("K", physics.mean_permeability);
    add("g", physics.gravity);
    add("rho0", physics.density_pure);
    add("rho1", physics.density_brine);
    add("mu", physics.viscosity);
    add("variant", static_cast<double>(porosity.variant));
    add("amp", porosity.amplitude);
    for (double v : porosity.layer_tops) add("ltop", v);
    for (double v : porosity.layer_values) add("lval", v);
    for (const auto& t : porosity.terms) {
        add("twx", t.wx);
        add("tpx", t.px);
        add("twy", t.wy);
        add("tpy", t.py);
    }
    add("dt", solver.dt);
    add("tend", solver.t_end);
    add("ntol", solver.newton_tol);
    add("ltol", solver.linear.tol);
    add("method", method == StochasticMethod::gpc ? 0.0 : 1.0);
    add("M", static_cast<double>(dimension));
    add("p", poly_order);
    add("trunc", static_cast<double>(truncation));
    add("quad", static_cast<double>(quadrature));
    add("level", level);
    add("N", qmc_samples);
    add("seed", static_cast<double>(seed));
    for (double t : snapshot_times) add("snap", t);
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a(s)));
    return buf;
}

} // namespace elderuq
