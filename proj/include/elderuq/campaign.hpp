#pragma once

#include "elderuq/config.hpp"
#include "elderuq/io.hpp"
#include "elderuq/point_statistics.hpp"
#include "elderuq/quadrature.hpp"
#include "elderuq/surrogate.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace elderuq {

/// The stochastic node set of a campaign, from the configuration.
inline QuadratureRule make_stochastic_rule(const CampaignConfig& cfg) {
    const int M = static_cast<int>(cfg.dimension);
    if (cfg.method == StochasticMethod::qmc) return halton(M, cfg.qmc_samples);
    switch (cfg.quadrature) {
        case QuadratureChoice::smolyak_cc: return smolyak_sparse(M, cfg.level);
        case QuadratureChoice::tensor_cc: {
            std::vector<QuadratureRule> rules(M, clenshaw_curtis_1d(cfg.level));
            return tensor_product(rules);
        }
        case QuadratureChoice::tensor_gl: {
            std::vector<QuadratureRule> rules(M, gauss_legendre_1d(std::max(1, cfg.level)));
            return tensor_product(rules);
        }
    }
    throw std::logic_error("make_stochastic_rule: unreachable");
}

enum class NodeState { pending, done, failed };

struct NodeStatus {
    NodeState state = NodeState::pending;
    std::string message;
};

/// On-disk campaign store: one binary realization file per stochastic node plus
/// an atomically replaced text manifest. The manifest pins the config hash so a
/// store can never be resumed under a different campaign definition.
class RealizationStore {
  public:
    static std::filesystem::path store_dir(const CampaignConfig& cfg) {
        return std::filesystem::path(cfg.output_dir) / "store";
    }

    static RealizationStore open_or_create(const CampaignConfig& cfg,
                                           const QuadratureRule& rule) {
        RealizationStore store;
        store.dir_ = store_dir(cfg);
        store.config_hash_ = cfg.content_hash();
        store.rule_description_ = rule.description;
        store.status_.assign(rule.size(), NodeStatus{});
        std::filesystem::create_directories(store.dir_);
        const auto manifest = store.manifest_path();
        if (std::filesystem::exists(manifest)) {
            store.load_manifest();
            // statuses must match the files actually on disk
            for (size_t i = 0; i < store.status_.size(); ++i)
                if (store.status_[i].state == NodeState::done &&
                    !std::filesystem::exists(store.node_path(i)))
                    store.status_[i] = {NodeState::pending, ""};
        }
        store.write_manifest();
        return store;
    }

    const std::filesystem::path& dir() const { return dir_; }
    size_t size() const { return status_.size(); }
    const NodeStatus& status(size_t i) const { return status_[i]; }

    std::string node_path(size_t i) const {
        char name[32];
        std::snprintf(name, sizeof(name), "node_%05zu.bin", i);
        return (dir_ / name).string();
    }

    void mark(size_t i, NodeState state, const std::string& message = "") {
        std::lock_guard<std::mutex> lock(*mutex_);
        status_[i] = {state, message};
        write_manifest_locked();
    }

    std::vector<size_t> incomplete_nodes() const {
        std::vector<size_t> out;
        for (size_t i = 0; i < status_.size(); ++i)
            if (status_[i].state != NodeState::done) out.push_back(i);
        return out;
    }

    std::vector<size_t> failed_nodes() const {
        std::vector<size_t> out;
        for (size_t i = 0; i < status_.size(); ++i)
            if (status_[i].state == NodeState::failed) out.push_back(i);
        return out;
    }

    std::string manifest_path() const { return (dir_ / "manifest.txt").string(); }

  private:
    void write_manifest() {
        std::lock_guard<std::mutex> lock(*mutex_);
        write_manifest_locked();
    }

    void write_manifest_locked() const {
        std::ostringstream out;
        out << "elderuq-manifest v1\n";
        out << "config_hash = " << config_hash_ << "\n";
        out << "rule = " << rule_description_ << "\n";
        out << "nodes = " << status_.size() << "\n";
        for (size_t i = 0; i < status_.size(); ++i) {
            out << "node " << i << " = ";
            switch (status_[i].state) {
                case NodeState::pending: out << "pending"; break;
                case NodeState::done: out << "done"; break;
                case NodeState::failed: out << "failed: " << status_[i].message; break;
            }
            out << "\n";
        }
        atomic_write_text(manifest_path(), out.str());
    }

    void load_manifest() {
        std::ifstream in(manifest_path());
        if (!in) throw std::runtime_error("cannot read manifest: " + manifest_path());
        std::string line;
        std::getline(in, line);
        if (line != "elderuq-manifest v1")
            throw std::runtime_error("manifest: unsupported format in " + manifest_path());
        size_t count = 0;
        while (std::getline(in, line)) {
            if (line.rfind("config_hash = ", 0) == 0) {
                const std::string h = line.substr(14);
                if (h != config_hash_)
                    throw std::runtime_error(
                        "manifest: store was produced by a different configuration (hash " + h +
                        " vs " + config_hash_ + "); choose a fresh output directory");
            } else if (line.rfind("rule = ", 0) == 0) {
                // informational
            } else if (line.rfind("nodes = ", 0) == 0) {
                count = std::stoul(line.substr(8));
                if (count != status_.size())
                    throw std::runtime_error("manifest: node count mismatch");
            } else if (line.rfind("node ", 0) == 0) {
                std::istringstream ss(line.substr(5));
                size_t idx;
                ss >> idx;
                if (idx >= status_.size()) throw std::runtime_error("manifest: bad node index");
                std::string eq, state;
                ss >> eq >> state;
                if (state == "done")
                    status_[idx].state = NodeState::done;
                else if (state.rfind("failed", 0) == 0) {
                    status_[idx].state = NodeState::failed;
                    const auto pos = line.find("failed: ");
                    if (pos != std::string::npos) status_[idx].message = line.substr(pos + 8);
                } else
                    status_[idx].state = NodeState::pending;
            }
        }
    }

    std::filesystem::path dir_;
    std::string config_hash_;
    std::string rule_description_;
    std::vector<NodeStatus> status_;
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

struct PlannedNode {
    size_t index;
    ThetaVector theta;
};

/// Deterministic node list; writes the manifest before any realization runs.
inline std::vector<PlannedNode> plan_campaign(const CampaignConfig& cfg) {
    const auto rule = make_stochastic_rule(cfg);
    auto store = RealizationStore::open_or_create(cfg, rule);
    std::vector<PlannedNode> plan;
    plan.reserve(rule.size());
    for (size_t i = 0; i < rule.size(); ++i) plan.push_back({i, ThetaVector{rule.nodes[i]}});
    return plan;
}

struct RunStats {
    size_t solved = 0;
    size_t skipped = 0;
    size_t failed = 0;
    bool cancelled = false;
};

/// Execute all pending realizations with a pool of `cfg.workers` threads. Each
/// node is independent and deterministic, so the stored bytes do not depend on
/// the worker count. Finished nodes are skipped on restart. The optional
/// `keep_going` callback is polled after every completion; returning false
/// stops the campaign cleanly (used to exercise crash recovery).
inline RunStats run_campaign(const CampaignConfig& cfg,
                             const std::function<bool(size_t)>& keep_going = {}) {
    const auto rule = make_stochastic_rule(cfg);
    auto store = RealizationStore::open_or_create(cfg, rule);

    const StructuredGrid grid(cfg.nx, cfg.ny, cfg.Lx, cfg.Ly);
    const auto tags = tag_boundaries(grid, cfg.inflow_x_min, cfg.inflow_x_max, cfg.inflow_c);

    RunStats stats;
    const auto todo = store.incomplete_nodes();
    stats.skipped = store.size() - todo.size();
    if (todo.empty()) return stats;

    std::atomic<size_t> next{0};
    std::atomic<size_t> completed{0};
    std::atomic<bool> cancelled{false};
    std::mutex stats_mutex;

    const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(todo.size())));
    auto worker = [&]() {
        while (!cancelled.load()) {
            const size_t slot = next.fetch_add(1);
            if (slot >= todo.size()) return;
            const size_t node = todo[slot];
            const ThetaVector theta{rule.nodes[node]};
            try {
                const auto pb = FlowProblem::create(grid, tags, cfg.physics, cfg.porosity, theta);
                auto result = time_march(pb, cfg.solver, cfg.snapshot_times, theta);
                const std::string tmp = store.node_path(node) + ".tmp";
                write_realization(tmp, grid, result);
                std::filesystem::rename(tmp, store.node_path(node));
                store.mark(node, NodeState::done);
                std::lock_guard<std::mutex> lock(stats_mutex);
                ++stats.solved;
            } catch (const std::exception& e) {
                store.mark(node, NodeState::failed, e.what());
                std::lock_guard<std::mutex> lock(stats_mutex);
                ++stats.failed;
            }
            const size_t done_count = completed.fetch_add(1) + 1;
            if (keep_going && !keep_going(done_count)) cancelled.store(true);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    stats.cancelled = cancelled.load();
    return stats;
}

namespace detail {

inline std::string quantile_label(double alpha) {
    if (alpha == 0.025) return "q025";
    if (alpha == 0.25) return "q25";
    if (alpha == 0.5) return "q50";
    if (alpha == 0.75) return "q75";
    if (alpha == 0.975) return "q975";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", alpha);
    std::string s = "q";
    for (const char* c = buf; *c; ++c)
        if (*c != '.') s += *c;
    return s;
}

inline std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Indices of `sub` nodes within `full` (exact up to 1e-12 coordinate slack);
/// empty when `sub` is not nested in `full`.
inline std::vector<size_t> match_nodes(const QuadratureRule& sub, const QuadratureRule& full) {
    std::vector<size_t> map;
    map.reserve(sub.size());
    for (const auto& node : sub.nodes) {
        size_t found = full.size();
        for (size_t j = 0; j < full.size(); ++j) {
            bool same = true;
            for (size_t d = 0; d < node.size() && same; ++d)
                if (std::abs(node[d] - full.nodes[j][d]) > 1e-12) same = false;
            if (same) {
                found = j;
                break;
            }
        }
        if (found == full.size()) return {};
        map.push_back(found);
    }
    return map;
}

} // namespace detail

/// Quadrature/statistics phase: builds the gPC surrogate (or the qMC plug-in
/// moments), then writes mean/variance fields, the deterministic-vs-mean
/// difference when a theta = 0 realization exists, point statistics with pdf
/// histograms, and the approximation-error diagnostics. Refuses to run while
/// any node is failed or pending, for either method: the quadrature weights and
/// the printed estimators assume the complete node set.
inline void postprocess(const CampaignConfig& cfg) {
    namespace fs = std::filesystem;
    const auto rule = make_stochastic_rule(cfg);
    auto store = RealizationStore::open_or_create(cfg, rule);

    const auto incomplete = store.incomplete_nodes();
    if (!incomplete.empty()) {
        std::string list;
        for (size_t i : incomplete) {
            list += (list.empty() ? "" : ", ") + std::to_string(i);
            if (store.status(i).state == NodeState::failed)
                list += " (" + store.status(i).message + ")";
        }
        throw std::runtime_error("postprocess: store incomplete; nodes not done: " + list);
    }

    const StructuredGrid grid(cfg.nx, cfg.ny, cfg.Lx, cfg.Ly);
    const size_t nv = static_cast<size_t>(grid.num_vertices());

    // load every realization's mass-fraction arrays, keyed by time then node
    std::vector<double> times;
    std::vector<std::vector<std::vector<double>>> values; // [time][node][vertex]
    std::optional<size_t> theta0_node;
    for (size_t i = 0; i < rule.size(); ++i) {
        uint32_t nx = 0, ny = 0;
        auto real = read_realization(store.node_path(i), &nx, &ny);
        if (nx != uint32_t(cfg.nx) || ny != uint32_t(cfg.ny))
            throw std::runtime_error("postprocess: grid mismatch in " + store.node_path(i));
        if (i == 0) {
            times.clear();
            for (const auto& s : real.snapshots) times.push_back(s.time);
            values.assign(times.size(), {});
            for (auto& per_time : values) per_time.resize(rule.size());
        }
        if (real.snapshots.size() != times.size())
            throw std::runtime_error("postprocess: snapshot count mismatch in " +
                                     store.node_path(i));
        for (size_t t = 0; t < times.size(); ++t)
            values[t][i] = std::move(real.snapshots[t].c);
        bool zero = true;
        for (double v : real.theta.values)
            if (std::abs(v) > 1e-14) zero = false;
        if (zero) theta0_node = i;
    }

    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);

    {
        std::ofstream snap_csv(out_dir / "snapshots.csv");
        snap_csv << "index,time_years\n";
        for (size_t t = 0; t < times.size(); ++t)
            snap_csv << t << "," << detail::format_g(times[t] / seconds_per_year) << "\n";
    }

    const auto write_field = [&](const std::string& stem, size_t t,
                                 const std::vector<double>& field) {
        const std::string base = (out_dir / (stem + "_t" + std::to_string(t))).string();
        write_vtk_scalar(base + ".vtk", grid, stem, field);
        write_csv_field(base + ".csv", grid, field);
    };

    if (cfg.method == StochasticMethod::qmc) {
        for (size_t t = 0; t < times.size(); ++t) {
            const auto moments = qmc_moments(values[t], rule);
            write_field("mean", t, moments.mean);
            write_field("variance", t, moments.variance);
            if (theta0_node) {
                std::vector<double> diff(nv);
                for (size_t k = 0; k < nv; ++k)
                    diff[k] = values[t][*theta0_node][k] - moments.mean[k];
                write_field("diff_theta0", t, diff);
            }
        }
        return;
    }

    // gPC path
    const auto basis = build_multi_index_set(cfg.dimension, cfg.poly_order, cfg.truncation);
    SurrogateModel model;
    for (size_t t = 0; t < times.size(); ++t) {
        auto m = project_coefficients(values[t], rule, basis);
        if (t == 0) {
            model = std::move(m);
            model.times = {times[0]};
        } else {
            model.times.push_back(times[t]);
            model.coeff.push_back(std::move(m.coeff[0]));
        }
    }
    model.provenance = "config " + cfg.content_hash();

    for (size_t t = 0; t < times.size(); ++t) {
        write_field("mean", t, surrogate_mean(model, t));
        write_field("variance", t, surrogate_variance(model, t));
        if (theta0_node) {
            const auto mean = surrogate_mean(model, t);
            std::vector<double> diff(nv);
            for (size_t k = 0; k < nv; ++k) diff[k] = values[t][*theta0_node][k] - mean[k];
            write_field("diff_theta0", t, diff);
        }
    }

    // point statistics at every configured point and stored time
    if (!cfg.point_x.empty()) {
        std::ofstream stats_csv(out_dir / "point_stats.csv");
        stats_csv << "time_years,x,y,mean,std";
        for (double q : cfg.quantile_levels) stats_csv << "," << detail::quantile_label(q);
        stats_csv << "\n";
        std::ofstream exc_csv;
        if (!cfg.thresholds.empty()) {
            exc_csv.open(out_dir / "exceedance.csv");
            exc_csv << "time_years,x,y,threshold,probability\n";
        }
        for (size_t pi = 0; pi < cfg.point_x.size(); ++pi) {
            const int vertex = grid.nearest_vertex(cfg.point_x[pi], cfg.point_y[pi]);
            const auto xy = grid.coords(vertex);
            for (size_t t = 0; t < times.size(); ++t) {
                const uint64_t seed = cfg.seed + 1000003ULL * pi + 7919ULL * t;
                auto stats = point_statistics(model, t, static_cast<size_t>(vertex),
                                              cfg.sample_count, cfg.quantile_levels,
                                              cfg.thresholds, seed);
                stats_csv << detail::format_g(times[t] / seconds_per_year) << ","
                          << detail::format_g(xy[0]) << "," << detail::format_g(xy[1]) << ","
                          << detail::format_g(stats.mean) << ","
                          << detail::format_g(stats.stddev);
                for (double q : stats.quantiles) stats_csv << "," << detail::format_g(q);
                stats_csv << "\n";
                for (const auto& e : stats.exceedance)
                    exc_csv << detail::format_g(times[t] / seconds_per_year) << ","
                            << detail::format_g(xy[0]) << "," << detail::format_g(xy[1]) << ","
                            << detail::format_g(e.threshold) << ","
                            << detail::format_g(e.probability) << "\n";
                char name[64];
                std::snprintf(name, sizeof(name), "pdf_point%zu_t%zu.csv", pi, t);
                std::ofstream pdf_csv(out_dir / name);
                pdf_csv << "bin_center,density\n";
                for (const auto& bin : stats.pdf)
                    pdf_csv << detail::format_g(bin.center) << ","
                            << detail::format_g(bin.density) << "\n";
            }
        }
    }

    // approximation-error diagnostics against the nested coarser rules
    if (cfg.method == StochasticMethod::gpc && cfg.level >= 1 &&
        (cfg.quadrature == QuadratureChoice::smolyak_cc ||
         cfg.quadrature == QuadratureChoice::tensor_cc)) {
        const auto tind = truncation_indicator(model, grid.volumes());
        std::ofstream err_csv(out_dir / "error_estimates.csv");
        err_csv << "time_years,coarse_level,approximation_error,truncation_indicator\n";
        for (int lc = 0; lc < cfg.level; ++lc) {
            CampaignConfig coarse_cfg = cfg;
            coarse_cfg.level = lc;
            const auto coarse_rule = make_stochastic_rule(coarse_cfg);
            const auto map = detail::match_nodes(coarse_rule, rule);
            if (map.empty()) continue;
            SurrogateModel coarse;
            for (size_t t = 0; t < times.size(); ++t) {
                std::vector<std::vector<double>> sub;
                sub.reserve(map.size());
                for (size_t j : map) sub.push_back(values[t][j]);
                auto m = project_coefficients(sub, coarse_rule, basis);
                if (t == 0) {
                    coarse = std::move(m);
                    coarse.times = {times[0]};
                } else {
                    coarse.times.push_back(times[t]);
                    coarse.coeff.push_back(std::move(m.coeff[0]));
                }
            }
            const auto ea = approximation_error_estimate(model, coarse, grid.volumes());
            for (size_t t = 0; t < times.size(); ++t)
                err_csv << detail::format_g(times[t] / seconds_per_year) << "," << lc << ","
                        << detail::format_g(ea[t]) << "," << detail::format_g(tind[t]) << "\n";
        }
    }
}

/// Single deterministic realization at the given theta; returns the result and
/// writes the binary realization plus VTK/CSV views of the final snapshot.
inline Realization solve_one(const CampaignConfig& cfg, const ThetaVector& theta) {
    namespace fs = std::filesystem;
    theta.validate();
    if (theta.dim() != cfg.dimension)
        throw ConfigError("solve-one: theta dimension does not match the configuration");
    const StructuredGrid grid(cfg.nx, cfg.ny, cfg.Lx, cfg.Ly);
    const auto tags = tag_boundaries(grid, cfg.inflow_x_min, cfg.inflow_x_max, cfg.inflow_c);
    const auto pb = FlowProblem::create(grid, tags, cfg.physics, cfg.porosity, theta);
    auto result = time_march(pb, cfg.solver, cfg.snapshot_times, theta);

    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    write_realization((out_dir / "realization.bin").string(), grid, result);
    for (size_t t = 0; t < result.snapshots.size(); ++t) {
        const std::string base = (out_dir / ("c_t" + std::to_string(t))).string();
        write_vtk_scalar(base + ".vtk", grid, "mass_fraction", result.snapshots[t].c);
        write_csv_field(base + ".csv", grid, result.snapshots[t].c);
    }
    return result;
}

} // namespace elderuq
