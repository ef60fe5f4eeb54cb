// Command-line front end: plan/run/post drive a full uncertainty campaign;
// the remaining subcommands are one-shot utilities around the same library.

#include "elderuq/campaign.hpp"
#include "elderuq/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace elderuq;

ThetaVector parse_theta(const std::string& csv) {
    ThetaVector theta;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            theta.values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("--theta: not a number: '" + item + "'");
        }
    }
    theta.validate();
    return theta;
}

// Env overrides apply to campaign execution knobs only: worker count and
// output directory.
void apply_overrides(CampaignConfig& cfg, int workers_flag, const std::string& output_flag) {
    if (const char* env = std::getenv("ELDERUQ_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (const char* env = std::getenv("ELDERUQ_WORKERS"); env && *env) cfg.workers = std::atoi(env);
    if (!output_flag.empty()) cfg.output_dir = output_flag;
    if (workers_flag > 0) cfg.workers = workers_flag;
    if (cfg.workers < 1) throw ConfigError("workers: must be >= 1");
}

void dump_rule(const QuadratureRule& rule, std::ostream& out) {
    for (size_t d = 0; d < rule.dimension; ++d) out << "theta" << d + 1 << ",";
    out << "weight\n";
    char buf[48];
    for (size_t i = 0; i < rule.size(); ++i) {
        for (size_t d = 0; d < rule.dimension; ++d) {
            std::snprintf(buf, sizeof(buf), "%.17g,", rule.nodes[i][d]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g\n", rule.weights[i]);
        out << buf;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"density-driven flow uncertainty quantification toolkit"};
    app.require_subcommand(1);

    std::string config_path, output_dir, theta_csv, out_file;
    int workers = 0;

    auto add_campaign_options = [&](CLI::App* cmd, bool with_workers) {
        cmd->add_option("--config", config_path, "campaign configuration file")->required();
        cmd->add_option("--output", output_dir, "override output.dir");
        if (with_workers) cmd->add_option("--workers", workers, "override campaign.workers");
    };

    auto* plan_cmd = app.add_subcommand("plan", "write the campaign manifest without solving");
    add_campaign_options(plan_cmd, false);

    auto* run_cmd = app.add_subcommand("run", "execute all pending realizations");
    add_campaign_options(run_cmd, true);

    auto* post_cmd = app.add_subcommand("post", "quadrature and statistics post-processing");
    add_campaign_options(post_cmd, false);

    auto* rule_cmd = app.add_subcommand("rule-dump", "write a quadrature rule as CSV");
    std::string rule_kind = "smolyak-cc";
    int rule_dim = 3, rule_level = 3, rule_count = 0;
    rule_cmd->add_option("--kind", rule_kind, "smolyak-cc | tensor-cc | tensor-gl | halton");
    rule_cmd->add_option("--dim", rule_dim, "stochastic dimension M");
    rule_cmd->add_option("--level", rule_level, "level (or nodes per dim for tensor-gl)");
    rule_cmd->add_option("--count", rule_count, "sample count (halton)");
    rule_cmd->add_option("--out", out_file, "output file (default: stdout)");

    auto* field_cmd = app.add_subcommand("field-dump", "render a porosity realization");
    add_campaign_options(field_cmd, false);
    field_cmd->add_option("--theta", theta_csv, "comma-separated theta vector")->required();

    auto* solve_cmd = app.add_subcommand("solve-one", "run a single realization");
    add_campaign_options(solve_cmd, false);
    solve_cmd->add_option("--theta", theta_csv, "comma-separated theta vector")->required();

    app.add_subcommand("verify", "run the built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (plan_cmd->parsed()) {
            auto cfg = CampaignConfig::parse_file(config_path);
            apply_overrides(cfg, 0, output_dir);
            const auto plan = plan_campaign(cfg);
            std::cout << "planned " << plan.size() << " realizations; manifest at "
                      << RealizationStore::store_dir(cfg) / "manifest.txt" << "\n";
        } else if (run_cmd->parsed()) {
            auto cfg = CampaignConfig::parse_file(config_path);
            apply_overrides(cfg, workers, output_dir);
            const auto stats = run_campaign(cfg);
            std::cout << "solved " << stats.solved << ", skipped " << stats.skipped
                      << ", failed " << stats.failed << "\n";
            if (stats.failed > 0) return 2;
        } else if (post_cmd->parsed()) {
            auto cfg = CampaignConfig::parse_file(config_path);
            apply_overrides(cfg, 0, output_dir);
            postprocess(cfg);
            std::cout << "outputs written to " << cfg.output_dir << "\n";
        } else if (rule_cmd->parsed()) {
            QuadratureRule rule;
            if (rule_kind == "smolyak-cc") {
                rule = smolyak_sparse(rule_dim, rule_level);
            } else if (rule_kind == "tensor-cc") {
                std::vector<QuadratureRule> r(rule_dim, clenshaw_curtis_1d(rule_level));
                rule = tensor_product(r);
            } else if (rule_kind == "tensor-gl") {
                std::vector<QuadratureRule> r(rule_dim, gauss_legendre_1d(rule_level));
                rule = tensor_product(r);
            } else if (rule_kind == "halton") {
                rule = halton(rule_dim, rule_count);
            } else {
                throw ConfigError("rule-dump: unknown kind '" + rule_kind + "'");
            }
            if (out_file.empty()) {
                dump_rule(rule, std::cout);
            } else {
                std::ofstream out(out_file);
                if (!out) throw std::runtime_error("cannot open " + out_file);
                dump_rule(rule, out);
                std::cout << rule.size() << " nodes -> " << out_file << "\n";
            }
        } else if (field_cmd->parsed()) {
            auto cfg = CampaignConfig::parse_file(config_path);
            apply_overrides(cfg, 0, output_dir);
            const auto theta = parse_theta(theta_csv);
            if (theta.dim() != cfg.dimension)
                throw ConfigError("field-dump: theta dimension does not match configuration");
            StructuredGrid grid(cfg.nx, cfg.ny, cfg.Lx, cfg.Ly);
            std::vector<double> phi(grid.num_vertices());
            for (int v = 0; v < grid.num_vertices(); ++v) {
                const auto xy = grid.coords(v);
                phi[v] = cfg.porosity.evaluate(xy[0], xy[1], theta);
            }
            std::filesystem::create_directories(cfg.output_dir);
            const auto base = std::filesystem::path(cfg.output_dir) / "porosity";
            write_vtk_scalar(base.string() + ".vtk", grid, "porosity", phi);
            write_csv_field(base.string() + ".csv", grid, phi);
            std::cout << "porosity field -> " << base.string() << ".{vtk,csv}\n";
        } else if (solve_cmd->parsed()) {
            auto cfg = CampaignConfig::parse_file(config_path);
            apply_overrides(cfg, 0, output_dir);
            const auto result = solve_one(cfg, parse_theta(theta_csv));
            std::cout << "realization finished: " << result.total_steps << " steps, "
                      << result.total_newton_iterations << " newton iterations, porosity in ["
                      << result.min_porosity << ", " << result.max_porosity << "], outputs in "
                      << cfg.output_dir << "\n";
        } else { // verify
            return run_invariant_suite(std::cout) ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
