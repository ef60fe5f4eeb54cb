#include "elderuq/campaign.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace elderuq;
namespace fs = std::filesystem;

namespace {

std::string tiny_campaign_text(const std::string& out_dir, const std::string& extra = "") {
    return "grid.nx = 8\n"
           "grid.ny = 4\n"
           "solver.dt_years = 0.02\n"
           "solver.t_end_years = 0.06\n"
           "solver.preconditioner = ilu0\n"
           "stochastic.method = gpc\n"
           "stochastic.dimension = 3\n"
           "stochastic.poly_order = 1\n"
           "stochastic.level = 1\n"
           "snapshots.times_years = 0.06\n"
           "output.dir = " +
           out_dir + "\n" + extra;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("configuration parsing: defaults, errors, field paths") {
    SECTION("minimal file with Table defaults") {
        const auto cfg = CampaignConfig::parse_text(tiny_campaign_text("/tmp/x"), "test");
        CHECK(cfg.physics.mean_porosity == 0.1);
        CHECK(cfg.physics.molecular_diffusion == 0.565e-6);
        CHECK(cfg.physics.mean_permeability == 4.845e-13);
        CHECK(cfg.physics.density_brine == 1200.0);
        CHECK(cfg.inflow_x_min == 150.0);
        CHECK(cfg.inflow_x_max == 450.0);
        CHECK(cfg.porosity.variant == PorosityVariant::smooth3);
        CHECK(cfg.quantile_levels.size() == 5);
    }
    SECTION("unknown keys are rejected with their paths") {
        CHECK_THROWS_WITH(
            CampaignConfig::parse_text(tiny_campaign_text("/tmp/x", "solvr.dt = 1\n"), "test"),
            Catch::Matchers::ContainsSubstring("solvr.dt"));
    }
    SECTION("duplicate keys are rejected") {
        CHECK_THROWS_WITH(
            CampaignConfig::parse_text(tiny_campaign_text("/tmp/x", "grid.nx = 9\n"), "test"),
            Catch::Matchers::ContainsSubstring("duplicate"));
    }
    SECTION("missing required keys are named") {
        CHECK_THROWS_WITH(CampaignConfig::parse_text("grid.nx = 4\n", "test"),
                          Catch::Matchers::ContainsSubstring("grid.ny"));
    }
    SECTION("dimension mismatch with the variant arity") {
        CHECK_THROWS_WITH(
            CampaignConfig::parse_text(
                tiny_campaign_text("/tmp/x") + "porosity.variant = layered5\n", "test"),
            Catch::Matchers::ContainsSubstring("stochastic.dimension"));
    }
    SECTION("snapshot beyond t_end") {
        CHECK_THROWS_WITH(
            CampaignConfig::parse_text(
                "grid.nx = 4\ngrid.ny = 2\nsolver.dt_years = 0.1\nsolver.t_end_years = 1\n"
                "snapshots.times_years = 2.0\n",
                "test"),
            Catch::Matchers::ContainsSubstring("snapshots.times_years"));
    }
    SECTION("malformed numbers carry the key") {
        CHECK_THROWS_WITH(
            CampaignConfig::parse_text(tiny_campaign_text("/tmp/x", "grid.Lx_bad = z\n"),
                                       "test"),
            Catch::Matchers::ContainsSubstring("grid.Lx_bad"));
    }
}

TEST_CASE("content hash tracks campaign-defining fields only") {
    const auto a = CampaignConfig::parse_text(tiny_campaign_text("/tmp/a"), "test");
    auto b = CampaignConfig::parse_text(tiny_campaign_text("/tmp/b"), "test");
    CHECK(a.content_hash() == b.content_hash()); // output dir is not defining
    b.poly_order = 2;
    CHECK(a.content_hash() != b.content_hash());
}

TEST_CASE("realization files round-trip exactly") {
    TempDir tmp("elderuq_io_test");
    StructuredGrid grid(6, 3, 600.0, 150.0);
    Realization real;
    real.theta = ThetaVector{{0.25, -1.0, 0.5}};
    real.min_porosity = 0.08;
    real.max_porosity = 0.12;
    for (int s = 0; s < 2; ++s) {
        FieldSnapshot snap;
        snap.time = (s + 1) * 1e6;
        snap.theta = real.theta;
        for (int v = 0; v < grid.num_vertices(); ++v) {
            snap.c.push_back(0.01 * v + s);
            snap.p.push_back(1e5 - 7.0 * v * (s + 1));
        }
        real.snapshots.push_back(std::move(snap));
    }
    const std::string path = (tmp.path / "real.bin").string();
    write_realization(path, grid, real);
    uint32_t nx, ny;
    const auto back = read_realization(path, &nx, &ny);
    CHECK(nx == 6);
    CHECK(ny == 3);
    CHECK(back.theta.values == real.theta.values);
    CHECK(back.min_porosity == real.min_porosity);
    REQUIRE(back.snapshots.size() == 2);
    for (int s = 0; s < 2; ++s) {
        CHECK(back.snapshots[s].time == real.snapshots[s].time);
        CHECK(back.snapshots[s].c == real.snapshots[s].c); // bitwise
        CHECK(back.snapshots[s].p == real.snapshots[s].p);
    }
}

TEST_CASE("plan: node counts follow the stochastic section") {
    SECTION("gpc smolyak level 3 in 3 dimensions") {
        TempDir tmp("elderuq_plan_gpc");
        auto cfg = CampaignConfig::parse_text(tiny_campaign_text(tmp.path.string()), "test");
        cfg.level = 3;
        const auto plan = plan_campaign(cfg);
        CHECK(plan.size() == 69);
        CHECK(fs::exists(RealizationStore::store_dir(cfg) / "manifest.txt"));
    }
    SECTION("qmc count and the first Halton point") {
        TempDir tmp("elderuq_plan_qmc");
        auto cfg = CampaignConfig::parse_text(
            tiny_campaign_text(tmp.path.string(),
                               "stochastic.qmc_samples = 600\n"),
            "test");
        cfg.method = StochasticMethod::qmc;
        const auto plan = plan_campaign(cfg);
        CHECK(plan.size() == 600);

        cfg.qmc_samples = 1;
        fs::remove_all(RealizationStore::store_dir(cfg));
        const auto plan1 = plan_campaign(cfg);
        REQUIRE(plan1.size() == 1);
        CHECK(plan1[0].theta.values[0] == 0.0);                       // 1/2 mapped
        CHECK_THAT(plan1[0].theta.values[1],
                   Catch::Matchers::WithinAbs(-1.0 / 3.0, 1e-15));    // 1/3 mapped
    }
}

TEST_CASE("campaign runs, restarts idempotently, and survives crashes") {
    TempDir tmp("elderuq_run_test");
    const auto cfg = CampaignConfig::parse_text(tiny_campaign_text(tmp.path.string()), "test");
    // M=3 level 1 smolyak: 7 realizations on an 8x4 grid

    SECTION("full run then idempotent rerun") {
        const auto stats = run_campaign(cfg);
        CHECK(stats.solved == 7);
        CHECK(stats.failed == 0);
        const auto again = run_campaign(cfg);
        CHECK(again.solved == 0); // zero solves on rerun
        CHECK(again.skipped == 7);
    }

    SECTION("simulated crash after 3 nodes, then restart completes the rest") {
        const auto partial = run_campaign(cfg, [](size_t done) { return done < 3; });
        CHECK(partial.cancelled);
        CHECK(partial.solved >= 3);
        CHECK(partial.solved < 7);
        const auto resume = run_campaign(cfg);
        CHECK(resume.solved == 7 - partial.solved);
        CHECK(resume.skipped == partial.solved);
        CHECK(resume.failed == 0);
    }
}

TEST_CASE("worker count does not change the stored bytes") {
    TempDir tmp1("elderuq_workers1");
    TempDir tmp8("elderuq_workers8");
    auto cfg1 = CampaignConfig::parse_text(tiny_campaign_text(tmp1.path.string()), "test");
    auto cfg8 = CampaignConfig::parse_text(tiny_campaign_text(tmp8.path.string()), "test");
    cfg1.workers = 1;
    cfg8.workers = 8;
    REQUIRE(run_campaign(cfg1).solved == 7);
    REQUIRE(run_campaign(cfg8).solved == 7);
    const auto rule = make_stochastic_rule(cfg1);
    const auto s1 = RealizationStore::open_or_create(cfg1, rule);
    const auto s8 = RealizationStore::open_or_create(cfg8, rule);
    for (size_t i = 0; i < rule.size(); ++i)
        CHECK(slurp(s1.node_path(i)) == slurp(s8.node_path(i)));
    CHECK(slurp(s1.manifest_path()) == slurp(s8.manifest_path()));
}

TEST_CASE("failed nodes are recorded and block post-processing") {
    TempDir tmp("elderuq_fail_test");
    auto cfg = CampaignConfig::parse_text(
        tiny_campaign_text(tmp.path.string(),
                           "solver.newton_max_iter = 1\n"
                           "solver.newton_tol = 1e-15\n"
                           "solver.scaled_floor = 1e-18\n"
                           "solver.max_dt_halvings = 1\n"),
        "test");
    const auto stats = run_campaign(cfg);
    CHECK(stats.failed == 7);
    const auto rule = make_stochastic_rule(cfg);
    auto store = RealizationStore::open_or_create(cfg, rule);
    CHECK(store.failed_nodes().size() == 7);
    CHECK(!store.status(0).message.empty());
    CHECK_THROWS_WITH(postprocess(cfg), Catch::Matchers::ContainsSubstring("not done"));
}

TEST_CASE("a store cannot be resumed under a different configuration") {
    TempDir tmp("elderuq_hash_guard");
    auto cfg = CampaignConfig::parse_text(tiny_campaign_text(tmp.path.string()), "test");
    plan_campaign(cfg);
    auto changed = cfg;
    changed.poly_order = 2;
    CHECK_THROWS_WITH(plan_campaign(changed),
                      Catch::Matchers::ContainsSubstring("different configuration"));
}

TEST_CASE("gpc postprocess writes fields, statistics, and diagnostics") {
    TempDir tmp("elderuq_post_gpc");
    auto cfg = CampaignConfig::parse_text(
        tiny_campaign_text(tmp.path.string(),
                           "points.x = 300\n"
                           "points.y = 75\n"
                           "point_stats.samples = 20000\n"
                           "point_stats.thresholds = 0.05\n"),
        "test");
    cfg.level = 2; // two nested coarse rules for the error diagnostics
    REQUIRE(run_campaign(cfg).failed == 0);
    postprocess(cfg);
    for (const char* name :
         {"snapshots.csv", "mean_t0.vtk", "mean_t0.csv", "variance_t0.vtk", "variance_t0.csv",
          "point_stats.csv", "exceedance.csv", "pdf_point0_t0.csv", "error_estimates.csv"})
        CHECK(fs::exists(tmp.path / name));

    // the theta = 0 node exists in every CC-Smolyak rule
    CHECK(fs::exists(tmp.path / "diff_theta0_t0.vtk"));

    // VTK header sanity
    const auto vtk = slurp(tmp.path / "mean_t0.vtk");
    CHECK(vtk.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(vtk.find("SCALARS mean double 1") != std::string::npos);
    CHECK(vtk.find("DIMENSIONS 9 5 1") != std::string::npos);

    // point_stats header mirrors the quantile table shape
    const auto stats = slurp(tmp.path / "point_stats.csv");
    CHECK(stats.find("time_years,x,y,mean,std,q025,q25,q50,q75,q975") != std::string::npos);
}

TEST_CASE("qmc postprocess writes moment fields") {
    TempDir tmp("elderuq_post_qmc");
    auto cfg = CampaignConfig::parse_text(
        tiny_campaign_text(tmp.path.string(), "stochastic.qmc_samples = 5\n"), "test");
    cfg.method = StochasticMethod::qmc;
    REQUIRE(run_campaign(cfg).failed == 0);
    postprocess(cfg);
    CHECK(fs::exists(tmp.path / "mean_t0.vtk"));
    CHECK(fs::exists(tmp.path / "variance_t0.csv"));
    CHECK(!fs::exists(tmp.path / "point_stats.csv")); // statistics need the surrogate
}

TEST_CASE("postprocess is deterministic across repeated invocations") {
    TempDir tmp("elderuq_post_det");
    auto cfg = CampaignConfig::parse_text(
        tiny_campaign_text(tmp.path.string(),
                           "points.x = 300\npoints.y = 75\npoint_stats.samples = 5000\n"),
        "test");
    REQUIRE(run_campaign(cfg).failed == 0);
    postprocess(cfg);
    const auto first = slurp(tmp.path / "point_stats.csv");
    const auto mean_first = slurp(tmp.path / "mean_t0.vtk");
    postprocess(cfg);
    CHECK(slurp(tmp.path / "point_stats.csv") == first);
    CHECK(slurp(tmp.path / "mean_t0.vtk") == mean_first);
}
