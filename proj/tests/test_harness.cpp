#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "diffspec/harness.hpp"
#include "diffspec/quadrature.hpp"

using namespace diffspec;

namespace {

CurveEstimate constant_curve(double value, double a, double b, std::size_t n) {
    CurveEstimate c;
    c.grid = linspace(a, b, n);
    c.values.assign(n, value);
    return c;
}

// small config that runs in well under a second
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.model = reflected_bm_model();
    cfg.schemes = {SamplingScheme::Kind::Deterministic, SamplingScheme::Kind::Exponential};
    cfg.sample_sizes = {400};
    cfg.mc_iterations = 2;
    cfg.oracle_dims = {2, 3};
    cfg.lepski.dims = {2, 3, 4};
    cfg.estimator.grid_size = 401;
    cfg.seed = 5;
    cfg.workers = 1;
    return cfg;
}

}  // namespace

TEST_CASE("l2_distance closed forms") {
    const auto f = constant_curve(1.0, 0.1, 0.9, 801);
    CHECK(l2_distance(f, f) == 0.0);

    const auto g = constant_curve(0.0, 0.1, 0.9, 801);
    CHECK(l2_distance(f, g) == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));

    CurveEstimate identity;
    identity.grid = linspace(0.0, 1.0, 1001);
    identity.values.resize(1001);
    for (std::size_t i = 0; i < identity.grid.size(); ++i)
        identity.values[i] = identity.grid[i];
    CHECK(l2_distance(identity, [](double) { return 0.0; }) ==
          doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("l2_distance resamples nested uniform grids") {
    CurveEstimate coarse;
    coarse.grid = linspace(0.1, 0.9, 101);
    coarse.values.resize(101);
    for (std::size_t i = 0; i < 101; ++i) coarse.values[i] = coarse.grid[i];
    CurveEstimate fine;
    fine.grid = linspace(0.1, 0.9, 401);
    fine.values.resize(401);
    for (std::size_t i = 0; i < 401; ++i) fine.values[i] = fine.grid[i];
    CHECK(l2_distance(fine, coarse) <= 1e-12);  // both are the identity map

    CurveEstimate shifted;
    shifted.grid = linspace(0.2, 0.9, 101);
    shifted.values.assign(101, 0.0);
    CHECK_THROWS_AS((void)l2_distance(fine, shifted), std::invalid_argument);
}

TEST_CASE("replication seeds are deterministic and distinct") {
    CHECK(replication_seed(1, 0, 0, 0) == replication_seed(1, 0, 0, 0));
    CHECK(replication_seed(1, 0, 0, 0) != replication_seed(1, 0, 0, 1));
    CHECK(replication_seed(1, 0, 0, 0) != replication_seed(1, 0, 1, 0));
    CHECK(replication_seed(1, 0, 0, 0) != replication_seed(1, 1, 0, 0));
    CHECK(replication_seed(1, 0, 0, 0) != replication_seed(2, 0, 0, 0));
}

TEST_CASE("run_monte_carlo smoke test produces a finite, complete report") {
    const auto report = run_monte_carlo(tiny_config());
    REQUIRE(report.cells.size() == 2);
    for (const auto& cell : report.cells) {
        const auto* oracle = cell.find("oracle");
        REQUIRE(oracle != nullptr);
        CHECK(std::isfinite(oracle->rmise));
        CHECK(oracle->rmise >= 0.0);
        CHECK(oracle->failures == 0);
        CHECK(cell.find("adaptive") != nullptr);
        CHECK(cell.find("dim=2") != nullptr);
        CHECK(cell.find("dim=3") != nullptr);
    }
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
    auto cfg = tiny_config();
    const auto a = run_monte_carlo(cfg).to_csv();
    const auto b = run_monte_carlo(cfg).to_csv();
    CHECK(a == b);
    cfg.workers = 2;
    const auto c = run_monte_carlo(cfg).to_csv();
    CHECK(a == c);
}

TEST_CASE("report CSV follows the documented schema") {
    const auto report = run_monte_carlo(tiny_config());
    const std::string csv = report.to_csv();
    CHECK(csv.rfind("scheme,N,estimator,dim,rmise,mc_se,failures\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    // header + (2 dims + oracle + adaptive) per cell, 2 cells
    CHECK(lines == 1 + 2 * 4);
}

TEST_CASE("misspecified baseline coincides with the method for deterministic gaps") {
    auto cfg = tiny_config();
    cfg.schemes = {SamplingScheme::Kind::Deterministic};
    cfg.run_adaptive = false;
    const auto method = run_monte_carlo(cfg);
    const auto baseline = misspecified_baseline(cfg);
    REQUIRE(method.cells.size() == 1);
    REQUIRE(baseline.cells.size() == 1);
    for (const std::string label : {"dim=2", "dim=3", "oracle"}) {
        const auto* m = method.cells[0].find(label);
        const auto* b = baseline.cells[0].find(label);
        REQUIRE(m != nullptr);
        REQUIRE(b != nullptr);
        CHECK(b->rmise == doctest::Approx(m->rmise).epsilon(1e-9));
    }
}

TEST_CASE("emit-curves writes per-replication plot data") {
    namespace fs = std::filesystem;
    auto cfg = tiny_config();
    cfg.schemes = {SamplingScheme::Kind::Deterministic};
    cfg.mc_iterations = 1;
    cfg.emit_curves_dir = (fs::temp_directory_path() / "diffspec_curves_test").string();
    fs::remove_all(cfg.emit_curves_dir);
    (void)run_monte_carlo(cfg);

    const fs::path expected =
        fs::path(cfg.emit_curves_dir) / "deterministic_N400_rep0_adaptive.csv";
    REQUIRE(fs::exists(expected));
    std::ifstream in(expected);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,true,estimate");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 321);  // [0.1, 0.9] slice of the 401-point grid
}

TEST_CASE("model presets and polynomial models validate") {
    CHECK_NOTHROW(paper_sec6_model().model.validate());
    CHECK_NOTHROW(reflected_bm_model().model.validate());

    const auto poly = polynomial_model({0.15, 1.0, -1.0}, {0.2, -0.4}, 0.35, 1.0);
    const auto ref = paper_sec6_model();
    for (double x : {0.0, 0.3, 0.7, 1.0}) {
        CHECK(poly.model.sigma_sq(x) ==
              doctest::Approx(ref.model.sigma_sq(x)).epsilon(1e-12));
        CHECK(poly.model.drift(x) == doctest::Approx(ref.model.drift(x)).epsilon(1e-12));
    }
}

TEST_CASE("experiment config rejects inconsistent settings") {
    auto cfg = tiny_config();
    cfg.mc_iterations = 0;
    CHECK_THROWS_AS((void)run_monte_carlo(cfg), std::invalid_argument);

    cfg = tiny_config();
    cfg.sample_sizes = {3};  // below the largest candidate dimension
    CHECK_THROWS_AS((void)run_monte_carlo(cfg), std::invalid_argument);
}
