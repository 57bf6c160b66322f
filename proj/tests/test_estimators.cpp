#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "diffspec/estimators.hpp"
#include "diffspec/harness.hpp"
#include "diffspec/quadrature.hpp"

using namespace diffspec;

namespace {

constexpr double kPi = std::numbers::pi;

ObservationSet simulate_obs(const ExperimentModel& em, const SamplingScheme& scheme,
                            std::size_t n, std::uint64_t seed) {
    const auto gaps = draw_gaps(scheme, n, seed);
    const double horizon = std::accumulate(gaps.begin(), gaps.end(), 0.0);
    const auto path = simulate_path(em.model, horizon, 0.001, seed);
    return sample_observations(path, gaps);
}

// the exact first eigen-triple of reflected Brownian motion
SpectralTriple analytic_rbm_triple(int dim, const BasisEval& grid_eval) {
    SpectralTriple triple;
    triple.v1 = -kPi * kPi / 2.0;
    triple.pair.valid = true;
    triple.pair.kappa = std::exp(-0.25 * kPi * kPi / 2.0);
    triple.pair.coeffs.coeffs = Eigen::VectorXd::Zero(dim);
    triple.pair.coeffs.coeffs[1] = -1.0;  // increasing branch of psi_1
    triple.density.coeffs.coeffs = Eigen::VectorXd::Zero(dim);
    triple.density.coeffs.coeffs[0] = 1.0;
    triple.density.grid = grid_eval.grid;
    triple.density.values = Eigen::VectorXd::Ones(
        static_cast<Eigen::Index>(grid_eval.grid.size()));
    return triple;
}

LaplaceEstimate constant_gaps(double gap, std::size_t n) {
    return LaplaceEstimate::from_gaps(std::vector<double>(n, gap));
}

}  // namespace

TEST_CASE("estimate_density: point mass states and the exact constant coefficient") {
    ObservationSet obs;
    obs.times = {0.0, 1.0, 2.0};
    obs.states = {0.5, 0.5, 0.5};
    obs.gaps = {1.0, 1.0};
    const auto est = estimate_density(obs, BasisSpec::with_dim(2));
    CHECK(est.coeffs.coeffs[0] == 1.0);  // exact
    CHECK(est.coeffs.coeffs[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("estimate_density concentrates around the true invariant density") {
    const auto em_bm = reflected_bm_model();
    const auto obs_bm =
        simulate_obs(em_bm, SamplingScheme::deterministic(0.25), 20000, 101);
    const auto est_bm = estimate_density(obs_bm, BasisSpec::with_dim(5));
    CHECK(est_bm.coeffs.coeffs[0] == 1.0);
    // orthonormality: the L2 distance to 1 is the tail coefficient norm
    CHECK(est_bm.coeffs.coeffs.tail(4).norm() <= 0.05);

    const auto em6 = paper_sec6_model();
    const auto obs6 = simulate_obs(em6, SamplingScheme::deterministic(0.25), 20000, 102);
    const auto grid = linspace(0.0, 1.0, 2001);
    const auto eval = eval_basis(BasisSpec::with_dim(5), grid);
    const auto est6 = estimate_density(obs6, BasisSpec::with_dim(5), &eval);
    const auto truth = invariant_density_exact(em6.model, grid);
    std::vector<double> diff(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        diff[k] = est6.values[static_cast<Eigen::Index>(k)] - truth[k];
    CHECK(l2_norm(diff, grid[1] - grid[0]) <= 0.1);
}

TEST_CASE("empirical_laplace values") {
    const auto le = constant_gaps(0.25, 100);
    CHECK(empirical_laplace(le, 0.0) == 1.0);  // exact
    CHECK(empirical_laplace(le, 4.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    const auto exp_gaps = draw_gaps(SamplingScheme::exponential(0.25), 100000, 9);
    const auto le_exp = LaplaceEstimate::from_gaps(exp_gaps);
    CHECK(empirical_laplace(le_exp, 4.0) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("empirical_laplace is strictly decreasing") {
    const auto gaps = draw_gaps(SamplingScheme::scaled_beta(0.25), 500, 3);
    const auto le = LaplaceEstimate::from_gaps(gaps);
    double prev = empirical_laplace(le, 0.0);
    for (double y : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double cur = empirical_laplace(le, y);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("invert_laplace closed form and round trips") {
    const auto le = constant_gaps(0.25, 50);
    CHECK(invert_laplace(le, std::exp(-1.0)) == doctest::Approx(4.0).epsilon(1e-9));

    const auto gaps = draw_gaps(SamplingScheme::uniform(0.25), 2000, 4);
    const auto le_u = LaplaceEstimate::from_gaps(gaps);
    const double kappa = empirical_laplace(le_u, 7.3);
    CHECK(invert_laplace(le_u, kappa) == doctest::Approx(7.3).epsilon(1e-9));
    for (double k : {0.1, 0.5, 0.9})
        CHECK(std::abs(empirical_laplace(le_u, invert_laplace(le_u, k)) - k) <= 1e-10);

    const auto exp_gaps = draw_gaps(SamplingScheme::exponential(0.25), 100000, 5);
    const auto le_exp = LaplaceEstimate::from_gaps(exp_gaps);
    CHECK(invert_laplace(le_exp, 0.5) == doctest::Approx(4.0).epsilon(0.025));

    CHECK_THROWS_AS((void)invert_laplace(le, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)invert_laplace(le, 0.0), std::domain_error);
}

TEST_CASE("estimate_v1 gates on validity and inverts otherwise") {
    const auto le = constant_gaps(0.25, 50);
    PrincipalPair invalid = PrincipalPair::invalid_pair(3);
    CHECK(estimate_v1(invalid, le) == 0.0);

    PrincipalPair pair;
    pair.valid = true;
    pair.kappa = std::exp(-1.0);
    pair.coeffs = CoefficientVector::unit(3, 1);
    CHECK(estimate_v1(pair, le) == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("volatility identification identity for the analytic triple") {
    EstimatorConfig cfg;
    cfg.D = 2.0;  // keep the cap inactive around sigma^2 = 1
    const auto grid_eval = eval_basis(BasisSpec::cosine(4), linspace(0.0, 1.0, 1001));
    const auto triple = analytic_rbm_triple(5, grid_eval);
    const auto vol = volatility_from_triple(triple, cfg, grid_eval);
    CHECK(vol.degenerate_points == 0);
    REQUIRE(vol.grid.size() == 801);
    CHECK(vol.grid.front() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(vol.grid.back() == doctest::Approx(0.9).epsilon(1e-12));
    for (double v : vol.values) CHECK(std::abs(v - 1.0) <= 1e-6);
}

TEST_CASE("drift identification identity for the analytic triple") {
    EstimatorConfig cfg;
    cfg.D = 2.0;
    const auto grid_eval = eval_basis(BasisSpec::cosine(4), linspace(0.0, 1.0, 1001));
    const auto triple = analytic_rbm_triple(5, grid_eval);
    const auto vol = volatility_from_triple(triple, cfg, grid_eval);
    const auto drift = drift_from_triple(triple, vol, cfg, grid_eval);
    CHECK_FALSE(drift.thresholded);
    for (double v : drift.values) CHECK(std::abs(v) <= 1e-6);
}

TEST_CASE("invalid pair propagates to a degenerate capped curve") {
    EstimatorConfig cfg;
    const auto grid_eval = eval_basis(BasisSpec::cosine(2), linspace(0.0, 1.0, 1001));
    SpectralTriple triple;
    triple.v1 = 0.0;
    triple.pair = PrincipalPair::invalid_pair(3);
    triple.density.coeffs.coeffs = Eigen::Vector3d(1.0, 0.0, 0.0);
    const auto vol = volatility_from_triple(triple, cfg, grid_eval);
    CHECK(vol.degenerate_points == static_cast<int>(vol.values.size()));
    for (double v : vol.values) CHECK(v == cfg.D);
}

TEST_CASE("drift threshold replaces oversized curves by zero") {
    EstimatorConfig cfg;
    cfg.D = 0.05;  // tiny bound, ||b~|| is far above 2D
    const auto grid_eval = eval_basis(BasisSpec::cosine(4), linspace(0.0, 1.0, 1001));
    auto triple = analytic_rbm_triple(5, grid_eval);
    triple.v1 = -50.0;  // inconsistent v1 makes b~ large
    const auto vol = volatility_from_triple(triple, cfg, grid_eval);
    const auto drift = drift_from_triple(triple, vol, cfg, grid_eval);
    CHECK(drift.thresholded);
    for (double v : drift.values) CHECK(v == 0.0);
}

TEST_CASE("estimate_pipeline checks N >= dim naming both") {
    ObservationSet obs;
    obs.times = {0.0, 1.0, 2.0, 3.0};
    obs.states = {0.2, 0.4, 0.6, 0.8};
    obs.gaps = {1.0, 1.0, 1.0};
    EstimatorConfig cfg;
    try {
        (void)estimate_pipeline(obs, 4, cfg);  // dim 5 > N = 3
        FAIL("expected precondition error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("N=3") != std::string::npos);
        CHECK(msg.find("dim=5") != std::string::npos);
    }
}

TEST_CASE("estimate_pipeline on reflected BM recovers the triple and the curve") {
    const auto em = reflected_bm_model();
    const auto obs = simulate_obs(em, SamplingScheme::deterministic(0.25), 20000, 2024);
    EstimatorConfig cfg;  // harness defaults: D = 1, floor 0
    const auto res = estimate_pipeline(obs, 4, cfg);
    REQUIRE(res.triple.pair.valid);
    CHECK(res.triple.pair.kappa ==
          doctest::Approx(std::exp(-kPi * kPi / 8.0)).epsilon(0.07));
    CHECK(res.triple.v1 == doctest::Approx(-kPi * kPi / 2.0).epsilon(0.08));
    CHECK(l2_distance(res.volatility, em.true_sigma_sq) <= 0.1);
}

TEST_CASE("estimate_pipeline is a pure function of its inputs") {
    const auto em = paper_sec6_model();
    const auto obs = simulate_obs(em, SamplingScheme::exponential(0.25), 2000, 7);
    EstimatorConfig cfg;
    const auto a = estimate_pipeline(obs, 3, cfg);
    const auto b = estimate_pipeline(obs, 3, cfg);
    CHECK(a.volatility.values == b.volatility.values);
    CHECK(a.drift.values == b.drift.values);
    CHECK(a.triple.v1 == b.triple.v1);
}

TEST_CASE("shared moments reproduce the direct pipeline bit for bit") {
    const auto em = paper_sec6_model();
    const auto obs = simulate_obs(em, SamplingScheme::uniform(0.25), 3000, 8);
    EstimatorConfig cfg;
    const ObservationMoments moments(obs, 16, cfg);
    for (int level : {1, 2, 4, 7}) {
        const auto direct = estimate_pipeline(obs, level, cfg);
        const auto shared = moments.estimate(level + 1);
        CHECK(direct.volatility.values == shared.volatility.values);
        CHECK(direct.drift.values == shared.drift.values);
        CHECK(direct.triple.v1 == shared.triple.v1);
        CHECK(direct.triple.pair.kappa == shared.triple.pair.kappa);
    }
}

TEST_CASE("volatility output is always finite and capped") {
    const auto em = paper_sec6_model();
    for (std::uint64_t seed : {11ull, 12ull}) {
        const auto obs = simulate_obs(em, SamplingScheme::scaled_beta(0.25), 500, seed);
        EstimatorConfig cfg;
        for (int level : {1, 3, 7}) {
            const auto res = estimate_pipeline(obs, level, cfg);
            for (double v : res.volatility.values) {
                CHECK(std::isfinite(v));
                CHECK(v > 0.0);
                CHECK(v <= cfg.D);
            }
        }
    }
}

TEST_CASE("sec6 model single replication stays close to the truth") {
    const auto em = paper_sec6_model();
    const auto obs = simulate_obs(em, SamplingScheme::deterministic(0.25), 20000, 31);
    EstimatorConfig cfg;
    const auto res = estimate_pipeline(obs, 4, cfg);
    CHECK(l2_distance(res.volatility, em.true_sigma_sq) <= 0.05);
    CHECK_FALSE(res.flags.invalid_pair);
}

TEST_CASE("a singular Gram matrix maps to the exceptional-event encoding") {
    // identical states make psi_1 columns collinear, so Cholesky must fail
    ObservationSet obs;
    obs.times = {0.0, 1.0, 2.0, 3.0};
    obs.states = {0.5, 0.5, 0.5, 0.5};
    obs.gaps = {1.0, 1.0, 1.0};
    EstimatorConfig cfg;
    const auto res = estimate_pipeline(obs, 1, cfg);
    CHECK(res.flags.gram_not_pd);
    CHECK(res.flags.invalid_pair);
    CHECK_FALSE(res.triple.pair.valid);
    CHECK(res.triple.pair.kappa == 0.0);
    CHECK(res.triple.v1 == 0.0);
    for (double v : res.volatility.values) CHECK(v == cfg.D);
}

TEST_CASE("with_estimator_config rejects a mismatched grid") {
    const auto em = reflected_bm_model();
    const auto obs = simulate_obs(em, SamplingScheme::deterministic(0.25), 200, 3);
    EstimatorConfig cfg;
    const ObservationMoments moments(obs, 4, cfg);
    EstimatorConfig other = cfg;
    other.grid_size = 501;
    CHECK_THROWS_AS((void)moments.with_estimator_config(other), std::invalid_argument);
    EstimatorConfig floored = cfg;
    floored.derivative_floor = 1e-3;
    CHECK_NOTHROW((void)moments.with_estimator_config(floored));
}

TEST_CASE("selected eigenfunction increases across the target interval") {
    const auto em = paper_sec6_model();
    const auto obs = simulate_obs(em, SamplingScheme::uniform(0.25), 5000, 12);
    EstimatorConfig cfg;
    const auto res = estimate_pipeline(obs, 4, cfg);
    REQUIRE(res.triple.pair.valid);
    const auto eval = eval_basis(BasisSpec::cosine(4), {cfg.interval_a, cfg.interval_b});
    const auto u = evaluate_expansion(res.triple.pair.coeffs, eval, EvalOrder::Value);
    CHECK(u[1] - u[0] > 0.0);
}

TEST_CASE("sec6 drift estimate stays within the regression guard") {
    const auto em = paper_sec6_model();
    EstimatorConfig cfg;
    double sum_sq = 0.0;
    const int reps = 3;
    for (int r = 0; r < reps; ++r) {
        const auto obs =
            simulate_obs(em, SamplingScheme::deterministic(0.25), 20000, 600 + r);
        const auto res = estimate_pipeline(obs, 4, cfg);
        const double err = l2_distance(res.drift, em.true_drift);
        sum_sq += err * err;
    }
    CHECK(std::sqrt(sum_sq / reps) < 0.15);
}
