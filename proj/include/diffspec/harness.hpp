// Monte Carlo experiment runner: oracle and adaptive RMISE tables across
// sampling schemes and sample sizes, plus the misspecified low-frequency
// baseline.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffspec/adaptive.hpp"
#include "diffspec/simulate.hpp"

namespace diffspec {

// A model together with the ground truth the error metric needs.
struct ExperimentModel {
    std::string name;
    DiffusionModel model;
    ScalarFn true_sigma_sq;
    ScalarFn true_drift;
};

// Quadratic squared volatility 0.4 - (x - 0.5)^2 with linear mean-reverting
// drift 0.2 - 0.4x.
ExperimentModel paper_sec6_model();

// Reflected Brownian motion: unit volatility, zero drift.
ExperimentModel reflected_bm_model();

// Polynomial coefficients in ascending degree.
ExperimentModel polynomial_model(const std::vector<double>& sigma_sq_coeffs,
                                 const std::vector<double>& drift_coeffs, double d, double D);

struct ExperimentConfig {
    ExperimentModel model = paper_sec6_model();
    std::vector<SamplingScheme::Kind> schemes = {
        SamplingScheme::Kind::Deterministic, SamplingScheme::Kind::UniformOnDoubleDelta,
        SamplingScheme::Kind::Exponential, SamplingScheme::Kind::ScaledBeta};
    double delta = 0.25;
    std::vector<std::size_t> sample_sizes = {4000, 20000};
    int mc_iterations = 100;
    std::vector<int> oracle_dims = {2, 3, 4, 5, 6, 7, 8};
    bool run_adaptive = true;
    bool run_baseline = false;
    LepskiConfig lepski;
    double lepski_derivative_floor = 1e-3;
    EstimatorConfig estimator;
    double sim_step = 0.001;
    std::uint64_t seed = 1;
    int workers = 0;               // 0: DIFFSPEC_THREADS env var, then hardware
    std::string emit_curves_dir;   // empty: no plot data

    void check() const;
};

// One row of the report: an estimator within a (scheme, N) cell.
struct EstimatorRow {
    std::string estimator;  // "dim=5", "oracle", "adaptive", "baseline-dim=5", ...
    int dim = 0;
    double rmise = 0.0;
    double mc_se = 0.0;
    int failures = 0;
    int degenerate_replications = 0;
};

struct CellReport {
    SamplingScheme scheme;
    std::size_t sample_size = 0;
    std::vector<EstimatorRow> rows;

    const EstimatorRow* find(const std::string& estimator) const;
};

struct RmiseReport {
    std::vector<CellReport> cells;

    const CellReport* find(SamplingScheme::Kind kind, std::size_t sample_size) const;

    // `scheme,N,estimator,dim,rmise,mc_se,failures` rows, full precision.
    std::string to_csv() const;

    // Human-readable table with degeneracy counts.
    std::string summary() const;
};

// L2 distance between curves on matching grids; a coarser uniform grid over
// the same interval is resampled linearly onto the finer one.
double l2_distance(const CurveEstimate& f, const CurveEstimate& g);
double l2_distance(const CurveEstimate& f, const ScalarFn& g);

// Simulate / observe / estimate over every (scheme, N, replication) cell.
// Deterministic given the config seed, independent of worker count.
RmiseReport run_monte_carlo(const ExperimentConfig& cfg);

// Identical pipeline with the Laplace inversion replaced by the
// deterministic-gap rule v = log(kappa) / mean gap. Row labels match
// run_monte_carlo so the two reports compare cell by cell.
RmiseReport misspecified_baseline(const ExperimentConfig& cfg);

// Replication seed derivation, exposed for tests.
std::uint64_t replication_seed(std::uint64_t base, std::size_t scheme_index,
                               std::size_t size_index, int replication);

}  // namespace diffspec
