#include "diffspec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "diffspec/quadrature.hpp"

namespace diffspec {

namespace {

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double eval_poly(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DIFFSPEC_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Per-replication outcome; slot-indexed so aggregation order is fixed.
struct Replication {
    bool failed = false;
    std::string error;
    std::vector<double> sq_error_by_dim;
    std::vector<bool> degenerate_by_dim;
    std::vector<double> baseline_sq_error_by_dim;
    std::vector<bool> baseline_degenerate_by_dim;
    double adaptive_sq_error = 0.0;
    bool adaptive_degenerate = false;
    int adaptive_dim = 0;
};

struct Aggregate {
    double rmise = 0.0;
    double mc_se = 0.0;
    int degenerate = 0;
    int successes = 0;
};

Aggregate aggregate_sq_errors(const std::vector<double>& sq, const std::vector<bool>& degen) {
    Aggregate a;
    a.successes = static_cast<int>(sq.size());
    if (sq.empty()) return a;
    const double mise =
        std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size());
    a.rmise = std::sqrt(std::max(0.0, mise));
    if (sq.size() > 1 && a.rmise > 0.0) {
        double var = 0.0;
        for (double v : sq) var += (v - mise) * (v - mise);
        var /= static_cast<double>(sq.size() - 1);
        const double se_mise = std::sqrt(var / static_cast<double>(sq.size()));
        a.mc_se = se_mise / (2.0 * a.rmise);
    }
    a.degenerate = static_cast<int>(std::count(degen.begin(), degen.end(), true));
    return a;
}

void emit_curve_file(const std::string& dir, const std::string& tag,
                     const CurveEstimate& curve, const ScalarFn& truth) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + tag + ".csv");
    out << "x,true,estimate\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        out << format_g17(curve.grid[i]) << ',' << format_g17(truth(curve.grid[i])) << ','
            << format_g17(curve.values[i]) << '\n';
}

}  // namespace

ExperimentModel paper_sec6_model() {
    ExperimentModel m;
    m.name = "paper-sec6";
    m.model.sigma_sq = [](double x) { return 0.4 - (x - 0.5) * (x - 0.5); };
    m.model.drift = [](double x) { return 0.2 - 0.4 * x; };
    m.model.d = 0.35;
    m.model.D = 1.0;
    m.true_sigma_sq = m.model.sigma_sq;
    m.true_drift = m.model.drift;
    return m;
}

ExperimentModel reflected_bm_model() {
    ExperimentModel m;
    m.name = "reflected-bm";
    m.model.sigma_sq = [](double) { return 1.0; };
    m.model.drift = [](double) { return 0.0; };
    m.model.d = 1.0;
    m.model.D = 1.0;
    m.true_sigma_sq = m.model.sigma_sq;
    m.true_drift = m.model.drift;
    return m;
}

ExperimentModel polynomial_model(const std::vector<double>& sigma_sq_coeffs,
                                 const std::vector<double>& drift_coeffs, double d, double D) {
    ExperimentModel m;
    m.name = "inline";
    m.model.sigma_sq = [sigma_sq_coeffs](double x) { return eval_poly(sigma_sq_coeffs, x); };
    m.model.drift = [drift_coeffs](double x) { return eval_poly(drift_coeffs, x); };
    m.model.d = d;
    m.model.D = D;
    m.true_sigma_sq = m.model.sigma_sq;
    m.true_drift = m.model.drift;
    m.model.validate();
    return m;
}

void ExperimentConfig::check() const {
    model.model.validate();
    estimator.check();
    lepski.check();
    if (mc_iterations < 1) throw std::invalid_argument("ExperimentConfig: mc_iterations >= 1");
    if (schemes.empty() || sample_sizes.empty() || oracle_dims.empty())
        throw std::invalid_argument("ExperimentConfig: empty scheme/size/dim list");
    if (!(delta > 0.0) || !(sim_step > 0.0))
        throw std::invalid_argument("ExperimentConfig: delta and sim_step must be positive");
    int max_dim = *std::max_element(oracle_dims.begin(), oracle_dims.end());
    if (run_adaptive) max_dim = std::max(max_dim, lepski.dims.back());
    for (std::size_t n : sample_sizes)
        if (n < static_cast<std::size_t>(max_dim))
            throw std::invalid_argument("ExperimentConfig: sample size below largest dimension");
}

const EstimatorRow* CellReport::find(const std::string& estimator) const {
    for (const auto& row : rows)
        if (row.estimator == estimator) return &row;
    return nullptr;
}

const CellReport* RmiseReport::find(SamplingScheme::Kind kind, std::size_t sample_size) const {
    for (const auto& cell : cells)
        if (cell.scheme.kind == kind && cell.sample_size == sample_size) return &cell;
    return nullptr;
}

std::string RmiseReport::to_csv() const {
    std::ostringstream out;
    out << "scheme,N,estimator,dim,rmise,mc_se,failures\n";
    for (const auto& cell : cells)
        for (const auto& row : cell.rows)
            out << cell.scheme.name() << ',' << cell.sample_size << ',' << row.estimator << ','
                << row.dim << ',' << format_g17(row.rmise) << ',' << format_g17(row.mc_se) << ','
                << row.failures << '\n';
    return out.str();
}

std::string RmiseReport::summary() const {
    std::ostringstream out;
    for (const auto& cell : cells) {
        out << cell.scheme.name() << "  N=" << cell.sample_size << '\n';
        for (const auto& row : cell.rows) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "  %-16s dim=%-3d rmise=%.6f  mc_se=%.6f  degenerate=%d  failures=%d\n",
                          row.estimator.c_str(), row.dim, row.rmise, row.mc_se,
                          row.degenerate_replications, row.failures);
            out << buf;
        }
    }
    return out.str();
}

double l2_distance(const CurveEstimate& f, const CurveEstimate& g) {
    if (f.grid.size() < 2 || g.grid.size() < 2)
        throw std::invalid_argument("l2_distance: curves too short");
    if (f.grid.size() == g.grid.size()) {
        for (std::size_t i = 0; i < f.grid.size(); ++i)
            if (std::abs(f.grid[i] - g.grid[i]) > 1e-9)
                throw std::invalid_argument("l2_distance: grid mismatch");
        return l2_distance_sampled(f.values, g.values, f.spacing());
    }
    // resample the coarser curve onto the finer grid
    const CurveEstimate& fine = f.grid.size() > g.grid.size() ? f : g;
    const CurveEstimate& coarse = f.grid.size() > g.grid.size() ? g : f;
    if (std::abs(fine.grid.front() - coarse.grid.front()) > 1e-9 ||
        std::abs(fine.grid.back() - coarse.grid.back()) > 1e-9)
        throw std::invalid_argument("l2_distance: curves cover different intervals");
    std::vector<double> resampled(fine.grid.size());
    const double h = coarse.spacing();
    for (std::size_t i = 0; i < fine.grid.size(); ++i) {
        const double t = (fine.grid[i] - coarse.grid.front()) / h;
        const auto lo = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(t))),
                                 coarse.grid.size() - 2);
        const double w = std::clamp(t - static_cast<double>(lo), 0.0, 1.0);
        resampled[i] = (1.0 - w) * coarse.values[lo] + w * coarse.values[lo + 1];
    }
    return l2_distance_sampled(fine.values, resampled, fine.spacing());
}

double l2_distance(const CurveEstimate& f, const ScalarFn& g) {
    std::vector<double> truth(f.grid.size());
    for (std::size_t i = 0; i < f.grid.size(); ++i) truth[i] = g(f.grid[i]);
    return l2_distance_sampled(f.values, truth, f.spacing());
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t scheme_index,
                               std::size_t size_index, int replication) {
    return derive_seed(base, scheme_index + 1, size_index + 1,
                       static_cast<std::uint64_t>(replication) + 1);
}

namespace {

struct RunPlan {
    bool method_rows = true;    // empirical-Laplace estimator rows
    bool baseline_rows = false; // deterministic-mean-gap rows
    bool baseline_as_primary = false;
};

Replication run_replication(const ExperimentConfig& cfg, const SamplingScheme& scheme,
                            std::size_t sample_size, std::size_t scheme_index,
                            std::size_t size_index, int rep, const RunPlan& plan) {
    Replication out;
    try {
        const std::uint64_t seed = replication_seed(cfg.seed, scheme_index, size_index, rep);
        const std::vector<double> gaps = draw_gaps(scheme, sample_size, seed);
        const double horizon = std::accumulate(gaps.begin(), gaps.end(), 0.0);
        const PathGrid path = simulate_path(cfg.model.model, horizon, cfg.sim_step, seed);
        const ObservationSet obs = sample_observations(path, gaps);

        int max_dim = *std::max_element(cfg.oracle_dims.begin(), cfg.oracle_dims.end());
        if (cfg.run_adaptive) max_dim = std::max(max_dim, cfg.lepski.dims.back());
        const ObservationMoments moments(obs, max_dim, cfg.estimator);

        const auto inversion = plan.baseline_as_primary
                                   ? ObservationMoments::Inversion::DeterministicMeanGap
                                   : ObservationMoments::Inversion::EmpiricalLaplace;
        for (int dim : cfg.oracle_dims) {
            const PipelineResult res = moments.estimate(dim, inversion);
            const double dist = l2_distance(res.volatility, cfg.model.true_sigma_sq);
            out.sq_error_by_dim.push_back(dist * dist);
            out.degenerate_by_dim.push_back(res.flags.degenerate_points > 0 ||
                                            res.flags.invalid_pair);
        }
        if (plan.baseline_rows) {
            for (int dim : cfg.oracle_dims) {
                const PipelineResult res =
                    moments.estimate(dim, ObservationMoments::Inversion::DeterministicMeanGap);
                const double dist = l2_distance(res.volatility, cfg.model.true_sigma_sq);
                out.baseline_sq_error_by_dim.push_back(dist * dist);
                out.baseline_degenerate_by_dim.push_back(res.flags.degenerate_points > 0 ||
                                                         res.flags.invalid_pair);
            }
        }
        if (cfg.run_adaptive) {
            EstimatorConfig adaptive_cfg = cfg.estimator;
            adaptive_cfg.derivative_floor = cfg.lepski_derivative_floor;
            const LepskiResult lepski =
                lepski_select(moments.with_estimator_config(adaptive_cfg), cfg.lepski);
            const double dist = l2_distance(lepski.curve, cfg.model.true_sigma_sq);
            out.adaptive_sq_error = dist * dist;
            out.adaptive_dim = lepski.chosen_dim;
            out.adaptive_degenerate = lepski.curve.degenerate_points > 0;
            if (!cfg.emit_curves_dir.empty()) {
                emit_curve_file(cfg.emit_curves_dir,
                                scheme.name() + "_N" + std::to_string(sample_size) + "_rep" +
                                    std::to_string(rep) + "_adaptive",
                                lepski.curve, cfg.model.true_sigma_sq);
            }
        }
    } catch (const std::exception& ex) {
        out.failed = true;
        out.error = ex.what();
        out.sq_error_by_dim.clear();
        out.degenerate_by_dim.clear();
        out.baseline_sq_error_by_dim.clear();
        out.baseline_degenerate_by_dim.clear();
    }
    return out;
}

void append_dim_rows(CellReport& cell, const ExperimentConfig& cfg,
                     const std::vector<Replication>& reps, bool baseline, int failures) {
    const std::string prefix = baseline ? "baseline-" : "";
    std::vector<Aggregate> per_dim(cfg.oracle_dims.size());
    for (std::size_t d = 0; d < cfg.oracle_dims.size(); ++d) {
        std::vector<double> sq;
        std::vector<bool> degen;
        for (const auto& rep : reps) {
            const auto& source = baseline ? rep.baseline_sq_error_by_dim : rep.sq_error_by_dim;
            const auto& dflags = baseline ? rep.baseline_degenerate_by_dim : rep.degenerate_by_dim;
            if (rep.failed || source.size() != cfg.oracle_dims.size()) continue;
            sq.push_back(source[d]);
            degen.push_back(dflags[d]);
        }
        per_dim[d] = aggregate_sq_errors(sq, degen);
        EstimatorRow row;
        row.estimator = prefix + "dim=" + std::to_string(cfg.oracle_dims[d]);
        row.dim = cfg.oracle_dims[d];
        row.rmise = per_dim[d].rmise;
        row.mc_se = per_dim[d].mc_se;
        row.failures = failures;
        row.degenerate_replications = per_dim[d].degenerate;
        cell.rows.push_back(row);
    }
    // oracle = sweep winner
    std::size_t best = 0;
    for (std::size_t d = 1; d < per_dim.size(); ++d)
        if (per_dim[d].rmise < per_dim[best].rmise) best = d;
    EstimatorRow oracle;
    oracle.estimator = prefix + "oracle";
    oracle.dim = cfg.oracle_dims[best];
    oracle.rmise = per_dim[best].rmise;
    oracle.mc_se = per_dim[best].mc_se;
    oracle.failures = failures;
    oracle.degenerate_replications = per_dim[best].degenerate;
    cell.rows.push_back(oracle);
}

RmiseReport run_cells(const ExperimentConfig& cfg, const RunPlan& plan) {
    cfg.check();

    struct Task {
        std::size_t scheme_index;
        std::size_t size_index;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < cfg.schemes.size(); ++s)
        for (std::size_t n = 0; n < cfg.sample_sizes.size(); ++n)
            for (int r = 0; r < cfg.mc_iterations; ++r) tasks.push_back({s, n, r});

    std::vector<std::vector<Replication>> slots(cfg.schemes.size() * cfg.sample_sizes.size());
    for (auto& cell : slots) cell.resize(static_cast<std::size_t>(cfg.mc_iterations));

    const auto worker = [&](std::atomic<std::size_t>& next) {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            const Task& task = tasks[t];
            SamplingScheme scheme;
            scheme.kind = cfg.schemes[task.scheme_index];
            scheme.delta = cfg.delta;
            const std::size_t cell_index =
                task.scheme_index * cfg.sample_sizes.size() + task.size_index;
            slots[cell_index][static_cast<std::size_t>(task.rep)] =
                run_replication(cfg, scheme, cfg.sample_sizes[task.size_index],
                                task.scheme_index, task.size_index, task.rep, plan);
        }
    };

    const int n_workers = std::min<int>(resolve_workers(cfg.workers),
                                        static_cast<int>(tasks.size()));
    std::atomic<std::size_t> next{0};
    if (n_workers <= 1) {
        worker(next);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back([&] { worker(next); });
        for (auto& th : pool) th.join();
    }

    RmiseReport report;
    for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
        for (std::size_t n = 0; n < cfg.sample_sizes.size(); ++n) {
            const auto& reps = slots[s * cfg.sample_sizes.size() + n];
            CellReport cell;
            cell.scheme.kind = cfg.schemes[s];
            cell.scheme.delta = cfg.delta;
            cell.sample_size = cfg.sample_sizes[n];
            const int failures =
                static_cast<int>(std::count_if(reps.begin(), reps.end(),
                                               [](const Replication& r) { return r.failed; }));

            if (plan.method_rows || plan.baseline_as_primary)
                append_dim_rows(cell, cfg, reps, false, failures);
            if (plan.baseline_rows) append_dim_rows(cell, cfg, reps, true, failures);

            if (cfg.run_adaptive) {
                std::vector<double> sq;
                std::vector<bool> degen;
                for (const auto& rep : reps) {
                    if (rep.failed) continue;
                    sq.push_back(rep.adaptive_sq_error);
                    degen.push_back(rep.adaptive_degenerate);
                }
                const Aggregate agg = aggregate_sq_errors(sq, degen);
                EstimatorRow row;
                row.estimator = "adaptive";
                row.dim = 0;
                row.rmise = agg.rmise;
                row.mc_se = agg.mc_se;
                row.failures = failures;
                row.degenerate_replications = agg.degenerate;
                cell.rows.push_back(row);
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

}  // namespace

RmiseReport run_monte_carlo(const ExperimentConfig& cfg) {
    RunPlan plan;
    plan.method_rows = true;
    plan.baseline_rows = cfg.run_baseline;
    return run_cells(cfg, plan);
}

RmiseReport misspecified_baseline(const ExperimentConfig& cfg) {
    RunPlan plan;
    plan.method_rows = false;
    plan.baseline_rows = false;
    plan.baseline_as_primary = true;
    ExperimentConfig local = cfg;
    local.run_adaptive = false;  // the baseline mirrors the fixed-level estimator only
    return run_cells(local, plan);
}

}  // namespace diffspec
