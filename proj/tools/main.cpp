// Command-line harness: simulate observations, run single estimates, the
// adaptive selector, Monte Carlo benchmarks, and the GSEP bound self-check.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "diffspec/gsep_trials.hpp"
#include "diffspec/harness.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

diffspec::SamplingScheme::Kind parse_scheme(const std::string& name) {
    using Kind = diffspec::SamplingScheme::Kind;
    if (name == "deterministic" || name == "det") return Kind::Deterministic;
    if (name == "uniform") return Kind::UniformOnDoubleDelta;
    if (name == "beta") return Kind::ScaledBeta;
    if (name == "exponential" || name == "exp") return Kind::Exponential;
    throw CLI::ValidationError("unknown sampling scheme: " + name);
}

diffspec::ExperimentModel parse_preset(const std::string& name) {
    if (name == "paper-sec6") return diffspec::paper_sec6_model();
    if (name == "reflected-bm") return diffspec::reflected_bm_model();
    throw CLI::ValidationError("unknown preset: " + name + " (try paper-sec6, reflected-bm)");
}

std::vector<int> parse_dim_range(const std::string& spec) {
    // "2:16" or "2,3,5"
    std::vector<int> dims;
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const int lo = std::stoi(spec.substr(0, colon));
        const int hi = std::stoi(spec.substr(colon + 1));
        for (int m = lo; m <= hi; ++m) dims.push_back(m);
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) dims.push_back(std::stoi(item));
    }
    if (dims.empty()) throw CLI::ValidationError("empty dimension list: " + spec);
    return dims;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

void dump_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_g17(m(i, j));
        }
        out << '\n';
    }
    write_file(path, out.str());
}

std::string curve_csv(const diffspec::CurveEstimate& curve) {
    std::ostringstream out;
    out << "# kind=" << (curve.kind == diffspec::CurveKind::Volatility ? "volatility" : "drift")
        << " level=" << curve.dim - 1 << " dim=" << curve.dim << " N=" << curve.sample_size
        << " degenerate_points=" << curve.degenerate_points
        << " thresholded=" << (curve.thresholded ? 1 : 0) << '\n';
    out << "x,value\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        out << format_g17(curve.grid[i]) << ',' << format_g17(curve.values[i]) << '\n';
    return out.str();
}

diffspec::ObservationSet load_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open observations: " + path);
    return diffspec::read_observations_csv(in);
}

// ---- benchmark config file -------------------------------------------------

diffspec::ExperimentConfig config_from_json(const json& j) {
    diffspec::ExperimentConfig cfg;
    if (j.contains("model")) {
        const auto& jm = j["model"];
        if (jm.is_string()) {
            cfg.model = parse_preset(jm.get<std::string>());
        } else {
            cfg.model = diffspec::polynomial_model(
                jm.at("sigma_sq").get<std::vector<double>>(),
                jm.at("drift").get<std::vector<double>>(), jm.value("d", 0.0),
                jm.value("D", 1.0));
        }
    }
    if (j.contains("schemes")) {
        cfg.schemes.clear();
        for (const auto& s : j["schemes"]) cfg.schemes.push_back(parse_scheme(s));
    }
    cfg.delta = j.value("delta", cfg.delta);
    if (j.contains("sample_sizes"))
        cfg.sample_sizes = j["sample_sizes"].get<std::vector<std::size_t>>();
    cfg.mc_iterations = j.value("mc_iterations", cfg.mc_iterations);
    if (j.contains("oracle_dims")) {
        if (j["oracle_dims"].is_string())
            cfg.oracle_dims = parse_dim_range(j["oracle_dims"].get<std::string>());
        else
            cfg.oracle_dims = j["oracle_dims"].get<std::vector<int>>();
    }
    cfg.run_adaptive = j.value("adaptive", cfg.run_adaptive);
    cfg.run_baseline = j.value("baseline", cfg.run_baseline);
    if (j.contains("lepski")) {
        const auto& jl = j["lepski"];
        cfg.lepski.lambda = jl.value("lambda", cfg.lepski.lambda);
        if (jl.contains("dims")) {
            if (jl["dims"].is_string())
                cfg.lepski.dims = parse_dim_range(jl["dims"].get<std::string>());
            else
                cfg.lepski.dims = jl["dims"].get<std::vector<int>>();
        }
        cfg.lepski_derivative_floor = jl.value("derivative_floor", cfg.lepski_derivative_floor);
    }
    if (j.contains("estimator")) {
        const auto& je = j["estimator"];
        cfg.estimator.D = je.value("cap", cfg.estimator.D);
        cfg.estimator.interval_a = je.value("a", cfg.estimator.interval_a);
        cfg.estimator.interval_b = je.value("b", cfg.estimator.interval_b);
        cfg.estimator.derivative_floor = je.value("derivative_floor",
                                                  cfg.estimator.derivative_floor);
        cfg.estimator.grid_size = je.value("grid_size", cfg.estimator.grid_size);
    }
    cfg.sim_step = j.value("sim_step", cfg.sim_step);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.emit_curves_dir = j.value("emit_curves_dir", cfg.emit_curves_dir);
    return cfg;
}

// ---- subcommand state ------------------------------------------------------

struct SimulateArgs {
    std::string preset = "paper-sec6";
    std::string scheme = "deterministic";
    double delta = 0.25;
    std::size_t n_obs = 20000;
    double step = 0.001;
    std::uint64_t seed = 1;
    std::string start = "stationary";
    double x0 = 0.5;
    std::string out = "obs.csv";
    std::string path_out;
};

struct EstimateArgs {
    std::string input;
    int dim = 5;
    double a = 0.1, b = 0.9;
    double cap = 1.0;
    double floor = 0.0;
    std::size_t grid = 1001;
    std::string out = "curve.csv";
    std::string drift_out;
    std::string dump_matrices;
};

struct AdaptArgs {
    std::string input;
    std::string dims = "2:16";
    double lambda = 0.2;
    double a = 0.1, b = 0.9;
    double cap = 1.0;
    double floor = 1e-3;
    std::size_t grid = 1001;
    std::string out = "curve.csv";
    std::string report;
};

struct BenchmarkArgs {
    std::string preset = "paper-sec6";
    std::string config_file;
    int iters = 100;
    bool full = false;
    std::string sizes = "4000,20000";
    std::string schemes = "deterministic,uniform,exponential,beta";
    std::string dims = "2:8";
    double lambda = 0.2;
    double delta = 0.25;
    std::uint64_t seed = 1;
    bool baseline = false;
    bool no_adaptive = false;
    std::string out = "report.csv";
    std::string emit_curves;
    int workers = 0;
};

struct GsepArgs {
    int trials = 1000;
    int size = 0;  // 0: sweep sizes 2..8
    std::uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& a) {
    const auto model = parse_preset(a.preset);
    diffspec::SamplingScheme scheme;
    scheme.kind = parse_scheme(a.scheme);
    scheme.delta = a.delta;

    diffspec::InitialState init = diffspec::InitialState::stationary();
    if (a.start == "fixed") init = diffspec::InitialState::fixed(a.x0);
    else if (a.start == "burn-in") init = diffspec::InitialState::burn_in();
    else if (a.start != "stationary")
        throw CLI::ValidationError("unknown start mode: " + a.start);

    const auto gaps = diffspec::draw_gaps(scheme, a.n_obs, a.seed);
    double horizon = 0.0;
    for (double g : gaps) horizon += g;
    const auto path = diffspec::simulate_path(model.model, horizon, a.step, a.seed, init);
    const auto obs = diffspec::sample_observations(path, gaps);

    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + a.out);
    diffspec::write_observations_csv(out, obs);
    if (!a.path_out.empty()) {
        std::ofstream pout(a.path_out, std::ios::binary);
        if (!pout) throw std::runtime_error("cannot open for writing: " + a.path_out);
        diffspec::write_path_binary(pout, path);
    }
    std::cout << "wrote " << obs.times.size() << " observations to " << a.out << "\n";
    return kExitOk;
}

int run_estimate(const EstimateArgs& a) {
    const auto obs = load_observations(a.input);
    diffspec::EstimatorConfig cfg;
    cfg.D = a.cap;
    cfg.interval_a = a.a;
    cfg.interval_b = a.b;
    cfg.derivative_floor = a.floor;
    cfg.grid_size = a.grid;

    const diffspec::ObservationMoments moments(obs, a.dim, cfg);
    const auto result = moments.estimate(a.dim);
    write_file(a.out, curve_csv(result.volatility));
    if (!a.drift_out.empty()) write_file(a.drift_out, curve_csv(result.drift));
    if (!a.dump_matrices.empty()) {
        dump_matrix_csv(a.dump_matrices + "_gram.csv", moments.gram());
        dump_matrix_csv(a.dump_matrices + "_transition.csv", moments.transition());
    }
    std::cout << "dim=" << a.dim << " kappa=" << result.triple.pair.kappa
              << " v1=" << result.triple.v1
              << (result.flags.invalid_pair ? " (invalid pair)" : "") << "\n";
    return kExitOk;
}

int run_adapt(const AdaptArgs& a) {
    const auto obs = load_observations(a.input);
    diffspec::EstimatorConfig cfg;
    cfg.D = a.cap;
    cfg.interval_a = a.a;
    cfg.interval_b = a.b;
    cfg.derivative_floor = a.floor;
    cfg.grid_size = a.grid;

    diffspec::LepskiConfig lepski;
    lepski.lambda = a.lambda;
    lepski.dims = parse_dim_range(a.dims);

    const auto result = diffspec::lepski_select(obs, lepski, cfg);
    write_file(a.out, curve_csv(result.curve));

    std::ostringstream rep;
    rep << "chosen_dim=" << result.chosen_dim << (result.fallback ? " (fallback)" : "") << "\n";
    rep << "dim,threshold\n";
    for (std::size_t i = 0; i < result.dims.size(); ++i)
        rep << result.dims[i] << ',' << format_g17(result.thresholds[i]) << '\n';
    rep << "pairwise_l2_distances\n";
    for (Eigen::Index i = 0; i < result.pairwise_distances.rows(); ++i) {
        for (Eigen::Index j = 0; j < result.pairwise_distances.cols(); ++j) {
            if (j) rep << ',';
            rep << format_g17(result.pairwise_distances(i, j));
        }
        rep << '\n';
    }
    if (!a.report.empty())
        write_file(a.report, rep.str());
    else
        std::cout << rep.str();
    return kExitOk;
}

int run_benchmark(const BenchmarkArgs& a) {
    diffspec::ExperimentConfig cfg;
    if (!a.config_file.empty()) {
        std::ifstream in(a.config_file);
        if (!in) throw std::invalid_argument("cannot open config: " + a.config_file);
        try {
            json j;
            in >> j;
            cfg = config_from_json(j);
        } catch (const json::exception& e) {
            throw std::invalid_argument("config file error: " + std::string(e.what()));
        }
    } else {
        cfg.model = parse_preset(a.preset);
        cfg.schemes.clear();
        std::stringstream ss(a.schemes);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.schemes.push_back(parse_scheme(item));
        cfg.sample_sizes.clear();
        std::stringstream st(a.sizes);
        while (std::getline(st, item, ',')) cfg.sample_sizes.push_back(std::stoul(item));
        cfg.oracle_dims = parse_dim_range(a.dims);
        cfg.lepski.lambda = a.lambda;
        cfg.delta = a.delta;
        cfg.mc_iterations = a.full ? 1000 : a.iters;
        cfg.seed = a.seed;
        cfg.run_baseline = a.baseline;
        cfg.run_adaptive = !a.no_adaptive;
        cfg.emit_curves_dir = a.emit_curves;
        cfg.workers = a.workers;
    }

    const auto report = diffspec::run_monte_carlo(cfg);
    write_file(a.out, report.to_csv());
    std::cout << report.summary();
    std::cout << "report written to " << a.out << "\n";
    return kExitOk;
}

int run_gsep_check(const GsepArgs& a) {
    const int min_size = a.size > 0 ? a.size : 2;
    const int max_size = a.size > 0 ? a.size : 8;
    const auto report = diffspec::run_gsep_bound_trials(a.trials, min_size, max_size, a.seed);
    std::cout << "trials=" << report.trials
              << " residual_eigenvalue_violations=" << report.residual_eigenvalue_violations
              << " residual_eigenvector_violations=" << report.residual_eigenvector_violations
              << " weyl_violations=" << report.weyl_violations << "\n"
              << "worst residual ratio=" << report.worst_residual_ratio
              << " worst weyl ratio=" << report.worst_weyl_ratio << "\n";
    return report.clean() ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral volatility/drift estimation for randomly sampled reflected diffusions"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a path and write observations");
    sim_cmd->add_option("--preset", sim.preset, "model preset (paper-sec6, reflected-bm)");
    sim_cmd->add_option("--scheme", sim.scheme, "sampling scheme");
    sim_cmd->add_option("--delta", sim.delta, "mean observation gap");
    sim_cmd->add_option("--n-obs,-n", sim.n_obs, "number of observations N");
    sim_cmd->add_option("--step", sim.step, "Euler step size");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--start", sim.start, "initial state: stationary, burn-in, fixed");
    sim_cmd->add_option("--x0", sim.x0, "initial state for --start fixed");
    sim_cmd->add_option("--out,-o", sim.out, "observations CSV output");
    sim_cmd->add_option("--path-out", sim.path_out, "optional binary path dump");

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "single volatility/drift estimate");
    est_cmd->add_option("--input,-i", est.input, "observations CSV")->required();
    est_cmd->add_option("--dim,-m", est.dim, "projection dimension (level + 1)");
    est_cmd->add_option("--a", est.a, "interval lower end");
    est_cmd->add_option("--b", est.b, "interval upper end");
    est_cmd->add_option("--cap", est.cap, "volatility cap D");
    est_cmd->add_option("--floor", est.floor, "derivative floor");
    est_cmd->add_option("--grid", est.grid, "evaluation grid size on [0,1]");
    est_cmd->add_option("--out,-o", est.out, "volatility curve CSV");
    est_cmd->add_option("--drift-out", est.drift_out, "optional drift curve CSV");
    est_cmd->add_option("--dump-matrices", est.dump_matrices,
                        "prefix for Gram/transition matrix CSV dumps");

    AdaptArgs ada;
    auto* ada_cmd = app.add_subcommand("adapt", "adaptive (Lepski) volatility estimate");
    ada_cmd->add_option("--input,-i", ada.input, "observations CSV")->required();
    ada_cmd->add_option("--dims", ada.dims, "candidate dimensions, e.g. 2:16 or 2,4,8");
    ada_cmd->add_option("--lambda", ada.lambda, "threshold constant");
    ada_cmd->add_option("--a", ada.a, "interval lower end");
    ada_cmd->add_option("--b", ada.b, "interval upper end");
    ada_cmd->add_option("--cap", ada.cap, "volatility cap D");
    ada_cmd->add_option("--floor", ada.floor, "derivative floor");
    ada_cmd->add_option("--grid", ada.grid, "evaluation grid size");
    ada_cmd->add_option("--out,-o", ada.out, "chosen curve CSV");
    ada_cmd->add_option("--report", ada.report, "selection report output");

    BenchmarkArgs ben;
    auto* ben_cmd = app.add_subcommand("benchmark", "Monte Carlo RMISE study");
    ben_cmd->add_option("--preset", ben.preset, "model preset");
    ben_cmd->add_option("--config", ben.config_file, "JSON config file (overrides other flags)");
    ben_cmd->add_option("--iters", ben.iters, "Monte Carlo iterations");
    ben_cmd->add_flag("--full", ben.full, "full 1000-iteration run");
    ben_cmd->add_option("--sizes", ben.sizes, "sample sizes, comma separated");
    ben_cmd->add_option("--schemes", ben.schemes, "sampling schemes, comma separated");
    ben_cmd->add_option("--dims", ben.dims, "oracle dimension sweep");
    ben_cmd->add_option("--lambda", ben.lambda, "Lepski threshold constant");
    ben_cmd->add_option("--delta", ben.delta, "mean observation gap");
    ben_cmd->add_option("--seed", ben.seed, "base seed");
    ben_cmd->add_flag("--baseline", ben.baseline, "also run the misspecified baseline");
    ben_cmd->add_flag("--no-adaptive", ben.no_adaptive, "skip the adaptive estimator");
    ben_cmd->add_option("--out,-o", ben.out, "report CSV output");
    ben_cmd->add_option("--emit-curves", ben.emit_curves, "directory for plot data");
    ben_cmd->add_option("--workers", ben.workers, "worker threads (0 = auto)");

    GsepArgs gsep;
    auto* gsep_cmd = app.add_subcommand("gsep-check", "randomized eigenpair bound checks");
    gsep_cmd->add_option("--trials", gsep.trials, "number of random trials");
    gsep_cmd->add_option("--size", gsep.size, "matrix size (0 = sweep 2..8)");
    gsep_cmd->add_option("--seed", gsep.seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim_cmd) return run_simulate(sim);
        if (*est_cmd) return run_estimate(est);
        if (*ada_cmd) return run_adapt(ada);
        if (*ben_cmd) return run_benchmark(ben);
        if (*gsep_cmd) return run_gsep_check(gsep);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
