#include "diffspec/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "diffspec/quadrature.hpp"

namespace diffspec {

namespace {

// Expansion on the eval grid allowing coeffs shorter than the tabulated
// dimension; the leading rows of a larger tabulation are bit-identical to a
// smaller one, which keeps dimension sweeps exactly reproducible.
Eigen::VectorXd expansion_on_grid(const Eigen::VectorXd& coeffs, const BasisEval& eval,
                                  EvalOrder order) {
    const Eigen::MatrixXd* block = nullptr;
    switch (order) {
        case EvalOrder::Value: block = &eval.values; break;
        case EvalOrder::D1: block = &eval.d1; break;
        case EvalOrder::D2: block = &eval.d2; break;
        case EvalOrder::Antiderivative: block = &eval.antiderivative; break;
    }
    if (coeffs.size() > block->rows())
        throw std::invalid_argument("expansion_on_grid: coefficients exceed tabulated dimension");
    return block->topRows(coeffs.size()).transpose() * coeffs;
}

// Indices of the evaluation grid lying inside [a,b] (with roundoff slack).
std::pair<std::size_t, std::size_t> subgrid_range(const std::vector<double>& grid, double a,
                                                  double b) {
    std::size_t lo = 0;
    while (lo < grid.size() && grid[lo] < a - 1e-12) ++lo;
    std::size_t hi = grid.size();
    while (hi > lo && grid[hi - 1] > b + 1e-12) --hi;
    if (hi - lo < 3)
        throw std::invalid_argument("subgrid_range: interval too small for the grid");
    return {lo, hi};
}

}  // namespace

void EstimatorConfig::check() const {
    if (!(0.0 < interval_a && interval_a < interval_b && interval_b < 1.0))
        throw std::invalid_argument("EstimatorConfig: need 0 < a < b < 1");
    if (!(D > 0.0)) throw std::invalid_argument("EstimatorConfig: need D > 0");
    if (derivative_floor < 0.0)
        throw std::invalid_argument("EstimatorConfig: negative derivative floor");
    if (grid_size < 5) throw std::invalid_argument("EstimatorConfig: grid too coarse");
}

LaplaceEstimate LaplaceEstimate::from_gaps(const std::vector<double>& gaps) {
    if (gaps.empty()) throw std::invalid_argument("LaplaceEstimate: no gaps");
    LaplaceEstimate le;
    le.gaps = Eigen::Map<const Eigen::ArrayXd>(gaps.data(), static_cast<Eigen::Index>(gaps.size()));
    for (Eigen::Index i = 0; i < le.gaps.size(); ++i)
        if (!(le.gaps[i] > 0.0)) throw std::invalid_argument("LaplaceEstimate: non-positive gap");
    return le;
}

DensityEstimate estimate_density(const ObservationSet& obs, const BasisSpec& spec,
                                 const BasisEval* grid_eval) {
    if (obs.n_transitions() < 1)
        throw std::invalid_argument("estimate_density: need at least one transition");

    const Eigen::MatrixXd values = basis_values(spec, obs.states);
    // divide rather than multiply by a reciprocal so the constant
    // coefficient comes out as exactly one
    const double count = static_cast<double>(obs.states.size());

    DensityEstimate est;
    est.coeffs.coeffs.resize(spec.dim());
    for (int j = 0; j < spec.dim(); ++j) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < values.cols(); ++k) sum += values(j, k);
        est.coeffs.coeffs[j] = sum / count;
    }
    if (grid_eval != nullptr) {
        est.grid = grid_eval->grid;
        est.values = expansion_on_grid(est.coeffs.coeffs, *grid_eval, EvalOrder::Value);
    }
    return est;
}

double empirical_laplace(const LaplaceEstimate& le, double y) {
    if (!(y >= 0.0)) throw std::domain_error("empirical_laplace: y must be nonnegative");
    return (-y * le.gaps).exp().mean();
}

double invert_laplace(const LaplaceEstimate& le, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::domain_error("invert_laplace: kappa must lie in (0,1)");

    double lo = 0.0;
    double hi = 1.0;
    while (empirical_laplace(le, hi) >= kappa) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi))
            throw std::runtime_error("invert_laplace: failed to bracket the root");
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double value = empirical_laplace(le, mid);
        if (std::abs(value - kappa) <= 1e-12 * kappa) return mid;
        if (value > kappa)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

double estimate_v1(const PrincipalPair& pair, const LaplaceEstimate& le) {
    if (!pair.valid || pair.kappa <= 0.0) return 0.0;
    return -invert_laplace(le, pair.kappa);
}

CurveEstimate volatility_from_triple(const SpectralTriple& triple, const EstimatorConfig& cfg,
                                     const BasisEval& grid_eval) {
    cfg.check();
    const auto& grid = grid_eval.grid;
    const double h = grid[1] - grid[0];

    const Eigen::VectorXd u =
        expansion_on_grid(triple.pair.coeffs.coeffs, grid_eval, EvalOrder::Value);
    const Eigen::VectorXd u_d1 =
        expansion_on_grid(triple.pair.coeffs.coeffs, grid_eval, EvalOrder::D1);
    const Eigen::VectorXd mu =
        expansion_on_grid(triple.density.coeffs.coeffs, grid_eval, EvalOrder::Value);

    std::vector<double> integrand(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        integrand[k] = u[i] * mu[i];
    }
    const std::vector<double> numerator = cumulative_integral(integrand, h);

    const auto [lo, hi] = subgrid_range(grid, cfg.interval_a, cfg.interval_b);

    CurveEstimate curve;
    curve.kind = CurveKind::Volatility;
    curve.dim = static_cast<int>(triple.pair.coeffs.coeffs.size());
    curve.grid.assign(grid.begin() + static_cast<std::ptrdiff_t>(lo),
                      grid.begin() + static_cast<std::ptrdiff_t>(hi));
    curve.values.resize(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double denom = std::max(u_d1[i], cfg.derivative_floor) * mu[i];
        const double raw = 2.0 * triple.v1 * numerator[k] / denom;
        if (std::isfinite(raw) && raw > 0.0) {
            curve.values[k - lo] = std::min(raw, cfg.D);
        } else {
            curve.values[k - lo] = cfg.D;
            ++curve.degenerate_points;
        }
    }
    return curve;
}

CurveEstimate drift_from_triple(const SpectralTriple& triple, const CurveEstimate& vol,
                                const EstimatorConfig& cfg, const BasisEval& grid_eval) {
    cfg.check();
    if (vol.kind != CurveKind::Volatility)
        throw std::invalid_argument("drift_from_triple: volatility curve required");

    const Eigen::VectorXd u =
        expansion_on_grid(triple.pair.coeffs.coeffs, grid_eval, EvalOrder::Value);
    const Eigen::VectorXd u_d1 =
        expansion_on_grid(triple.pair.coeffs.coeffs, grid_eval, EvalOrder::D1);
    const Eigen::VectorXd u_d2 =
        expansion_on_grid(triple.pair.coeffs.coeffs, grid_eval, EvalOrder::D2);

    const auto [lo, hi] = subgrid_range(grid_eval.grid, cfg.interval_a, cfg.interval_b);
    if (hi - lo != vol.values.size())
        throw std::invalid_argument("drift_from_triple: volatility grid mismatch");

    CurveEstimate curve;
    curve.kind = CurveKind::Drift;
    curve.dim = vol.dim;
    curve.sample_size = vol.sample_size;
    curve.grid = vol.grid;
    curve.values.resize(hi - lo);

    bool finite = true;
    for (std::size_t k = lo; k < hi; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double floored_d1 = std::max(u_d1[i], cfg.derivative_floor);
        const double value = triple.v1 * u[i] / floored_d1 -
                             vol.values[k - lo] * u_d2[i] / (2.0 * floored_d1);
        curve.values[k - lo] = value;
        finite = finite && std::isfinite(value);
    }

    const double norm = finite ? l2_norm(curve.values, vol.spacing())
                               : std::numeric_limits<double>::infinity();
    if (!(norm <= 2.0 * cfg.D)) {
        std::fill(curve.values.begin(), curve.values.end(), 0.0);
        curve.thresholded = true;
    }
    return curve;
}

ObservationMoments::ObservationMoments(const ObservationSet& obs, int max_dim,
                                       const EstimatorConfig& cfg)
    : max_dim_(max_dim), n_(obs.n_transitions()), cfg_(cfg) {
    cfg.check();
    if (max_dim < 1) throw std::invalid_argument("ObservationMoments: dimension must be >= 1");
    if (n_ < static_cast<std::size_t>(max_dim))
        throw std::invalid_argument("estimate_pipeline: need N >= dim (N=" + std::to_string(n_) +
                                    ", dim=" + std::to_string(max_dim) + ")");

    const BasisSpec spec = BasisSpec::with_dim(max_dim);
    BasisEval at_states;
    at_states.values = basis_values(spec, obs.states);

    gram_ = gram_matrix(obs, at_states).entries;
    transition_ = transition_matrix(obs, at_states).entries;

    const DensityEstimate density = estimate_density(obs, spec);
    density_coeffs_ = density.coeffs.coeffs;

    laplace_ = LaplaceEstimate::from_gaps(obs.gaps);
    grid_eval_ = std::make_shared<BasisEval>(
        eval_basis(spec, linspace(0.0, 1.0, cfg.grid_size)));
}

ObservationMoments ObservationMoments::with_estimator_config(const EstimatorConfig& cfg) const {
    cfg.check();
    if (cfg.grid_size != cfg_.grid_size)
        throw std::invalid_argument("with_estimator_config: grid size must match");
    ObservationMoments copy = *this;
    copy.cfg_ = cfg;
    return copy;
}

PipelineResult ObservationMoments::estimate(int dim, Inversion inversion) const {
    if (dim < 1 || dim > max_dim_)
        throw std::invalid_argument("ObservationMoments::estimate: dimension out of range");
    if (n_ < static_cast<std::size_t>(dim))
        throw std::invalid_argument("estimate_pipeline: need N >= dim (N=" + std::to_string(n_) +
                                    ", dim=" + std::to_string(dim) + ")");

    PipelineResult result;
    result.triple.density.coeffs.coeffs = density_coeffs_.head(dim);
    result.triple.density.grid = grid_eval_->grid;
    result.triple.density.values =
        expansion_on_grid(result.triple.density.coeffs.coeffs, *grid_eval_, EvalOrder::Value);

    try {
        const GsepSolution sol =
            solve_gsep(transition_.topLeftCorner(dim, dim), gram_.topLeftCorner(dim, dim));
        result.triple.pair = select_principal_pair(sol, *grid_eval_, cfg_.interval_a,
                                                   cfg_.interval_b);
    } catch (const not_positive_definite_error&) {
        result.triple.pair = PrincipalPair::invalid_pair(dim);
        result.flags.gram_not_pd = true;
    }
    result.flags.invalid_pair = !result.triple.pair.valid;

    switch (inversion) {
        case Inversion::EmpiricalLaplace:
            result.triple.v1 = estimate_v1(result.triple.pair, laplace_);
            break;
        case Inversion::DeterministicMeanGap:
            result.triple.v1 = (result.triple.pair.valid && result.triple.pair.kappa > 0.0)
                                   ? std::log(result.triple.pair.kappa) / laplace_.mean_gap()
                                   : 0.0;
            break;
    }

    result.volatility = volatility_from_triple(result.triple, cfg_, *grid_eval_);
    result.volatility.sample_size = n_;
    result.drift = drift_from_triple(result.triple, result.volatility, cfg_, *grid_eval_);
    result.flags.degenerate_points = result.volatility.degenerate_points;
    result.flags.drift_thresholded = result.drift.thresholded;
    return result;
}

PipelineResult estimate_pipeline(const ObservationSet& obs, int level,
                                 const EstimatorConfig& cfg) {
    if (level < 0) throw std::invalid_argument("estimate_pipeline: negative level");
    const ObservationMoments moments(obs, level + 1, cfg);
    return moments.estimate(level + 1);
}

}  // namespace diffspec
