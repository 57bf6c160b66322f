// The full statistical pipeline: invariant density estimate, empirical
// Laplace transform and its inversion, the principal eigenpair, and the
// plug-in volatility and drift curves with their stabilizations.

#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "diffspec/basis.hpp"
#include "diffspec/spectral.hpp"

namespace diffspec {

// Projection estimate of the invariant density. The constant coefficient is
// exactly one for every observation set.
struct DensityEstimate {
    CoefficientVector coeffs;
    std::vector<double> grid;
    Eigen::VectorXd values;  // on `grid`; empty when not materialized
};

// Empirical Laplace transform of the sampling distribution, represented by
// the observed gaps.
struct LaplaceEstimate {
    Eigen::ArrayXd gaps;

    static LaplaceEstimate from_gaps(const std::vector<double>& gaps);
    double mean_gap() const { return gaps.mean(); }
};

// Everything the identification formulas consume: v1 estimate, principal
// eigenpair, density estimate. v1 == 0 exactly when the pair is unusable.
struct SpectralTriple {
    double v1 = 0.0;
    PrincipalPair pair;
    DensityEstimate density;
};

struct EstimatorConfig {
    double D = 1.0;                  // volatility cap; drift threshold scale
    double interval_a = 0.1;         // target interval [a,b]
    double interval_b = 0.9;
    double derivative_floor = 0.0;   // floor on u' in the denominators
    std::size_t grid_size = 1001;    // evaluation grid points on [0,1]

    void check() const;
};

enum class CurveKind { Volatility, Drift };

// An estimated coefficient curve on the sub-grid of [a,b].
struct CurveEstimate {
    CurveKind kind = CurveKind::Volatility;
    std::vector<double> grid;
    std::vector<double> values;
    int dim = 0;                 // basis dimension behind the estimate
    std::size_t sample_size = 0;
    int degenerate_points = 0;   // grid points clipped by the degeneracy rule
    bool thresholded = false;    // drift only: replaced by the zero curve

    double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

struct PipelineFlags {
    bool gram_not_pd = false;
    bool invalid_pair = false;
    int degenerate_points = 0;
    bool drift_thresholded = false;
};

struct PipelineResult {
    SpectralTriple triple;
    CurveEstimate volatility;
    CurveEstimate drift;
    PipelineFlags flags;
};

DensityEstimate estimate_density(const ObservationSet& obs, const BasisSpec& spec,
                                 const BasisEval* grid_eval = nullptr);

// Mean of exp(-y * gap); equals 1 at y = 0 and is strictly decreasing.
double empirical_laplace(const LaplaceEstimate& le, double y);

// Solves empirical_laplace(y) == kappa by bracket doubling plus bisection to
// a relative tolerance of 1e-12. Throws std::domain_error for kappa outside
// (0,1).
double invert_laplace(const LaplaceEstimate& le, double kappa);

// -invert_laplace(kappa) gated by the indicator {kappa > 0, pair valid}.
double estimate_v1(const PrincipalPair& pair, const LaplaceEstimate& le);

CurveEstimate volatility_from_triple(const SpectralTriple& triple, const EstimatorConfig& cfg,
                                     const BasisEval& grid_eval);

CurveEstimate drift_from_triple(const SpectralTriple& triple, const CurveEstimate& vol,
                                const EstimatorConfig& cfg, const BasisEval& grid_eval);

// density -> gram -> transition -> gsep -> principal pair -> Laplace
// inversion -> plug-ins, at projection level J (dimension J+1).
// Requires N >= dimension.
PipelineResult estimate_pipeline(const ObservationSet& obs, int level,
                                 const EstimatorConfig& cfg);

// Shared per-observation-set precompute for sweeps over the projection
// dimension. The moment matrices are built once at `max_dim`; lower
// dimensions reuse their leading blocks, bit-identically to a direct
// estimate_pipeline call at that dimension.
class ObservationMoments {
  public:
    ObservationMoments(const ObservationSet& obs, int max_dim, const EstimatorConfig& cfg);

    // Inversion modes: the estimator inverts the empirical Laplace
    // transform; the misspecified baseline pretends the sampling was
    // deterministic at the average gap.
    enum class Inversion { EmpiricalLaplace, DeterministicMeanGap };

    PipelineResult estimate(int dim, Inversion inversion = Inversion::EmpiricalLaplace) const;

    // Same moments under a different curve-stage configuration (cap, floor,
    // interval); the grid size must match since the tabulation is shared.
    ObservationMoments with_estimator_config(const EstimatorConfig& cfg) const;

    int max_dim() const { return max_dim_; }
    std::size_t sample_size() const { return n_; }
    const LaplaceEstimate& laplace() const { return laplace_; }
    const BasisEval& grid_eval() const { return *grid_eval_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& transition() const { return transition_; }

  private:
    int max_dim_;
    std::size_t n_;
    EstimatorConfig cfg_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd transition_;
    Eigen::VectorXd density_coeffs_;
    LaplaceEstimate laplace_;
    std::shared_ptr<const BasisEval> grid_eval_;
};

}  // namespace diffspec
