// Scalar diffusion coefficients on [0,1] and the stationary density they
// induce under reflecting barriers.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "diffspec/rng.hpp"

namespace diffspec {

using ScalarFn = std::function<double(double)>;

// Squared volatility and drift on [0,1] together with the a-priori bounds
// d (volatility floor, sigma >= d) and D (uniform cap, sigma_sq <= D).
struct DiffusionModel {
    ScalarFn sigma_sq;
    ScalarFn drift;
    double d = 0.0;
    double D = 1.0;

    // Spot-checks the bound invariants on a uniform grid; throws on violation.
    void validate(std::size_t grid_points = 257) const;
};

// Stationary density sigma^{-2}(x) * exp(int_0^x 2 b / sigma^2), normalized
// to unit mass over [0,1] by the module quadrature. `grid` must be uniform
// and ascending within [0,1] with at least two points.
std::vector<double> invariant_density_exact(const DiffusionModel& model,
                                            const std::vector<double>& grid);

// Draws from the stationary law by inverse CDF on a fine quadrature grid.
class InvariantSampler {
  public:
    explicit InvariantSampler(const DiffusionModel& model, std::size_t grid_points = 4097);

    double sample(Rng& rng) const;

    // Quantile transform of u in [0,1]; exposed for deterministic tests.
    double quantile(double u) const;

  private:
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

}  // namespace diffspec
