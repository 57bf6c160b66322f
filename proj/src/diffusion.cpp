#include "diffspec/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffspec/quadrature.hpp"

namespace diffspec {

void DiffusionModel::validate(std::size_t grid_points) const {
    if (!sigma_sq || !drift) throw std::invalid_argument("DiffusionModel: missing coefficient");
    if (d < 0.0 || D <= 0.0) throw std::invalid_argument("DiffusionModel: invalid bounds");
    const auto grid = linspace(0.0, 1.0, grid_points);
    for (double x : grid) {
        const double s2 = sigma_sq(x);
        const double b = drift(x);
        if (!std::isfinite(s2) || !std::isfinite(b))
            throw std::invalid_argument("DiffusionModel: non-finite coefficient value");
        if (s2 < d * d)
            throw std::invalid_argument("DiffusionModel: sigma_sq below d^2 on [0,1]");
        if (s2 > D) throw std::invalid_argument("DiffusionModel: sigma_sq above D on [0,1]");
    }
}

std::vector<double> invariant_density_exact(const DiffusionModel& model,
                                            const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    if (n < 2) throw std::invalid_argument("invariant_density_exact: need at least two points");
    const double h = grid[1] - grid[0];

    std::vector<double> ratio(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s2 = model.sigma_sq(grid[i]);
        if (!(s2 > 0.0))
            throw std::invalid_argument("invariant_density_exact: sigma_sq must be positive");
        ratio[i] = 2.0 * model.drift(grid[i]) / s2;
    }
    const auto exponent = cumulative_integral(ratio, h);

    std::vector<double> density(n);
    for (std::size_t i = 0; i < n; ++i)
        density[i] = std::exp(exponent[i]) / model.sigma_sq(grid[i]);

    const double mass = integrate(density, h);
    for (double& v : density) v /= mass;
    return density;
}

InvariantSampler::InvariantSampler(const DiffusionModel& model, std::size_t grid_points) {
    grid_ = linspace(0.0, 1.0, grid_points);
    const auto density = invariant_density_exact(model, grid_);
    const double h = grid_[1] - grid_[0];
    cdf_ = cumulative_integral(density, h);
    // enforce a monotone CDF ending at exactly one
    for (std::size_t i = 1; i < cdf_.size(); ++i) cdf_[i] = std::max(cdf_[i], cdf_[i - 1]);
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
    cdf_.front() = 0.0;
    cdf_.back() = 1.0;
}

double InvariantSampler::quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.front();
    const std::size_t hi = static_cast<std::size_t>(it - cdf_.begin());
    const std::size_t lo = hi - 1;
    const double span = cdf_[hi] - cdf_[lo];
    const double t = span > 0.0 ? (u - cdf_[lo]) / span : 0.0;
    return grid_[lo] + t * (grid_[hi] - grid_[lo]);
}

double InvariantSampler::sample(Rng& rng) const { return quantile(rng.uniform01()); }

}  // namespace diffspec
