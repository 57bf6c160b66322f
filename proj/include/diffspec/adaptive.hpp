// Data-driven choice of the projection dimension for the volatility
// estimator: smallest candidate whose distance to every larger candidate
// stays below the stochastic threshold of the larger one.

#pragma once

#include <Eigen/Core>
#include <vector>

#include "diffspec/estimators.hpp"

namespace diffspec {

struct LepskiConfig {
    double lambda = 0.2;              // threshold constant
    std::vector<int> dims = default_dims();

    static std::vector<int> default_dims() {
        std::vector<int> d;
        for (int m = 2; m <= 16; ++m) d.push_back(m);
        return d;
    }

    void check() const;
};

struct LepskiResult {
    int chosen_dim = 0;
    CurveEstimate curve;
    std::vector<int> dims;
    std::vector<double> thresholds;      // s(m) per candidate
    Eigen::MatrixXd pairwise_distances;  // L2([a,b]) distances between candidates
    bool fallback = false;               // no candidate satisfied the condition
};

// Stochastic error threshold lambda * sqrt(m^3 log log N / N). Requires
// N >= 3 so the iterated logarithm is positive.
double stochastic_threshold(double lambda, int m, std::size_t sample_size);

// Pure selection rule on precomputed distances: smallest index i with
// dist(i,k) <= threshold(k) for every k >= i; falls back to the largest
// candidate when none qualifies.
std::size_t lepski_choose(const Eigen::MatrixXd& distances,
                          const std::vector<double>& thresholds, bool& fallback);

LepskiResult lepski_select(const ObservationSet& obs, const LepskiConfig& cfg,
                           const EstimatorConfig& est_cfg);

// Shared-moments variant for Monte Carlo sweeps.
LepskiResult lepski_select(const ObservationMoments& moments, const LepskiConfig& cfg);

}  // namespace diffspec
