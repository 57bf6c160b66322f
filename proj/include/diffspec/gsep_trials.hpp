// Randomized verification of the a posteriori eigenpair bounds: perturbed
// problems are solved by brute force and the residual and Weyl bounds are
// checked against the actual eigenvalue and eigenvector errors.

#pragma once

#include <cstdint>

namespace diffspec {

struct GsepTrialReport {
    int trials = 0;
    int residual_eigenvalue_violations = 0;
    int residual_eigenvector_violations = 0;
    int weyl_violations = 0;
    // worst observed error/bound ratios; <= 1 means the bound held
    double worst_residual_ratio = 0.0;
    double worst_weyl_ratio = 0.0;

    bool clean() const {
        return residual_eigenvalue_violations == 0 && residual_eigenvector_violations == 0 &&
               weyl_violations == 0;
    }
};

// Runs `trials` random perturbation trials with sizes drawn uniformly from
// [min_size, max_size]. Deterministic given seed.
GsepTrialReport run_gsep_bound_trials(int trials, int min_size, int max_size,
                                      std::uint64_t seed);

}  // namespace diffspec
