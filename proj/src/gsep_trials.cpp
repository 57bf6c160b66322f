#include "diffspec/gsep_trials.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "diffspec/rng.hpp"
#include "diffspec/spectral.hpp"

namespace diffspec {

namespace {

Eigen::MatrixXd random_symmetric(Rng& rng, int n, double scale) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = scale * rng.normal();
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

Eigen::MatrixXd random_spd(Rng& rng, int n) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    Eigen::MatrixXd spd = m.transpose() * m / static_cast<double>(n);
    spd += (0.2 + rng.uniform01()) * Eigen::MatrixXd::Identity(n, n);
    return spd;
}

}  // namespace

GsepTrialReport run_gsep_bound_trials(int trials, int min_size, int max_size,
                                      std::uint64_t seed) {
    if (trials < 1 || min_size < 2 || max_size < min_size)
        throw std::invalid_argument("run_gsep_bound_trials: bad trial parameters");

    Rng rng(derive_seed(seed, 0x67736570));  // "gsep"
    GsepTrialReport report;
    report.trials = trials;

    for (int t = 0; t < trials; ++t) {
        const int n = min_size + static_cast<int>(rng.next_u64() %
                                                  static_cast<std::uint64_t>(max_size - min_size + 1));
        const Eigen::MatrixXd A = random_symmetric(rng, n, 1.0);
        const Eigen::MatrixXd B = random_spd(rng, n);

        // perturbations spanning a few orders of magnitude
        const double eps = std::pow(10.0, -1.0 - 3.0 * rng.uniform01());
        const Eigen::MatrixXd A_tilde = A + random_symmetric(rng, n, eps);
        Eigen::MatrixXd B_tilde = B + random_symmetric(rng, n, 0.05 * eps);

        const GsepSolution exact = solve_gsep(A, B);
        GsepSolution approx;
        try {
            approx = solve_gsep(A_tilde, B_tilde);
        } catch (const not_positive_definite_error&) {
            B_tilde = B;  // keep the trial; perturb A only
            approx = solve_gsep(A_tilde, B_tilde);
        }

        // residual bound for the top eigenpair of the perturbed problem
        const double lambda_tilde = approx.eigenvalues[0];
        const Eigen::VectorXd x_tilde = approx.eigenvectors.col(0);
        const ResidualBounds rb = residual_bounds(A, B, A_tilde, B_tilde, lambda_tilde, x_tilde);

        const Eigen::ArrayXd gaps_to_lambda =
            (exact.eigenvalues.array() - lambda_tilde).abs();
        const double lambda_error = gaps_to_lambda.minCoeff();
        report.worst_residual_ratio =
            std::max(report.worst_residual_ratio,
                     lambda_error / std::max(rb.eigenvalue_bound, 1e-300));
        if (lambda_error > rb.eigenvalue_bound * (1.0 + 1e-8) + 1e-12)
            ++report.residual_eigenvalue_violations;

        // eigenvector part of the theorem: existence over all exact pairs
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(B, Eigen::EigenvaluesOnly);
        const double b_inv_norm = 1.0 / esb.eigenvalues().minCoeff();
        const double b_cond = esb.eigenvalues().maxCoeff() / esb.eigenvalues().minCoeff();
        bool vector_ok = false;
        for (Eigen::Index i = 0; i < exact.eigenvalues.size(); ++i) {
            if (gaps_to_lambda[i] > rb.eigenvalue_bound * (1.0 + 1e-8) + 1e-12) continue;
            double delta = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < exact.eigenvalues.size(); ++j)
                if (j != i) delta = std::min(delta, std::abs(exact.eigenvalues[j] - lambda_tilde));
            const double bound =
                2.0 * std::sqrt(2.0 * b_cond) / delta * b_inv_norm * rb.residual_norm;
            const double dist = std::min((exact.eigenvectors.col(i) - x_tilde).norm(),
                                         (exact.eigenvectors.col(i) + x_tilde).norm());
            if (dist <= bound * (1.0 + 1e-8) + 1e-12) {
                vector_ok = true;
                break;
            }
        }
        if (!vector_ok) ++report.residual_eigenvector_violations;

        // absolute Weyl bounds on sorted eigenvalues, both directions
        const WeylBounds wb = weyl_bound(A, B, A_tilde, B_tilde);
        for (Eigen::Index i = 0; i < wb.exact_eigenvalues.size(); ++i) {
            const double diff = std::abs(wb.exact_eigenvalues[i] - wb.approx_eigenvalues[i]);
            const double tighter = std::min(wb.bound_with_approx[i], wb.bound_with_exact[i]);
            report.worst_weyl_ratio =
                std::max(report.worst_weyl_ratio, diff / std::max(tighter, 1e-300));
            if (diff > wb.bound_with_approx[i] * (1.0 + 1e-8) + 1e-12 ||
                diff > wb.bound_with_exact[i] * (1.0 + 1e-8) + 1e-12)
                ++report.weyl_violations;
        }
    }
    return report;
}

}  // namespace diffspec
