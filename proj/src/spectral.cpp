#include "diffspec/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace diffspec {

namespace {

// Accumulates sum_n w_n psi(x_n) psi(x_n)^T over the lower triangle with a
// fixed summation order, so the top-left block is bit-identical for every
// basis dimension sharing the same states.
Eigen::MatrixXd weighted_outer_sum(const Eigen::MatrixXd& values,
                                   const std::vector<double>& weights) {
    const Eigen::Index m = values.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index n = 0; n < values.cols(); ++n) {
        const double w = weights[static_cast<std::size_t>(n)];
        for (Eigen::Index j = 0; j < m; ++j) {
            const double wj = w * values(j, n);
            for (Eigen::Index i = j; i < m; ++i) out(i, j) += wj * values(i, n);
        }
    }
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
}

double spectral_norm(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ||B^-1|| and condition number of an SPD matrix; throws when not PD.
std::pair<double, double> inverse_norm_and_condition(const Eigen::MatrixXd& B,
                                                     const char* who) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw not_positive_definite_error(std::string(who) + ": B not positive definite");
    return {1.0 / lo, hi / lo};
}

}  // namespace

GramMatrix gram_matrix(const ObservationSet& obs, const BasisEval& eval_at_states) {
    const std::size_t n = obs.n_transitions();
    if (n < 1) throw std::invalid_argument("gram_matrix: need at least one transition");
    if (eval_at_states.values.cols() != static_cast<Eigen::Index>(obs.states.size()))
        throw std::invalid_argument("gram_matrix: eval/states size mismatch");

    std::vector<double> weights(obs.states.size(), 1.0 / static_cast<double>(n));
    weights.front() *= 0.5;
    weights.back() *= 0.5;
    return GramMatrix{weighted_outer_sum(eval_at_states.values, weights)};
}

TransitionMatrix transition_matrix(const ObservationSet& obs, const BasisEval& eval_at_states) {
    const std::size_t n = obs.n_transitions();
    if (n < 1) throw std::invalid_argument("transition_matrix: need at least one transition");
    const Eigen::MatrixXd& values = eval_at_states.values;
    if (values.cols() != static_cast<Eigen::Index>(obs.states.size()))
        throw std::invalid_argument("transition_matrix: eval/states size mismatch");

    const Eigen::Index m = values.rows();
    const double w = 1.0 / (2.0 * static_cast<double>(n));
    Eigen::MatrixXd half = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < n; ++k) {
        const auto cur = static_cast<Eigen::Index>(k);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double vj = w * values(j, cur);
            for (Eigen::Index i = 0; i < m; ++i) half(i, j) += values(i, cur + 1) * vj;
        }
    }
    Eigen::MatrixXd sym = half + half.transpose();
    return TransitionMatrix{std::move(sym)};
}

GsepSolution solve_gsep(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
        throw std::invalid_argument("solve_gsep: dimension mismatch");
    const Eigen::Index m = A.rows();

    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success)
        throw not_positive_definite_error("solve_gsep: Cholesky of B failed");
    const Eigen::MatrixXd L = llt.matrixL();

    // reduce to the standard problem for L^-1 A L^-T
    Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(A);
    C = L.triangularView<Eigen::Lower>().solve(C.transpose().eval());
    C = 0.5 * (C + C.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw std::runtime_error("solve_gsep: eigensolve failed");

    GsepSolution sol;
    sol.eigenvalues.resize(m);
    sol.eigenvectors.resize(m, m);
    // back-substitute and flip to decreasing order
    const Eigen::MatrixXd X = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
    for (Eigen::Index i = 0; i < m; ++i) {
        sol.eigenvalues[i] = es.eigenvalues()[m - 1 - i];
        sol.eigenvectors.col(i) = X.col(m - 1 - i).normalized();
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(B, Eigen::EigenvaluesOnly);
    sol.b_condition = esb.eigenvalues().maxCoeff() / esb.eigenvalues().minCoeff();
    return sol;
}

PrincipalPair select_principal_pair(const GsepSolution& sol, const BasisEval& grid_eval,
                                    double a, double b, double tol) {
    const Eigen::Index m = sol.eigenvalues.size();
    if (grid_eval.values.rows() < m)
        throw std::invalid_argument("select_principal_pair: basis tabulation too small");
    for (Eigen::Index i = 0; i < m; ++i) {
        const double lambda = sol.eigenvalues[i];
        if (lambda >= 1.0 - tol) continue;  // trivial eigenvalue(s)
        if (lambda <= 0.0) break;           // nothing usable further down
        PrincipalPair pair;
        pair.kappa = lambda;
        pair.coeffs.coeffs = sol.eigenvectors.col(i);
        pair.valid = true;

        // sign convention: the eigenfunction increases across [a,b]
        const Eigen::VectorXd values =
            grid_eval.values.topRows(m).transpose() * pair.coeffs.coeffs;
        double at_a = values[0];
        double at_b = values[values.size() - 1];
        for (std::size_t k = 0; k < grid_eval.grid.size(); ++k) {
            if (grid_eval.grid[k] <= a) at_a = values[static_cast<Eigen::Index>(k)];
            if (grid_eval.grid[k] <= b) at_b = values[static_cast<Eigen::Index>(k)];
        }
        if (at_b - at_a < 0.0) pair.coeffs.coeffs = -pair.coeffs.coeffs;
        return pair;
    }
    return PrincipalPair::invalid_pair(static_cast<int>(m));
}

ResidualBounds residual_bounds(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& A_tilde, const Eigen::MatrixXd& B_tilde,
                               double lambda_tilde, const Eigen::VectorXd& x_tilde) {
    const auto [b_inv_norm, b_cond] = inverse_norm_and_condition(B, "residual_bounds");

    const Eigen::VectorXd r =
        (A - A_tilde) * x_tilde + lambda_tilde * ((B_tilde - B) * x_tilde);

    ResidualBounds out;
    out.residual_norm = r.norm();
    out.eigenvalue_bound = b_inv_norm * out.residual_norm;

    // localizing distance from the exact spectrum
    const GsepSolution exact = solve_gsep(A, B);
    Eigen::Index closest = 0;
    (exact.eigenvalues.array() - lambda_tilde).abs().minCoeff(&closest);
    double delta = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < exact.eigenvalues.size(); ++j) {
        if (j == closest) continue;
        delta = std::min(delta, std::abs(exact.eigenvalues[j] - lambda_tilde));
    }
    out.localizing_distance = delta;
    out.eigenvector_bound = std::isfinite(delta) && delta > 0.0
                                ? 2.0 * std::sqrt(2.0 * b_cond) / delta * out.eigenvalue_bound
                                : std::numeric_limits<double>::infinity();
    return out;
}

WeylBounds weyl_bound(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& A_tilde, const Eigen::MatrixXd& B_tilde) {
    const double b_inv_norm = inverse_norm_and_condition(B, "weyl_bound").first;
    const double bt_inv_norm = inverse_norm_and_condition(B_tilde, "weyl_bound").first;

    WeylBounds out;
    out.exact_eigenvalues = solve_gsep(A, B).eigenvalues;
    out.approx_eigenvalues = solve_gsep(A_tilde, B_tilde).eigenvalues;

    const Eigen::MatrixXd dA = A - A_tilde;
    const Eigen::MatrixXd dB = B - B_tilde;
    const Eigen::Index m = A.rows();
    out.bound_with_approx.resize(m);
    out.bound_with_exact.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out.bound_with_approx[i] =
            bt_inv_norm * spectral_norm(dA - out.exact_eigenvalues[i] * dB);
        out.bound_with_exact[i] =
            b_inv_norm * spectral_norm(dA - out.approx_eigenvalues[i] * dB);
    }
    return out;
}

}  // namespace diffspec
