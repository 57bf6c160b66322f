// Empirical Gram and transition matrices, the generalized symmetric
// eigenvalue problem behind them, and a posteriori error bounds for its
// eigenpairs.

#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "diffspec/basis.hpp"
#include "diffspec/simulate.hpp"

namespace diffspec {

class not_positive_definite_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Empirical Gram matrix: trapezoid-weighted second moments of the basis at
// the observed states. Symmetric positive semidefinite by construction.
struct GramMatrix {
    Eigen::MatrixXd entries;
};

// Symmetrized lag-one cross moments; unbiased for the action of the
// generalized transition operator on the basis.
struct TransitionMatrix {
    Eigen::MatrixXd entries;
};

// All eigenpairs of A x = lambda B x, eigenvalues sorted decreasingly.
// Columns of `eigenvectors` are B-orthogonal, rescaled to unit Euclidean
// norm.
struct GsepSolution {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    double b_condition = 0.0;
};

// First nontrivial eigenpair estimate. An invalid pair encodes the
// exceptional event as kappa = 0 with the constant eigenfunction.
struct PrincipalPair {
    double kappa = 0.0;
    CoefficientVector coeffs;
    bool valid = false;

    static PrincipalPair invalid_pair(int m) {
        PrincipalPair p;
        p.coeffs = CoefficientVector::unit(m, 0);
        return p;
    }
};

struct ResidualBounds {
    double eigenvalue_bound = 0.0;
    double eigenvector_bound = 0.0;
    double residual_norm = 0.0;
    double localizing_distance = 0.0;
};

// Two-sided per-index eigenvalue bounds |lambda_i - lambda~_i|.
struct WeylBounds {
    Eigen::VectorXd exact_eigenvalues;   // of (A, B), sorted decreasingly
    Eigen::VectorXd approx_eigenvalues;  // of (A~, B~), sorted decreasingly
    Eigen::VectorXd bound_with_approx;   // ||B~^-1|| ||dA - lambda_i dB||
    Eigen::VectorXd bound_with_exact;    // ||B^-1||  ||dA - lambda~_i dB||
};

GramMatrix gram_matrix(const ObservationSet& obs, const BasisEval& eval_at_states);

TransitionMatrix transition_matrix(const ObservationSet& obs, const BasisEval& eval_at_states);

// Cholesky reduction B = L L^T to a standard symmetric problem for
// L^-1 A L^-T. Throws not_positive_definite_error when B is not PD.
GsepSolution solve_gsep(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Largest eigenvalue strictly below 1 - tol with its eigenvector, sign-fixed
// so the expansion increases across [a,b]. Failures come back as an invalid
// pair, never as an exception.
PrincipalPair select_principal_pair(const GsepSolution& sol, const BasisEval& grid_eval,
                                    double a, double b, double tol = 1e-8);

// A posteriori bounds for an approximate eigenpair (lambda~, x~) of the
// perturbed problem (A~, B~) against the exact problem (A, B). The
// localizing distance is taken from the exact spectrum.
ResidualBounds residual_bounds(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& A_tilde, const Eigen::MatrixXd& B_tilde,
                               double lambda_tilde, const Eigen::VectorXd& x_tilde);

WeylBounds weyl_bound(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& A_tilde, const Eigen::MatrixXd& B_tilde);

}  // namespace diffspec
