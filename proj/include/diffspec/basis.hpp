// Cosine approximation spaces V_J on [0,1]: orthonormal values, first and
// second derivatives, antiderivatives, and L2 projections.

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <vector>

namespace diffspec {

// V_J = span{1, sqrt(2) cos(j pi x), 1 <= j <= J}; dimension m = J + 1.
struct BasisSpec {
    enum class Kind { Cosine };

    Kind kind = Kind::Cosine;
    int level = 0;

    int dim() const { return level + 1; }

    static BasisSpec cosine(int level) { return {Kind::Cosine, level}; }
    static BasisSpec with_dim(int m) { return {Kind::Cosine, m - 1}; }
};

// Basis functions tabulated on a grid, one row per function. The derivative
// and antiderivative blocks are empty when built with `basis_values` only.
struct BasisEval {
    std::vector<double> grid;
    Eigen::MatrixXd values;
    Eigen::MatrixXd d1;
    Eigen::MatrixXd d2;
    Eigen::MatrixXd antiderivative;

    Eigen::Index dim() const { return values.rows(); }
};

// Coefficients of an expansion in the orthonormal basis; the Euclidean norm
// of the coefficients equals the L2 norm of the expansion.
struct CoefficientVector {
    Eigen::VectorXd coeffs;

    static CoefficientVector unit(int m, int index) {
        CoefficientVector c;
        c.coeffs = Eigen::VectorXd::Zero(m);
        c.coeffs[index] = 1.0;
        return c;
    }
};

enum class EvalOrder { Value, D1, D2, Antiderivative };

// Full tabulation (values, d1, d2, antiderivatives) on the given grid.
BasisEval eval_basis(const BasisSpec& spec, std::vector<double> grid);

// Values-only tabulation (m x points); the hot path for observation states.
Eigen::MatrixXd basis_values(const BasisSpec& spec, const std::vector<double>& points);

// L2([0,1]) projection by composite Simpson on `quad_points` samples.
CoefficientVector project_function(const std::function<double(double)>& f, const BasisSpec& spec,
                                   std::size_t quad_points = 10001);

// Linear combination of the requested derivative order on the eval grid.
Eigen::VectorXd evaluate_expansion(const CoefficientVector& coeffs, const BasisEval& eval,
                                   EvalOrder order);

}  // namespace diffspec
