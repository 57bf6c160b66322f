#include "diffspec/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "diffspec/quadrature.hpp"

namespace diffspec {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;

}  // namespace

Eigen::MatrixXd basis_values(const BasisSpec& spec, const std::vector<double>& points) {
    const int m = spec.dim();
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd values(m, n);
    // cos(j pi x) via the Chebyshev recurrence: one cosine per point.
    for (Eigen::Index k = 0; k < n; ++k) {
        const double c = std::cos(kPi * points[static_cast<std::size_t>(k)]);
        values(0, k) = 1.0;
        double prev = 1.0;   // cos(0)
        double curr = c;     // cos(pi x)
        for (int j = 1; j < m; ++j) {
            values(j, k) = kSqrt2 * curr;
            const double next = 2.0 * c * curr - prev;
            prev = curr;
            curr = next;
        }
    }
    return values;
}

BasisEval eval_basis(const BasisSpec& spec, std::vector<double> grid) {
    const int m = spec.dim();
    const auto n = static_cast<Eigen::Index>(grid.size());

    BasisEval eval;
    eval.values.resize(m, n);
    eval.d1.resize(m, n);
    eval.d2.resize(m, n);
    eval.antiderivative.resize(m, n);

    for (Eigen::Index k = 0; k < n; ++k) {
        const double x = grid[static_cast<std::size_t>(k)];
        eval.values(0, k) = 1.0;
        eval.d1(0, k) = 0.0;
        eval.d2(0, k) = 0.0;
        eval.antiderivative(0, k) = x;
        for (int j = 1; j < m; ++j) {
            const double w = static_cast<double>(j) * kPi;
            const double c = std::cos(w * x);
            const double s = std::sin(w * x);
            eval.values(j, k) = kSqrt2 * c;
            eval.d1(j, k) = -kSqrt2 * w * s;
            eval.d2(j, k) = -kSqrt2 * w * w * c;
            eval.antiderivative(j, k) = kSqrt2 * s / w;
        }
    }
    eval.grid = std::move(grid);
    return eval;
}

CoefficientVector project_function(const std::function<double(double)>& f, const BasisSpec& spec,
                                   std::size_t quad_points) {
    if (quad_points < 3 || quad_points % 2 == 0)
        throw std::invalid_argument("project_function: need an odd point count >= 3");
    const auto grid = linspace(0.0, 1.0, quad_points);
    const double h = grid[1] - grid[0];
    const auto values = basis_values(spec, grid);

    std::vector<double> fs(quad_points);
    for (std::size_t k = 0; k < quad_points; ++k) fs[k] = f(grid[k]);

    std::vector<double> samples(quad_points);
    CoefficientVector out;
    out.coeffs.resize(spec.dim());
    for (int j = 0; j < spec.dim(); ++j) {
        for (std::size_t k = 0; k < quad_points; ++k)
            samples[k] = fs[k] * values(j, static_cast<Eigen::Index>(k));
        out.coeffs[j] = integrate(samples, h);
    }
    return out;
}

Eigen::VectorXd evaluate_expansion(const CoefficientVector& coeffs, const BasisEval& eval,
                                   EvalOrder order) {
    const Eigen::MatrixXd* block = nullptr;
    switch (order) {
        case EvalOrder::Value: block = &eval.values; break;
        case EvalOrder::D1: block = &eval.d1; break;
        case EvalOrder::D2: block = &eval.d2; break;
        case EvalOrder::Antiderivative: block = &eval.antiderivative; break;
    }
    if (coeffs.coeffs.size() != block->rows())
        throw std::invalid_argument("evaluate_expansion: coefficient/basis dimension mismatch");
    return block->transpose() * coeffs.coeffs;
}

}  // namespace diffspec
