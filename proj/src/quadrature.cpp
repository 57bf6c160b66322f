#include "diffspec/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace diffspec {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    if (n == 1) {
        x[0] = a;
        return x;
    }
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + h * static_cast<double>(i);
    x[n - 1] = b;
    return x;
}

double integrate(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n == 0) throw std::invalid_argument("integrate: empty sample");
    if (n == 1) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);

    const std::size_t intervals = n - 1;
    const std::size_t pairs = intervals / 2;
    double sum = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t k = 2 * p;
        sum += f[k] + 4.0 * f[k + 1] + f[k + 2];
    }
    sum *= h / 3.0;
    if (intervals % 2 != 0) {
        // last subinterval: integrate the parabola through the final three points
        sum += h * (-f[n - 3] + 8.0 * f[n - 2] + 5.0 * f[n - 1]) / 12.0;
    }
    return sum;
}

std::vector<double> cumulative_integral(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> acc(n, 0.0);
    if (n < 2) return acc;
    if (n == 2) {
        acc[1] = 0.5 * h * (f[0] + f[1]);
        return acc;
    }
    // first subinterval from the parabola through the first three points
    acc[1] = h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
    for (std::size_t k = 2; k < n; ++k) {
        acc[k] = acc[k - 1] + h * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]) / 12.0;
    }
    return acc;
}

double l2_norm(std::span<const double> f, double h) {
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
    return std::sqrt(std::max(0.0, integrate(sq, h)));
}

double l2_distance_sampled(std::span<const double> f, std::span<const double> g, double h) {
    if (f.size() != g.size()) throw std::invalid_argument("l2_distance_sampled: size mismatch");
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f[i] - g[i];
        sq[i] = d * d;
    }
    return std::sqrt(std::max(0.0, integrate(sq, h)));
}

}  // namespace diffspec
