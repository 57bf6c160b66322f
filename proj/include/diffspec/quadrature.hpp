// Composite quadrature helpers shared across the library.
//
// Everything operates on uniformly spaced samples. Composite Simpson is the
// workhorse; the cumulative integrator upgrades the running trapezoid with a
// three-point parabolic correction so it keeps Simpson-order accuracy at
// every grid point, not just the even ones.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace diffspec {

// n evenly spaced points from a to b inclusive; n == 1 returns {a}.
std::vector<double> linspace(double a, double b, std::size_t n);

// Integral of uniformly spaced samples with spacing h. Composite Simpson on
// even subinterval counts; an odd count gets a parabolic rule on the last
// subinterval.
double integrate(std::span<const double> f, double h);

// F[k] = integral of f over [x0, x_k]; F[0] = 0. Same order as `integrate`.
std::vector<double> cumulative_integral(std::span<const double> f, double h);

// sqrt of the integral of f^2.
double l2_norm(std::span<const double> f, double h);

// sqrt of the integral of (f - g)^2; sizes must match.
double l2_distance_sampled(std::span<const double> f, std::span<const double> g, double h);

}  // namespace diffspec
