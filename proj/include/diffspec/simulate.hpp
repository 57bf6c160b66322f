// Reflected Euler-Maruyama simulation on [0,1] and subsampling at random
// observation times.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "diffspec/diffusion.hpp"

namespace diffspec {

// Law of the i.i.d. waiting times between observations. Every variant has
// mean gap `delta` and draws strictly positive values.
struct SamplingScheme {
    enum class Kind { Deterministic, UniformOnDoubleDelta, ScaledBeta, Exponential };

    Kind kind = Kind::Deterministic;
    double delta = 0.25;
    double beta_shape1 = 0.2;
    double beta_shape2 = 0.2;

    static SamplingScheme deterministic(double delta) { return {Kind::Deterministic, delta}; }
    static SamplingScheme uniform(double delta) { return {Kind::UniformOnDoubleDelta, delta}; }
    static SamplingScheme scaled_beta(double delta, double s1 = 0.2, double s2 = 0.2) {
        return {Kind::ScaledBeta, delta, s1, s2};
    }
    static SamplingScheme exponential(double delta) { return {Kind::Exponential, delta}; }

    double mean_gap() const { return delta; }
    std::string name() const;
};

// Fine Euler grid of the simulated path; states[k] lives at time k*step.
struct PathGrid {
    double step = 0.0;
    double horizon = 0.0;
    std::vector<double> states;
};

// Observed data: times[0] = 0 and states.size() == times.size() == gaps.size()+1.
struct ObservationSet {
    std::vector<double> times;
    std::vector<double> states;
    std::vector<double> gaps;

    std::size_t n_transitions() const { return gaps.size(); }
};

// How the initial state is drawn. Stationary start is the default; the
// burn-in fallback serves models where the stationary density is awkward.
struct InitialState {
    enum class Law { Stationary, Fixed, BurnIn };
    Law law = Law::Stationary;
    double x0 = 0.5;
    double burn_in_horizon = 10.0;

    static InitialState stationary() { return {}; }
    static InitialState fixed(double x0) { return {Law::Fixed, x0, 0.0}; }
    static InitialState burn_in(double horizon = 10.0) { return {Law::BurnIn, 0.5, horizon}; }
};

// Image of x under repeated reflection at 0 and 1 (2-periodic triangle map);
// identity on [0,1].
double fold_into_unit(double x);

// Euler-Maruyama with reflection after each step. Deterministic given seed.
// Throws simulation_error (with the step index in the message) if a state
// turns non-finite.
PathGrid simulate_path(const DiffusionModel& model, double horizon, double step,
                       std::uint64_t seed, const InitialState& init = InitialState::stationary());

// n i.i.d. waiting times from the scheme. Deterministic given seed.
std::vector<double> draw_gaps(const SamplingScheme& scheme, std::size_t n, std::uint64_t seed);

// Reads the path at the cumulative gap times (floor-to-grid). The gap seed
// must be independent of the path seed. Throws if the path horizon is
// exhausted before N observations.
ObservationSet sample_observations(const PathGrid& path, const SamplingScheme& scheme,
                                   std::size_t n_observations, std::uint64_t seed);

// Same extraction with externally drawn gaps.
ObservationSet sample_observations(const PathGrid& path, const std::vector<double>& gaps);

// CSV with header `tau,x`, full double precision.
void write_observations_csv(std::ostream& out, const ObservationSet& obs);
ObservationSet read_observations_csv(std::istream& in);

// 8-byte little-endian count followed by the states as little-endian doubles.
void write_path_binary(std::ostream& out, const PathGrid& path);

}  // namespace diffspec
