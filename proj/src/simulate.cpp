#include "diffspec/simulate.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace diffspec {

namespace {

constexpr std::uint64_t kPathStreamTag = 0x70617468;  // "path"
constexpr std::uint64_t kGapStreamTag = 0x67617073;   // "gaps"

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string SamplingScheme::name() const {
    switch (kind) {
        case Kind::Deterministic: return "deterministic";
        case Kind::UniformOnDoubleDelta: return "uniform";
        case Kind::ScaledBeta: return "beta";
        case Kind::Exponential: return "exponential";
    }
    return "unknown";
}

double fold_into_unit(double x) {
    if (x >= 0.0 && x <= 1.0) return x;
    double t = std::fmod(x, 2.0);
    if (t < 0.0) t += 2.0;
    return t <= 1.0 ? t : 2.0 - t;
}

PathGrid simulate_path(const DiffusionModel& model, double horizon, double step,
                       std::uint64_t seed, const InitialState& init) {
    if (!(step > 0.0)) throw std::invalid_argument("simulate_path: step must be positive");
    if (horizon < 0.0) throw std::invalid_argument("simulate_path: negative horizon");
    model.validate();

    Rng rng(derive_seed(seed, kPathStreamTag));
    const double sqrt_step = std::sqrt(step);

    double x;
    switch (init.law) {
        case InitialState::Law::Fixed:
            x = init.x0;
            if (x < 0.0 || x > 1.0)
                throw std::invalid_argument("simulate_path: fixed x0 outside [0,1]");
            break;
        case InitialState::Law::Stationary: {
            InvariantSampler sampler(model);
            x = sampler.sample(rng);
            break;
        }
        case InitialState::Law::BurnIn: {
            x = init.x0;
            const auto burn_steps =
                static_cast<std::size_t>(std::floor(init.burn_in_horizon / step));
            for (std::size_t k = 0; k < burn_steps; ++k) {
                x = fold_into_unit(x + model.drift(x) * step +
                                   std::sqrt(model.sigma_sq(x)) * sqrt_step * rng.normal());
            }
            break;
        }
        default: x = init.x0; break;
    }

    PathGrid path;
    path.step = step;
    path.horizon = horizon;
    // small slack so horizons that are exact multiples of the step do not
    // lose their last point to roundoff
    const std::size_t n_steps = static_cast<std::size_t>(std::floor(horizon / step + 1e-9));
    path.states.resize(n_steps + 1);
    path.states[0] = x;
    for (std::size_t k = 0; k < n_steps; ++k) {
        x = fold_into_unit(x + model.drift(x) * step +
                           std::sqrt(model.sigma_sq(x)) * sqrt_step * rng.normal());
        if (!std::isfinite(x))
            throw std::runtime_error("simulate_path: non-finite state at step " +
                                     std::to_string(k + 1));
        path.states[k + 1] = x;
    }
    return path;
}

std::vector<double> draw_gaps(const SamplingScheme& scheme, std::size_t n, std::uint64_t seed) {
    if (n == 0) return {};
    if (!(scheme.delta > 0.0)) throw std::invalid_argument("draw_gaps: delta must be positive");

    std::vector<double> gaps(n);
    Rng rng(derive_seed(seed, kGapStreamTag));
    switch (scheme.kind) {
        case SamplingScheme::Kind::Deterministic:
            for (auto& g : gaps) g = scheme.delta;
            break;
        case SamplingScheme::Kind::UniformOnDoubleDelta:
            for (auto& g : gaps) g = 2.0 * scheme.delta * rng.uniform_open();
            break;
        case SamplingScheme::Kind::ScaledBeta:
            for (auto& g : gaps)
                g = 2.0 * scheme.delta * rng.beta(scheme.beta_shape1, scheme.beta_shape2);
            break;
        case SamplingScheme::Kind::Exponential:
            for (auto& g : gaps) g = rng.exponential(1.0 / scheme.delta);
            break;
    }
    return gaps;
}

ObservationSet sample_observations(const PathGrid& path, const SamplingScheme& scheme,
                                   std::size_t n_observations, std::uint64_t seed) {
    return sample_observations(path, draw_gaps(scheme, n_observations, seed));
}

ObservationSet sample_observations(const PathGrid& path, const std::vector<double>& gaps) {
    if (path.states.empty()) throw std::invalid_argument("sample_observations: empty path");

    ObservationSet obs;
    obs.times.reserve(gaps.size() + 1);
    obs.states.reserve(gaps.size() + 1);
    obs.gaps = gaps;

    double t = 0.0;
    obs.times.push_back(0.0);
    obs.states.push_back(path.states.front());
    for (double gap : gaps) {
        if (!(gap > 0.0)) throw std::invalid_argument("sample_observations: non-positive gap");
        t += gap;
        // floor-to-grid; the small slack absorbs roundoff in t/step
        const auto idx = static_cast<std::size_t>(std::floor(t / path.step + 1e-9));
        if (idx >= path.states.size())
            throw std::runtime_error("sample_observations: path horizon " +
                                     std::to_string(path.horizon) + " exhausted; need at least " +
                                     std::to_string(t));
        obs.times.push_back(t);
        obs.states.push_back(path.states[idx]);
    }
    return obs;
}

void write_observations_csv(std::ostream& out, const ObservationSet& obs) {
    out << "tau,x\n";
    for (std::size_t i = 0; i < obs.times.size(); ++i)
        out << format_g17(obs.times[i]) << ',' << format_g17(obs.states[i]) << '\n';
}

ObservationSet read_observations_csv(std::istream& in) {
    ObservationSet obs;
    std::string line;
    if (!std::getline(in, line) || line.rfind("tau,x", 0) != 0)
        throw std::runtime_error("read_observations_csv: missing `tau,x` header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_observations_csv: malformed row: " + line);
        const double t = std::stod(line.substr(0, comma));
        const double x = std::stod(line.substr(comma + 1));
        if (!obs.times.empty()) {
            const double gap = t - obs.times.back();
            if (!(gap > 0.0))
                throw std::runtime_error("read_observations_csv: times not strictly increasing");
            obs.gaps.push_back(gap);
        } else if (t != 0.0) {
            throw std::runtime_error("read_observations_csv: first time must be 0");
        }
        if (x < 0.0 || x > 1.0)
            throw std::runtime_error("read_observations_csv: state outside [0,1]");
        obs.times.push_back(t);
        obs.states.push_back(x);
    }
    if (obs.times.empty()) throw std::runtime_error("read_observations_csv: no data rows");
    return obs;
}

void write_path_binary(std::ostream& out, const PathGrid& path) {
    static_assert(std::endian::native == std::endian::little,
                  "binary path dump assumes a little-endian host");
    const std::uint64_t count = path.states.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(path.states.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace diffspec
