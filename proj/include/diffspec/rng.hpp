// Deterministic random number generation for simulation and sampling.
//
// Hand-rolled xoshiro256++ plus the handful of variate transforms the
// simulator needs. std:: distributions are implementation-defined, which
// would make seeded runs non-reproducible across standard libraries; the
// generators here are fully specified, so a seed pins the whole experiment.

#pragma once

#include <cmath>
#include <cstdint>

namespace diffspec {

// splitmix64; used to expand seeds and derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives a stream seed from a base seed and a tag. Tags keep the path
// noise and the sampling gaps on provably distinct streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t s = base ^ (0xD1B54A32D192ED03ull * (tag + 1));
    splitmix64(s);
    return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t t1, std::uint64_t t2) {
    return derive_seed(derive_seed(base, t1), t2);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t t1, std::uint64_t t2,
                                 std::uint64_t t3) {
    return derive_seed(derive_seed(base, t1, t2), t3);
}

// xoshiro256++ with a Marsaglia polar normal source on top.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0,1); never returns an exact endpoint.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the polar method; pairs are cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

    // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_open(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Beta(a, b) as a ratio of gammas; exact for shapes below one.
    double beta(double a, double b) {
        for (;;) {
            const double ga = gamma(a);
            const double gb = gamma(b);
            const double sum = ga + gb;
            if (sum <= 0.0) continue;
            const double r = ga / sum;
            if (r > 0.0 && r < 1.0) return r;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace diffspec
