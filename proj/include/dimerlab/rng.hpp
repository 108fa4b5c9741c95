#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace dimerlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic, platform-independent RNG (xoshiro256++) with labeled
/// stream splitting: every logical component (dynamics, noise, initial
/// condition, replica k, ...) draws from its own stream derived from the
/// master seed, so replicas are independent and reruns are bitwise equal.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    static Rng labeled(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        std::uint64_t sm = master;
        std::uint64_t mixed = splitmix64(sm) ^ h;
        std::uint64_t sm2 = mixed + 0x632be59bd9b4e019ull * (index + 1);
        return Rng(splitmix64(sm2));
    }

    std::uint64_t next() {
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

    /// Uniform double in [0,1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0,1]; safe as argument of log.
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t x, r;
        do {
            x = next();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    /// Standard normal, Box-Muller (one value per call, no caching so the
    /// stream stays position-independent).
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    bool coin() { return (next() >> 63) != 0; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

} // namespace dimerlab
