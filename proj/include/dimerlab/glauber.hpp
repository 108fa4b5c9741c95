#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "height.hpp"
#include "rng.hpp"

namespace dimerlab {

/// Allowed interval {lo, hi} for the height at face (m, s) given its six
/// triangular-lattice neighbors; hi - lo is 0 or 1 in a valid configuration
/// and the current value lies inside.
inline std::pair<int64_t, int64_t> flip_bounds(const HeightField& hf, int m, int64_t s) {
    const int64_t up = hf.value(m + 1, s), dn = hf.value(m - 1, s);
    const int64_t rt = hf.value(m, s + 1), lf = hf.value(m, s - 1);
    const int64_t du = hf.value(m + 1, s - 1), dd = hf.value(m - 1, s + 1);
    const int64_t lo = std::max(std::max(std::max(up - 1, dn), std::max(rt, lf - 1)), std::max(du - 1, dd));
    const int64_t hi = std::min(std::min(std::min(up, dn + 1), std::min(rt + 1, lf)), std::min(du, dd + 1));
    return {lo, hi};
}

/// Elementary rotation: move the height at one face by dir = ±1 if the
/// result is still a valid height function.  Returns whether it moved.
inline bool try_flip(HeightField& hf, int m, int64_t s, int dir) {
    const auto [lo, hi] = flip_bounds(hf, m, s);
    const int64_t target = hf.at(m, s) + dir;
    if (target < lo || target > hi) return false;
    hf.at(m, s) = target;
    return true;
}

/// Heat-bath refresh: resample the height at (m, s) uniformly on its allowed
/// interval, using a single uniform.  Monotone in (hf, u) jointly, which
/// makes the shared-randomness grand coupling order-preserving.
inline void heat_bath(HeightField& hf, int m, int64_t s, double u) {
    const auto [lo, hi] = flip_bounds(hf, m, s);
    hf.at(m, s) = (hi > lo && u >= 0.5) ? hi : lo;
}

/// One sweep = L1*L2 uniformly random single-site updates.
inline void glauber_sweep(HeightField& hf, Rng& rng, bool heatbath = true) {
    const auto faces = hf.geom.faces();
    for (int64_t i = 0; i < faces; ++i) {
        const int64_t f = static_cast<int64_t>(rng.below(static_cast<uint64_t>(faces)));
        const int m = static_cast<int>(f / hf.geom.L2);
        const int64_t s = f % hf.geom.L2;
        if (heatbath) {
            heat_bath(hf, m, s, rng.uniform());
        } else {
            const int dir = rng.coin() ? 1 : -1;
            try_flip(hf, m, s, dir);
        }
    }
}

struct Flip {
    int m;
    int64_t s;
    int dir;
};

inline std::vector<Flip> admissible_flips(const HeightField& hf) {
    std::vector<Flip> out;
    for (int m = 0; m < hf.geom.L1; ++m)
        for (int64_t s = 0; s < hf.geom.L2; ++s) {
            const auto [lo, hi] = flip_bounds(hf, m, s);
            const int64_t v = hf.at(m, s);
            if (v - 1 >= lo) out.push_back({m, s, -1});
            if (v + 1 <= hi) out.push_back({m, s, +1});
        }
    return out;
}

/// Particle-level Glauber step: the +1 rotation at face (m, s) moves the
/// particle at level s-1 of column m up by one; the -1 rotation moves the
/// particle at level s down by one.  No-op when inadmissible.
inline bool glauber_step(InterlacedConfig& cfg, int m, int64_t s, int dir) {
    if (dir == +1) {
        const int j = particle_at(cfg, m, s - 1);
        if (j < 0 || up_capacity(cfg, m, j) < 1) return false;
        apply_jump(cfg, m, j, +1);
        return true;
    }
    const int j = particle_at(cfg, m, s);
    if (j < 0 || down_capacity(cfg, m, j) < 1) return false;
    apply_jump(cfg, m, j, -1);
    return true;
}

} // namespace dimerlab
