#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "interlaced.hpp"

namespace dimerlab {

/// Height function sampled on the fundamental domain of the torus, one value
/// per face (m, s), row-major.  Outside the domain the field continues by
///   h(m, s + L2) = h(m, s) - N        (vertical winding, fixed by geometry)
///   h(m + L1, s) = h(m, s) + col_wrap (horizontal winding K)
struct HeightField {
    TorusGeometry geom;
    std::vector<int64_t> h; ///< h[m*L2 + s]
    int64_t col_wrap = 0;

    int64_t& at(int m, int64_t s) { return h[static_cast<std::size_t>(m * geom.L2 + s)]; }
    int64_t at(int m, int64_t s) const { return h[static_cast<std::size_t>(m * geom.L2 + s)]; }

    /// Value at arbitrary (m, s), applying both windings.
    int64_t value(int64_t m, int64_t s) const {
        const int64_t km = detail::floor_div(m, geom.L1);
        const int64_t ks = detail::floor_div(s, geom.L2);
        return at(static_cast<int>(m - km * geom.L1), s - ks * geom.L2) + km * col_wrap - ks * geom.N;
    }

    /// Average gradient implied by the windings, in slope-triangle
    /// coordinates: rho1 = K/L1 is the density of the column-step lozenge
    /// and rho2 = 1 - N/L2 - K/L1 the density of the third type; the
    /// horizontal-lozenge (particle) density N/L2 is 1 - rho1 - rho2.
    Slope slope() const {
        const double r1 = static_cast<double>(col_wrap) / static_cast<double>(geom.L1);
        return {r1, 1.0 - static_cast<double>(geom.N) / static_cast<double>(geom.L2) - r1};
    }
};

inline HeightField particles_to_height(const InterlacedConfig& cfg) {
    if (auto v = validate(cfg); !v.empty()) throw std::runtime_error("particles_to_height: " + v.front().what);
    HeightField hf;
    hf.geom = cfg.geom;
    hf.col_wrap = cfg.col_wrap;
    hf.h.resize(static_cast<std::size_t>(cfg.geom.L1 * cfg.geom.L2));
    for (int m = 0; m < cfg.geom.L1; ++m)
        for (int64_t s = 0; s < cfg.geom.L2; ++s) hf.at(m, s) = face_height(cfg, m, s);
    return hf;
}

/// Check the two gradient families; returns an empty string or a description
/// of the first offending edge.
inline std::string height_gradient_violation(const HeightField& hf) {
    const auto& g = hf.geom;
    for (int m = 0; m < g.L1; ++m)
        for (int64_t s = 0; s < g.L2; ++s) {
            const int64_t p = hf.value(m, s) - hf.value(m, s + 1);
            if (p != 0 && p != 1)
                return "vertical edge at (m=" + std::to_string(m) + ", s=" + std::to_string(s) +
                       "): step " + std::to_string(p) + " not in {0,1}";
            const int64_t d = hf.value(m + 1, s) - hf.value(m, s);
            if (d != 0 && d != 1)
                return "horizontal edge at (m=" + std::to_string(m) + ", s=" + std::to_string(s) +
                       "): step " + std::to_string(d) + " not in {0,1}";
            const int64_t t = hf.value(m + 1, s) - hf.value(m, s + 1);
            if (t != 0 && t != 1)
                return "diagonal edge at (m=" + std::to_string(m) + ", s=" + std::to_string(s) +
                       "): step " + std::to_string(t) + " not in {0,1}";
        }
    return {};
}

inline InterlacedConfig height_to_particles(const HeightField& hf) {
    if (auto err = height_gradient_violation(hf); !err.empty())
        throw std::runtime_error("height_to_particles: " + err);
    const auto& g = hf.geom;
    InterlacedConfig cfg;
    cfg.geom = g;
    cfg.col_wrap = hf.col_wrap;
    cfg.height_offset = hf.at(0, 0);
    cfg.pos.assign(static_cast<std::size_t>(g.L1), {});
    for (int m = 0; m < g.L1; ++m) {
        // residues carrying a particle: levels where h(m,s) - h(m,s+1) = 1
        std::vector<int64_t> res;
        res.reserve(static_cast<std::size_t>(g.N));
        for (int64_t s = 0; s < g.L2; ++s)
            if (hf.value(m, s) - hf.value(m, s + 1) == 1) res.push_back(s);
        if (static_cast<int>(res.size()) != g.N)
            throw std::runtime_error("height_to_particles: column " + std::to_string(m) + " has " +
                                     std::to_string(res.size()) + " particles, expected " + std::to_string(g.N));
        // the first extended particle >= 0 is res[0]; its extended index i0
        // follows from h(m,0) = offset - i0
        const int64_t i0 = cfg.height_offset - hf.at(m, 0);
        auto& col = cfg.pos[static_cast<std::size_t>(m)];
        col.resize(static_cast<std::size_t>(g.N));
        for (int64_t k = 0; k < g.N; ++k) {
            const int64_t idx = i0 + k;
            const int64_t shift = detail::floor_div(idx, g.N);
            col[static_cast<std::size_t>(idx - shift * g.N)] = res[static_cast<std::size_t>(k)] - shift * g.L2;
        }
    }
    return cfg;
}

/// Deterministic quasi-periodic configuration of slope rho on the given
/// torus: h(m,s) = floor(K m / L1 - N s / L2) with N, K the nearest winding
/// integers.  The joint floor keeps the two columnsets staggered (a separable
/// floor would align all columns and jam the growth dynamics).
inline InterlacedConfig make_flat(Slope rho, const TorusGeometry& g) {
    rho.require_interior("make_flat");
    // rho1 is the column-winding density K/L1; the particle density N/L2 is
    // the complementary 1 - rho1 - rho2.
    const int64_t N = std::llround((1.0 - rho.rho1 - rho.rho2) * g.L2);
    const int64_t K = std::llround(rho.rho1 * g.L1);
    if (N < 1 || N >= g.L2 || K < 0 || K > g.L1)
        throw std::invalid_argument("make_flat: slope not representable on this torus");
    HeightField hf;
    hf.geom = g;
    hf.geom.N = static_cast<int>(N);
    hf.col_wrap = K;
    hf.h.resize(static_cast<std::size_t>(g.L1 * g.L2));
    for (int m = 0; m < g.L1; ++m)
        for (int64_t s = 0; s < g.L2; ++s)
            hf.at(m, s) = detail::floor_div(K * m * g.L2 - N * s * g.L1, static_cast<int64_t>(g.L1) * g.L2);
    return height_to_particles(hf);
}

/// Discretize a macroscopic profile phi0 at lattice spacing epsilon = 1/L on
/// an L x L torus.  The continuum point of face (m, s) is
/// (x1, x2) = ((m + s)/L, s/L) and the profile relates to the lattice
/// height through phi0(x) = epsilon h(m, s) + x2, so discrete gradients map
/// to slope-triangle coordinates: d1 phi is the column-step lozenge density
/// and d2 phi the third-type density, matching HeightField::slope.
/// phi0 must satisfy the winding identities
/// phi0(x1 + 1, x2) = phi0(x) + rho1 and
/// phi0(x1 + 1, x2 + 1) = phi0(x) + rho1 + rho2 with rho_i * L integer
/// (affine plus 1-periodic profiles qualify); gradients leaving the
/// admissible triangle surface as gradient violations reported with their
/// location.
template <class Phi>
inline InterlacedConfig profile_initial(Phi&& phi0, double epsilon) {
    const int L = static_cast<int>(std::llround(1.0 / epsilon));
    if (L < 2 || std::abs(1.0 / epsilon - L) > 1e-9)
        throw std::invalid_argument("profile_initial: epsilon must be 1/L for integer L >= 2");
    const double f00 = phi0(0.0, 0.0);
    const double Kr = (phi0(1.0, 0.0) - f00) * L;
    const double Mr = (phi0(1.0, 1.0) - f00) * L - Kr;
    const int64_t K = std::llround(Kr), M = std::llround(Mr);
    if (std::abs(Kr - K) > 1e-6 || std::abs(Mr - M) > 1e-6)
        throw std::invalid_argument("profile_initial: phi0 windings are not integer multiples of epsilon");
    const int64_t N = L - K - M;
    if (N < 1 || N >= L || K < 0 || M < 0)
        throw std::invalid_argument("profile_initial: mean slope not in the interior");
    HeightField hf;
    hf.geom = TorusGeometry{L, L, static_cast<int>(N)};
    hf.col_wrap = K;
    hf.h.resize(static_cast<std::size_t>(L) * L);
    for (int m = 0; m < L; ++m)
        for (int64_t s = 0; s < L; ++s)
            // h = (phi0 - x2) / epsilon; the nudge guards against values an
            // ulp below an exact integer (exact for affine data, immaterial
            // for smooth profiles)
            hf.at(m, s) = static_cast<int64_t>(
                std::floor(phi0(static_cast<double>(m + s) * epsilon,
                                static_cast<double>(s) * epsilon) * L -
                           static_cast<double>(s) + 1e-9));
    if (auto err = height_gradient_violation(hf); !err.empty())
        throw std::invalid_argument("profile_initial: gradient of phi0 leaves the admissible triangle: " + err);
    return height_to_particles(hf);
}

/// Literal average of the discrete gradients (coincides with the winding
/// slope, but computed the long way round as an independent check).
inline Slope measured_slope(const HeightField& hf) {
    const auto& g = hf.geom;
    int64_t sp = 0, sd = 0;
    for (int m = 0; m < g.L1; ++m)
        for (int64_t s = 0; s < g.L2; ++s) {
            sp += hf.value(m, s) - hf.value(m, s + 1);
            sd += hf.value(m + 1, s) - hf.value(m, s);
        }
    const double faces = static_cast<double>(g.L1) * static_cast<double>(g.L2);
    const double r1 = static_cast<double>(sd) / faces;
    return {r1, 1.0 - r1 - static_cast<double>(sp) / faces};
}

} // namespace dimerlab
