#pragma once

// Free energy and surface tension of the lozenge dimer model: exact torus
// partition functions via Kasteleyn products, the per-face free energy as a
// weight integral, and the surface tension as its Legendre transform in
// (log a, log b).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerlab/geometry.hpp"

namespace dimerlab {

/// Exact number of lozenge tilings of the L1 x L2 torus (all winding
/// classes) with weights a, b, 1 on the three lozenge types: half the sum
/// of the absolute values of the four Kasteleyn spin-structure products
/// prod_{j,k} (1 + a z_j + b w_k) over shifted roots of unity.  (The sign
/// combination is pinned against exhaustive enumeration in the tests.)
inline double torus_dimer_count(int L1, int L2, double a = 1.0, double b = 1.0) {
    if (L1 < 1 || L2 < 1) throw std::invalid_argument("torus_dimer_count: sizes must be positive");
    const double pi = 3.14159265358979323846;
    double total = 0;
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) {
            std::complex<double> p(1, 0);
            for (int j = 0; j < L1; ++j)
                for (int k = 0; k < L2; ++k)
                    p *= 1.0 + a * std::polar(1.0, 2 * pi * (j + 0.5 * s) / L1) +
                         b * std::polar(1.0, 2 * pi * (k + 0.5 * t) / L2);
            total += std::abs(p.real());
        }
    return 0.5 * total;
}

/// Exact number of tilings of the L1 x L2 torus in the fixed winding class
/// (N particles per column, column wrap K), by a column transfer matrix
/// over occupation bitmasks.  A transfer step from column m to m+1 carries
/// the seam gradient d(m, 0) in {0, 1}; weighting it by a root of unity and
/// averaging over the L1 fluxes projects onto total wrap K.  The per-step
/// validity check replays the gradient recurrence
/// d(s+1) = d(s) + p(s) - p'(s) with d in {0,1} and p + d <= 1.
inline double winding_class_count(int L1, int L2, int N, int K) {
    if (L1 < 1 || L2 < 1 || N < 0 || N > L2 || K < 0 || K > L1)
        throw std::invalid_argument("winding_class_count: bad class parameters");
    if (L2 > 16) throw std::invalid_argument("winding_class_count: L2 > 16 unsupported");
    // K = L1 forces d = 1 on a full row, which excludes every particle; the
    // flux projection below only resolves K mod L1, so settle it here
    if (K == L1 && L1 > 1) return N == 0 ? 1.0 : 0.0;
    std::vector<uint32_t> states;
    for (uint32_t mask = 0; mask < (1u << L2); ++mask)
        if (__builtin_popcount(mask) == N) states.push_back(mask);
    const std::size_t n = states.size();
    auto valid = [&](uint32_t S, uint32_t Sp, int d0) {
        int d = d0;
        for (int s = 0; s < L2; ++s) {
            const int p = (S >> s) & 1, pp = (Sp >> s) & 1;
            if (p + d > 1) return false;
            d += p - pp;
            if (d < 0 || d > 1) return false;
        }
        return true;
    };
    // validity bits per pair: bit 0 for seam gradient 0, bit 1 for 1
    std::vector<uint8_t> vb(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            vb[i * n + j] = static_cast<uint8_t>(valid(states[i], states[j], 0) |
                                                 (valid(states[i], states[j], 1) << 1));
    const double pi = 3.14159265358979323846;
    using cd = std::complex<double>;
    std::vector<cd> T(n * n), P(n * n), tmp(n * n);
    auto matmul = [&](const std::vector<cd>& A, const std::vector<cd>& B, std::vector<cd>& C) {
        std::fill(C.begin(), C.end(), cd{});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const cd a = A[i * n + k];
                if (a == cd{}) continue;
                for (std::size_t j = 0; j < n; ++j) C[i * n + j] += a * B[k * n + j];
            }
    };
    double total = 0;
    // flux g and L1 - g give conjugate traces, so only half are computed
    for (int g = 0; g <= L1 / 2; ++g) {
        const cd q = std::polar(1.0, 2 * pi * g / L1);
        for (std::size_t ij = 0; ij < n * n; ++ij)
            T[ij] = cd(vb[ij] & 1 ? 1.0 : 0.0) + (vb[ij] & 2 ? q : cd{});
        P = T;
        for (int step = 1; step < L1; ++step) {
            matmul(P, T, tmp);
            std::swap(P, tmp);
        }
        cd tr{};
        for (std::size_t i = 0; i < n; ++i) tr += P[i * n + i];
        const double weight = (g == 0 || 2 * g == L1) ? 1.0 : 2.0;
        total += weight * (tr * std::polar(1.0, -2 * pi * g * K / L1)).real();
    }
    return total / L1;
}

/// Per-face free energy F(a, b) = (2pi)^-2 \int\int log|1 + a e^{i th} +
/// b e^{i ph}| dth dph.  The inner integral is closed form,
/// (2pi)^-1 \int log|c + b e^{i ph}| dph = log max(|c|, b), leaving a 1-d
/// quadrature refined by grid doubling until the estimate is stable to
/// 1e-9 (well inside the documented 1e-8 budget); midpoints avoid the
/// logarithmic singularities.
inline double free_energy(double a, double b) {
    if (!(a > 0) || !(b > 0)) throw std::invalid_argument("free_energy: weights must be positive");
    const double pi = 3.14159265358979323846;
    auto integrate = [&](int n) {
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            const double th = 2 * pi * (i + 0.5) / n;
            const double mag = std::hypot(1 + a * std::cos(th), a * std::sin(th));
            acc += std::log(std::max(mag, b));
        }
        return acc / n;
    };
    double prev = integrate(64);
    for (int n = 128; n <= (1 << 22); n *= 2) {
        const double cur = integrate(n);
        if (std::abs(cur - prev) < 1e-9) return cur;
        prev = cur;
    }
    return prev;
}

/// Gradient of F with respect to (log a, log b): the conjugate lozenge
/// densities.  d F / d log b is the angular fraction where b exceeds
/// |1 + a e^{i th}|, which reduces to an arccos; d F / d log a follows from
/// the a <-> b symmetry of F.
inline Slope weight_densities(double a, double b) {
    auto frac = [](double big, double other) {
        // measure{th in [0,pi] : big > |1 + other e^{i th}|} / pi
        const double c = (big * big - 1 - other * other) / (2 * other);
        if (c <= -1) return 0.0;
        if (c >= 1) return 1.0;
        return 1.0 - std::acos(c) / 3.14159265358979323846;
    };
    return {frac(a, b), frac(b, a)};
}

struct SurfaceTension {
    double sigma = 0;          ///< sigma(rho)
    double log_a = 0, log_b = 0; ///< maximizing weights (Legendre point)
    double s11 = 0, s12 = 0, s22 = 0; ///< Hessian of sigma at rho
    double duality_residual = 0;      ///< |weight_densities(a,b) - rho|
};

namespace detail {

/// Solve weight_densities(a, b) = rho for (log a, log b) by damped Newton
/// with a finite-difference Jacobian; tolerance 1e-10 in slope.
inline void solve_weights(const Slope& rho, double& la, double& lb) {
    // initialize by solving the arccos system of weight_densities in closed
    // form (the two conditions cos(pi(1-rho1)) = (a^2-1-b^2)/(2b) and its
    // mirror are satisfied by the sine ratios below); Newton polishes and
    // guards against saturation of the arc fractions
    const double pi = 3.14159265358979323846;
    const double s3 = std::sin(pi * (1 - rho.rho1 - rho.rho2));
    la = std::log(std::sin(pi * rho.rho1) / s3);
    lb = std::log(std::sin(pi * rho.rho2) / s3);
    for (int it = 0; it < 200; ++it) {
        const Slope g = weight_densities(std::exp(la), std::exp(lb));
        const double r1 = g.rho1 - rho.rho1, r2 = g.rho2 - rho.rho2;
        const double res = std::hypot(r1, r2);
        if (res < 1e-12) return;
        const double h = 1e-6;
        const Slope ga = weight_densities(std::exp(la + h), std::exp(lb));
        const Slope gb = weight_densities(std::exp(la), std::exp(lb + h));
        const double j11 = (ga.rho1 - g.rho1) / h, j21 = (ga.rho2 - g.rho2) / h;
        const double j12 = (gb.rho1 - g.rho1) / h, j22 = (gb.rho2 - g.rho2) / h;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14) throw std::runtime_error("surface_tension: singular Jacobian");
        double da = -(j22 * r1 - j12 * r2) / det;
        double db = -(-j21 * r1 + j11 * r2) / det;
        // damping: halve the step until the residual decreases
        double step = 1.0;
        for (int back = 0; back < 40; ++back) {
            const Slope gt = weight_densities(std::exp(la + step * da), std::exp(lb + step * db));
            if (std::hypot(gt.rho1 - rho.rho1, gt.rho2 - rho.rho2) < res) break;
            step *= 0.5;
        }
        la += step * da;
        lb += step * db;
    }
    const Slope g = weight_densities(std::exp(la), std::exp(lb));
    if (std::hypot(g.rho1 - rho.rho1, g.rho2 - rho.rho2) > 1e-10)
        throw std::runtime_error("surface_tension: Newton iteration did not reach 1e-10 in slope");
}

} // namespace detail

/// Surface tension sigma(rho) = sup_{a,b} [rho1 log a + rho2 log b -
/// F(a, b)].  By envelope duality the gradient of sigma is exactly
/// (log a, log b) at the maximizing weights, so the Hessian comes from
/// central finite differences of the gradient (step 1e-3 by default), which
/// avoids amplifying the free-energy quadrature error.  Errors out within
/// 1e-3 of the boundary of the slope triangle, where the conjugate weights
/// diverge.
inline SurfaceTension surface_tension(const Slope& rho, double hessian_step = 2.5e-4) {
    if (!rho.in_interior(1e-3))
        throw std::invalid_argument("surface_tension: slope within 1e-3 of the triangle boundary");
    SurfaceTension out;
    detail::solve_weights(rho, out.log_a, out.log_b);
    const double a = std::exp(out.log_a), b = std::exp(out.log_b);
    out.sigma = rho.rho1 * out.log_a + rho.rho2 * out.log_b - free_energy(a, b);
    const Slope back = weight_densities(a, b);
    out.duality_residual = std::hypot(back.rho1 - rho.rho1, back.rho2 - rho.rho2);
    const double h = hessian_step;
    auto grad = [&](double d1, double d2) {
        double la, lb;
        detail::solve_weights({rho.rho1 + d1, rho.rho2 + d2}, la, lb);
        return std::pair<double, double>{la, lb};
    };
    const auto [la_p1, lb_p1] = grad(h, 0);
    const auto [la_m1, lb_m1] = grad(-h, 0);
    const auto [la_p2, lb_p2] = grad(0, h);
    const auto [la_m2, lb_m2] = grad(0, -h);
    out.s11 = (la_p1 - la_m1) / (2 * h);
    out.s22 = (lb_p2 - lb_m2) / (2 * h);
    // the mixed derivative twice, symmetrized
    out.s12 = ((la_p2 - la_m2) / (2 * h) + (lb_p1 - lb_m1) / (2 * h)) / 2;
    return out;
}

struct SurfaceTensionTable {
    int n = 0;             ///< grid points per axis
    double margin = 0;     ///< distance of the grid from the triangle boundary
    std::vector<Slope> grid;              ///< row-major (i * n + j)
    std::vector<double> sigma;            ///< per grid point
    std::vector<std::array<double, 2>> sigma_i;  ///< gradient {log a, log b}
    std::vector<std::array<double, 3>> sigma_ij; ///< {s11, s12, s22}
};

/// Tabulate sigma and its Hessian on an n x n grid of the dilated simplex
/// {rho : rho_i >= margin, rho1 + rho2 <= 1 - margin}.  Points outside the
/// triangle keep quiet NaNs so the table stays rectangular.
inline SurfaceTensionTable build_surface_tension_table(int n, double margin = 0.02) {
    if (n < 2) throw std::invalid_argument("build_surface_tension_table: need n >= 2");
    SurfaceTensionTable tab;
    tab.n = n;
    tab.margin = margin;
    const double nan = std::nan("");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Slope rho{margin + (1 - 2 * margin) * i / (n - 1.0),
                            margin + (1 - 2 * margin) * j / (n - 1.0)};
            tab.grid.push_back(rho);
            if (rho.rho1 + rho.rho2 <= 1 - margin) {
                const auto st = surface_tension(rho);
                tab.sigma.push_back(st.sigma);
                tab.sigma_i.push_back({st.log_a, st.log_b});
                tab.sigma_ij.push_back({st.s11, st.s12, st.s22});
            } else {
                tab.sigma.push_back(nan);
                tab.sigma_i.push_back({nan, nan});
                tab.sigma_ij.push_back({nan, nan, nan});
            }
        }
    return tab;
}

} // namespace dimerlab
