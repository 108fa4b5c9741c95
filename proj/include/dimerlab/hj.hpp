#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "geometry.hpp"

namespace dimerlab {

/// Hamiltonian of the growth PDE  d_t phi = H(grad phi), as a function of
/// the two gradient components.
using Hamiltonian = std::function<double(double, double)>;

/// The growth speed as a Hamiltonian, with gradients projected onto the
/// slope triangle dilated by `margin` (the speed diverges on the hypotenuse
/// and the scheme evaluates it at intermediate one-sided gradients, so a
/// hard clamp keeps the numerics defined; solutions whose gradients stay
/// inside the margin never see the clamp).
inline Hamiltonian speed_hamiltonian(double margin = 0.02) {
    return [margin](double p1, double p2) {
        double r1 = std::clamp(p1, margin, 1.0 - 2 * margin);
        double r2 = std::clamp(p2, margin, 1.0 - 2 * margin);
        if (r1 + r2 > 1.0 - margin) {
            const double excess = (r1 + r2 - (1.0 - margin)) / 2;
            r1 = std::max(margin, r1 - excess);
            r2 = std::max(margin, r2 - excess);
            if (r1 + r2 > 1.0 - margin) {
                const double scale = (1.0 - margin - margin) / (r1 + r2 - 2 * margin);
                r1 = margin + (r1 - margin) * scale;
                r2 = margin + (r2 - margin) * scale;
            }
        }
        return speed_function({r1, r2});
    };
}

inline Hamiltonian quadratic_hamiltonian(double h11, double h12, double h22) {
    return [h11, h12, h22](double p1, double p2) {
        return h11 * p1 * p1 + 2 * h12 * p1 * p2 + h22 * p2 * p2;
    };
}

struct HjRun {
    ContinuumField phi;
    double max_alpha1 = 0, max_alpha2 = 0; ///< artificial-viscosity speeds used
    double scheme_viscosity = 0;           ///< max alpha * dx / 2, the O(dx) dissipation
    long steps = 0;
};

/// Local Lax-Friedrichs (monotone) scheme for  d_t phi = H(grad phi)  on the
/// periodic square.  The dissipation speeds alpha_i are per cell,
/// 1.5 x max |dH/dp_i| over the cell's own one-sided gradients, so smooth
/// flat regions see almost no artificial viscosity.  With dt = 0 the time
/// step adapts to 0.4 of the CFL bound dx/max(a1+a2) each step; an explicit
/// dt that violates the bound raises an error naming the required step.
/// HFun is any callable (p1, p2) -> double.
template <class HFun>
inline HjRun hj_solve_report(const ContinuumField& phi0, HFun&& H, double T, double dt = 0) {
    if (T < 0) throw std::invalid_argument("hj_solve: T must be >= 0");
    HjRun run;
    run.phi = phi0;
    ContinuumField& f = run.phi;
    const int n = f.n;
    const double dx = f.dx;
    std::vector<double> next(f.w.size());
    double t = 0;
    const double fd = 1e-6;
    const auto d1 = [&](double p1, double p2) {
        return std::abs(H(p1 + fd, p2) - H(p1 - fd, p2)) / (2 * fd);
    };
    const auto d2 = [&](double p1, double p2) {
        return std::abs(H(p1, p2 + fd) - H(p1, p2 - fd)) / (2 * fd);
    };
    while (t < T) {
        // pass 1: cell gradients, local dissipation speeds, CFL bound
        double max_asum = 1e-12;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double c = f.at(i, j);
                const double p1m = f.tilt.rho1 + (c - f.at(i - 1, j)) / dx;
                const double p1p = f.tilt.rho1 + (f.at(i + 1, j) - c) / dx;
                const double p2m = f.tilt.rho2 + (c - f.at(i, j - 1)) / dx;
                const double p2p = f.tilt.rho2 + (f.at(i, j + 1) - c) / dx;
                const double q1 = (p1m + p1p) / 2, q2 = (p2m + p2p) / 2;
                const double a1 = 1.5 * std::max({d1(p1m, q2), d1(p1p, q2), d1(q1, q2)});
                const double a2 = 1.5 * std::max({d2(q1, p2m), d2(q1, p2p), d2(q1, q2)});
                run.max_alpha1 = std::max(run.max_alpha1, a1);
                run.max_alpha2 = std::max(run.max_alpha2, a2);
                max_asum = std::max(max_asum, a1 + a2);
                next[static_cast<std::size_t>(i) * n + j] =
                    H(q1, q2) + 0.5 * a1 * (p1p - p1m) + 0.5 * a2 * (p2p - p2m);
            }
        const double dt_cfl = dx / max_asum;
        double step = dt > 0 ? dt : 0.4 * dt_cfl;
        if (dt > 0 && dt > dt_cfl)
            throw std::invalid_argument("hj_solve: CFL violation, need dt <= " +
                                        std::to_string(dt_cfl));
        step = std::min(step, T - t);
        for (std::size_t k = 0; k < f.w.size(); ++k) f.w[k] += step * next[k];
        t += step;
        ++run.steps;
    }
    if (!f.finite()) throw std::runtime_error("hj_solve: solution blew up");
    run.scheme_viscosity = std::max(run.max_alpha1, run.max_alpha2) * dx / 2;
    return run;
}

template <class HFun>
inline ContinuumField hj_solve(const ContinuumField& phi0, HFun&& H, double T, double dt = 0) {
    return hj_solve_report(phi0, std::forward<HFun>(H), T, dt).phi;
}

// ---------------------------------------------------------------------------
// Hopf variational oracle for convex initial data:
//   phi(x, t) = sup_p [ p.x + t H(p) - phi0*(p) ],
// with the Legendre transform phi0*(p) = sup_y [ p.y - phi0(y) ] taken over
// a box around x (the gradient of admissible data is bounded, so distant y
// never attain the sup).
// ---------------------------------------------------------------------------

namespace detail {

/// Maximize g over [lo1,hi1]x[lo2,hi2] by grid search with nested refinement.
inline double grid_maximize(const std::function<double(double, double)>& g, double lo1, double hi1,
                            double lo2, double hi2, int levels = 5, int pts = 33) {
    double best = -1e300, b1 = lo1, b2 = lo2;
    for (int lev = 0; lev < levels; ++lev) {
        const double d1 = (hi1 - lo1) / (pts - 1), d2 = (hi2 - lo2) / (pts - 1);
        for (int i = 0; i < pts; ++i)
            for (int j = 0; j < pts; ++j) {
                const double y1 = lo1 + i * d1, y2 = lo2 + j * d2;
                const double val = g(y1, y2);
                if (val > best) {
                    best = val;
                    b1 = y1;
                    b2 = y2;
                }
            }
        lo1 = b1 - d1;
        hi1 = b1 + d1;
        lo2 = b2 - d2;
        hi2 = b2 + d2;
    }
    return best;
}

} // namespace detail

/// Hopf-formula evaluation at one space-time point.  phi0 must be convex
/// (checked by midpoint inequalities on a deterministic sample).  The true
/// conjugate phi0* is +infinity outside the attained gradient range, so the
/// outer sup runs over a base_n x base_n slope grid on the margin-dilated
/// triangle with every candidate clamped into the sampled gradient bounding
/// box of phi0; two dyadic refinements around the argmax, ties broken toward
/// the lexicographically smallest slope.  If accuracy_out is given it
/// receives the value change of the last refinement.
inline double hopf_oracle(const std::function<double(double, double)>& phi0, const Hamiltonian& H,
                          double x1, double x2, double t, int base_n = 64, double margin = 0.02,
                          double* accuracy_out = nullptr) {
    if (t < 0) throw std::invalid_argument("hopf_oracle: t must be >= 0");
    const double R = 1.5;
    // convexity check + gradient range, on a deterministic grid over the box
    double g1lo = 1e300, g1hi = -1e300, g2lo = 1e300, g2hi = -1e300;
    {
        const int m = 9;
        const double fd = 1e-6;
        std::vector<std::pair<double, double>> ys;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const double y1 = x1 - R + 2 * R * i / (m - 1.0);
                const double y2 = x2 - R + 2 * R * j / (m - 1.0);
                ys.emplace_back(y1, y2);
                const double g1 = (phi0(y1 + fd, y2) - phi0(y1 - fd, y2)) / (2 * fd);
                const double g2 = (phi0(y1, y2 + fd) - phi0(y1, y2 - fd)) / (2 * fd);
                g1lo = std::min(g1lo, g1);
                g1hi = std::max(g1hi, g1);
                g2lo = std::min(g2lo, g2);
                g2hi = std::max(g2hi, g2);
            }
        for (std::size_t a = 0; a < ys.size(); ++a)
            for (std::size_t b = a + 1; b < ys.size(); ++b) {
                const double mid = phi0((ys[a].first + ys[b].first) / 2,
                                        (ys[a].second + ys[b].second) / 2);
                if (mid > (phi0(ys[a].first, ys[a].second) + phi0(ys[b].first, ys[b].second)) / 2 + 1e-9)
                    throw std::invalid_argument("hopf_oracle: phi0 is not convex");
            }
    }
    const auto legendre = [&](double p1, double p2) {
        return detail::grid_maximize(
            [&](double y1, double y2) { return p1 * y1 + p2 * y2 - phi0(y1, y2); }, x1 - R, x1 + R,
            x2 - R, x2 + R);
    };
    const auto value = [&](double p1, double p2) {
        return p1 * x1 + p2 * x2 + t * H(p1, p2) - legendre(p1, p2);
    };

    double best = -1e300, b1 = margin, b2 = margin;
    const double tie = 1e-12;
    const auto consider = [&](double p1, double p2) {
        p1 = std::clamp(p1, g1lo, g1hi);
        p2 = std::clamp(p2, g2lo, g2hi);
        if (p1 < margin - 1e-15 || p2 < margin - 1e-15 || p1 + p2 > 1 - margin + 1e-15) return;
        const double val = value(p1, p2);
        if (val > best + tie ||
            (val > best - tie && (p1 < b1 - tie || (p1 < b1 + tie && p2 < b2 - tie)))) {
            best = val;
            b1 = p1;
            b2 = p2;
        }
    };
    double spacing = (1 - 2 * margin) / (base_n - 1.0);
    for (int i = 0; i < base_n; ++i)
        for (int j = 0; j < base_n; ++j) consider(margin + i * spacing, margin + j * spacing);
    double prev_best = best;
    for (int refine = 0; refine < 2; ++refine) {
        const double c1 = b1, c2 = b2, window = 2 * spacing;
        spacing /= 2;
        prev_best = best;
        for (int i = -8; i <= 8; ++i)
            for (int j = -8; j <= 8; ++j)
                consider(c1 + i * window / 8, c2 + j * window / 8);
    }
    if (accuracy_out) *accuracy_out = best - prev_best;
    return best;
}

// ---------------------------------------------------------------------------
// Quadratic-Hamiltonian bump evolution (the local model of the growth PDE
// around a flat slope, with H the Hessian of the speed there).
// ---------------------------------------------------------------------------

struct BumpEvolution {
    std::vector<double> t;      ///< sample times
    std::vector<double> height; ///< |peak| of the bump
    std::vector<double> width;  ///< effective half-max diameter 2 sqrt(area/pi)
    bool degenerate = false;    ///< det H == 0 (still run, but flagged)
};

/// Evolve a compactly supported bump of the given sign under
/// d_t psi = <grad psi, H grad psi> and track its half-max width and peak
/// height at geometrically spaced times in [T/10, T].
///
/// The initial profile is the similarity cone of the quadratic Hamiltonian
/// itself at a small seed time t0 = T/100, psi0 = sign (A - Q(x)/(4 t0))+,
/// where Q is the quadratic form of H^-1 (of |H|^-1 when H is indefinite),
/// mollified over a couple of mesh cells.  With this seed the exact
/// viscosity solution is explicit: the positive-bump/definite-H case keeps
/// height A and spreads its half-max area linearly in t + t0, and the
/// negative-bump case has depth exactly A t0 / t, so the width and height
/// diagnostics probe the scheme rather than a slow transient.
inline BumpEvolution bump_evolution(double h11, double h12, double h22, int sign, double T,
                                    int n = 256, int samples = 9, double amplitude = 0.05) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("bump_evolution: sign must be +-1");
    if (T <= 0) throw std::invalid_argument("bump_evolution: T must be > 0");
    BumpEvolution out;
    const double det = h11 * h22 - h12 * h12;
    out.degenerate = det == 0;
    // eigen-decomposition of the symmetric H; |H| has the same eigenvectors
    const double tr = h11 + h22;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    const double l1 = tr / 2 + disc, l2 = tr / 2 - disc;
    double c = 1, s = 0; // eigenvector (c, s) for l1
    if (std::abs(h12) > 1e-300) {
        const double norm = std::hypot(l1 - h22, h12);
        c = (l1 - h22) / norm;
        s = h12 / norm;
    } else if (h22 > h11) {
        c = 0;
        s = 1;
    }
    const double a1 = std::max(std::abs(l1), 1e-12), a2 = std::max(std::abs(l2), 1e-12);
    // Q(x) = x . |H|^{-1} x in the eigenbasis
    const auto Q = [&](double y1, double y2) {
        const double u = c * y1 + s * y2, v = -s * y1 + c * y2;
        return u * u / a1 + v * v / a2;
    };
    // Seed time of the similarity cone.  The negative bump's depth decays
    // like A t0 / t, so it is seeded later to keep the depth well above the
    // scheme viscosity throughout the measured decade.
    const double t0 = sign > 0 ? T / 100 : T / 10;
    ContinuumField f(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double y1 = i * f.dx - 0.5, y2 = j * f.dx - 0.5;
            f.at(i, j) = sign * std::max(0.0, amplitude - Q(y1, y2) / (4 * t0));
        }
    { // 3x3 mollification pass (twice) to smooth the cone tip and edge
        for (int pass = 0; pass < 2; ++pass) {
            ContinuumField g = f;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double acc = 0;
                    for (int di = -1; di <= 1; ++di)
                        for (int dj = -1; dj <= 1; ++dj)
                            acc += g.at(i + di, j + dj) * ((di == 0 ? 2 : 1) * (dj == 0 ? 2 : 1));
                    f.at(i, j) = acc / 16;
                }
        }
    }
    const auto H = [h11, h12, h22](double p1, double p2) {
        return h11 * p1 * p1 + 2 * h12 * p1 * p2 + h22 * p2 * p2;
    };
    const double ratio = std::pow(10.0, 1.0 / (samples - 1));
    double t = 0;
    for (int k = 0; k < samples; ++k) {
        const double tk = T / 10 * std::pow(ratio, k);
        f = hj_solve(f, H, tk - t);
        t = tk;
        double peak = 0;
        for (double x : f.w) peak = std::max(peak, sign * x);
        int cells = 0;
        for (double x : f.w)
            if (sign * x >= peak / 2) ++cells;
        out.t.push_back(tk);
        out.height.push_back(peak);
        out.width.push_back(2 * std::sqrt(cells * f.dx * f.dx / 3.14159265358979323846));
    }
    return out;
}

} // namespace dimerlab
