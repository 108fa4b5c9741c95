#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "geometry.hpp"
#include "kasteleyn.hpp"

namespace dimerlab {

/// Raised when a PDE state pushes some cell gradient within the forbidden
/// margin of the slope-triangle boundary (where mobility and surface
/// tension degenerate); carries the offending field.
struct GradientMarginError : std::runtime_error {
    ContinuumField snapshot;
    double time;
    GradientMarginError(ContinuumField f, double t)
        : std::runtime_error("parabolic_solve: gradient left the slope triangle margin at t=" +
                            std::to_string(t)),
          snapshot(std::move(f)), time(t) {}
};

namespace detail {

inline double catmull_rom(double p0, double p1, double p2, double p3, double u) {
    return p1 + 0.5 * u * (p2 - p0 +
                           u * (2 * p0 - 5 * p1 + 4 * p2 - p3 + u * (3 * (p1 - p2) + p3 - p0)));
}

/// Bicubic (Catmull-Rom) sample of one tabulated component at slope rho.
/// `pick` maps a flat table index to the component value.
template <class Pick>
inline double bicubic(const SurfaceTensionTable& tab, const Slope& rho, Pick pick) {
    const double span = 1 - 2 * tab.margin;
    const double u = (rho.rho1 - tab.margin) / span * (tab.n - 1);
    const double v = (rho.rho2 - tab.margin) / span * (tab.n - 1);
    const int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, tab.n - 2);
    const int j0 = std::clamp(static_cast<int>(std::floor(v)), 0, tab.n - 2);
    const double fu = u - i0, fv = v - j0;
    double rows[4];
    for (int di = -1; di <= 2; ++di) {
        const int i = std::clamp(i0 + di, 0, tab.n - 1);
        double cols[4];
        for (int dj = -1; dj <= 2; ++dj) {
            const int j = std::clamp(j0 + dj, 0, tab.n - 1);
            cols[dj + 1] = pick(static_cast<std::size_t>(i) * tab.n + j);
        }
        rows[di + 1] = catmull_rom(cols[0], cols[1], cols[2], cols[3], fv);
    }
    return catmull_rom(rows[0], rows[1], rows[2], rows[3], fu);
}

} // namespace detail

/// Interpolated surface-tension Hessian {s11, s12, s22} at slope rho.
inline std::array<double, 3> sigma_hessian_interp(const SurfaceTensionTable& tab, const Slope& rho) {
    std::array<double, 3> out;
    for (int c = 0; c < 3; ++c)
        out[static_cast<std::size_t>(c)] =
            detail::bicubic(tab, rho, [&](std::size_t k) { return tab.sigma_ij[k][static_cast<std::size_t>(c)]; });
    if (!std::isfinite(out[0]) || !std::isfinite(out[1]) || !std::isfinite(out[2]))
        throw std::domain_error("sigma_hessian_interp: slope too close to the triangle boundary");
    return out;
}

/// Interpolated surface-tension gradient {d sigma/d rho1, d sigma/d rho2}.
inline std::array<double, 2> sigma_gradient_interp(const SurfaceTensionTable& tab, const Slope& rho) {
    std::array<double, 2> out;
    for (int c = 0; c < 2; ++c)
        out[static_cast<std::size_t>(c)] =
            detail::bicubic(tab, rho, [&](std::size_t k) { return tab.sigma_i[k][static_cast<std::size_t>(c)]; });
    if (!std::isfinite(out[0]) || !std::isfinite(out[1]))
        throw std::domain_error("sigma_gradient_interp: slope too close to the triangle boundary");
    return out;
}

/// Non-divergence right side  mu(grad phi) sum_ij sigma_ij(grad phi) d_ij phi
/// at every cell (central differences).
inline std::vector<double> parabolic_rhs(const ContinuumField& f, const SurfaceTensionTable& tab,
                                         double margin = 0.02, double time_for_error = 0) {
    const int n = f.n;
    const double dx = f.dx;
    std::vector<double> rhs(f.w.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Slope g = f.gradient(i, j);
            if (!g.in_interior(margin)) throw GradientMarginError(f, time_for_error);
            const auto s = sigma_hessian_interp(tab, g);
            const double c = f.at(i, j);
            const double dxx = (f.at(i + 1, j) - 2 * c + f.at(i - 1, j)) / (dx * dx);
            const double dyy = (f.at(i, j + 1) - 2 * c + f.at(i, j - 1)) / (dx * dx);
            const double dxy = (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) +
                                f.at(i - 1, j - 1)) /
                               (4 * dx * dx);
            rhs[static_cast<std::size_t>(i) * n + j] =
                mobility_function(g) * (s[0] * dxx + 2 * s[1] * dxy + s[2] * dyy);
        }
    return rhs;
}

/// Divergence-form right side  mu(grad phi) * div[ grad-sigma(grad phi) ],
/// built from forward-difference gradients and the tabulated first
/// derivatives of sigma; agrees with parabolic_rhs to O(dx) on smooth
/// fields (discrete first variation of the surface-tension functional).
inline std::vector<double> parabolic_rhs_divergence(const ContinuumField& f,
                                                    const SurfaceTensionTable& tab,
                                                    double margin = 0.02) {
    const int n = f.n;
    const double dx = f.dx;
    std::vector<double> g1(f.w.size()), g2(f.w.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double c = f.at(i, j);
            const Slope gf{f.tilt.rho1 + (f.at(i + 1, j) - c) / dx,
                           f.tilt.rho2 + (f.at(i, j + 1) - c) / dx};
            if (!gf.in_interior(margin)) throw GradientMarginError(f, 0);
            const auto sg = sigma_gradient_interp(tab, gf);
            g1[static_cast<std::size_t>(i) * n + j] = sg[0];
            g2[static_cast<std::size_t>(i) * n + j] = sg[1];
        }
    std::vector<double> rhs(f.w.size());
    const auto at = [n](const std::vector<double>& a, int i, int j) {
        return a[static_cast<std::size_t>(((i % n) + n) % n) * n + (((j % n) + n) % n)];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rhs[static_cast<std::size_t>(i) * n + j] =
                mobility_function(f.gradient(i, j)) *
                ((at(g1, i, j) - at(g1, i - 1, j)) / dx + (at(g2, i, j) - at(g2, i, j - 1)) / dx);
    return rhs;
}

/// Explicit central-difference solver for the diffusive growth PDE
///   d_t phi = mu(grad phi) sum_ij sigma_ij(grad phi) d^2_ij phi.
/// Gradients must stay `margin` inside the slope triangle (checked every
/// step; violation raises GradientMarginError with a snapshot).  With
/// dt = 0 the step adapts to 0.4 of the diffusive CFL bound; an explicit
/// dt beyond the bound raises an error naming the required step.
inline ContinuumField parabolic_solve(const ContinuumField& phi0, const SurfaceTensionTable& tab,
                                      double T, double dt = 0, double margin = 0.02) {
    if (T < 0) throw std::invalid_argument("parabolic_solve: T must be >= 0");
    ContinuumField f = phi0;
    const double dx = f.dx;
    double t = 0;
    while (t < T) {
        double max_diff = 1e-12;
        for (int i = 0; i < f.n; ++i)
            for (int j = 0; j < f.n; ++j) {
                const Slope g = f.gradient(i, j);
                if (!g.in_interior(margin)) throw GradientMarginError(f, t);
                const auto s = sigma_hessian_interp(tab, g);
                max_diff = std::max(max_diff,
                                    mobility_function(g) * (s[0] + s[2] + 2 * std::abs(s[1])));
            }
        const double dt_cfl = dx * dx / (2 * max_diff);
        double step = dt > 0 ? dt : 0.4 * dt_cfl;
        if (dt > 0 && dt > dt_cfl)
            throw std::invalid_argument("parabolic_solve: CFL violation, need dt <= " +
                                        std::to_string(dt_cfl));
        step = std::min(step, T - t);
        const std::vector<double> rhs = parabolic_rhs(f, tab, margin, t);
        for (std::size_t k = 0; k < f.w.size(); ++k) f.w[k] += step * rhs[k];
        t += step;
    }
    if (!f.finite()) throw std::runtime_error("parabolic_solve: solution blew up");
    return f;
}

} // namespace dimerlab
