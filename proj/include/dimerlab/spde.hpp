#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "fit.hpp"
#include "rng.hpp"

namespace dimerlab {

/// Parameters of the anisotropic KPZ equation
///   d_t psi = nu Laplacian psi + <grad psi, H grad psi> + xi
/// with xi white in time and mollified in space at the correlation length
/// (the lattice-scale ultraviolet cutoff).
struct SpdeParams {
    double nu = 1.0;                  ///< diffusion coefficient, > 0
    double h11 = 0, h12 = 0, h22 = 0; ///< symmetric nonlinearity matrix H
    double corr_len = 0;              ///< noise correlation length, >= one mesh cell
    double amplitude = 0;             ///< noise strength (0 = deterministic)

    void validate(double dx) const {
        if (nu <= 0) throw std::invalid_argument("SpdeParams: nu must be > 0");
        if (amplitude != 0 && corr_len < dx)
            throw std::invalid_argument("SpdeParams: correlation length must be >= one mesh cell");
        if (amplitude < 0) throw std::invalid_argument("SpdeParams: amplitude must be >= 0");
    }
};

struct SpdeResult {
    std::vector<double> times;    ///< sample times (geometric ladder)
    std::vector<double> variance; ///< spatial Var(psi) at those times
    std::vector<double> sf_r;     ///< structure-function separations (final time)
    std::vector<double> sf_val;   ///< <(psi(x + r e1) - psi(x))^2>
    ExponentEstimate fit;         ///< power vs log fit of Var(t), latter half
    ContinuumField psi;           ///< final (or last stable) field
    bool aborted = false;
    double last_stable_time = 0;
};

/// Euler-Maruyama integration of the SPDE from psi0.  The noise increment is
/// amplitude * sqrt(dt)/dx * (G * eta) with eta i.i.d. standard normals per
/// cell and G a Gaussian kernel of width corr_len normalized to unit l2 norm
/// (so the mollified field keeps unit variance per cell and the amplitude
/// alone sets the strength).  Spatial variance is recorded on a geometric
/// time ladder; blow-up aborts with the last stable time.
inline SpdeResult spde_run(const SpdeParams& par, const ContinuumField& psi0, double T,
                           uint64_t seed, double dt = 0, int n_samples = 25) {
    const int n = psi0.n;
    const double dx = psi0.dx;
    par.validate(dx);
    if (T <= 0) throw std::invalid_argument("spde_run: T must be > 0");

    // explicit diffusive stability (2d five-point): nu dt / dx^2 <= 1/4
    const double dt_cfl = 0.25 * dx * dx / par.nu;
    if (dt <= 0) dt = 0.8 * dt_cfl;
    if (dt > dt_cfl)
        throw std::invalid_argument("spde_run: stability violation, need dt <= " +
                                    std::to_string(dt_cfl));

    // separable Gaussian mollifier, unit l2 norm
    std::vector<double> kern{1.0};
    if (par.amplitude > 0) {
        const int rad = std::max(1, static_cast<int>(std::ceil(3 * par.corr_len / dx)));
        kern.assign(static_cast<std::size_t>(2 * rad + 1), 0.0);
        double norm2 = 0;
        for (int k = -rad; k <= rad; ++k) {
            const double w = std::exp(-0.5 * (k * dx) * (k * dx) / (par.corr_len * par.corr_len));
            kern[static_cast<std::size_t>(k + rad)] = w;
            norm2 += w * w;
        }
        for (double& w : kern) w /= std::sqrt(norm2);
    }

    SpdeResult res;
    res.psi = psi0;
    ContinuumField& f = res.psi;
    Rng rng = Rng::labeled(seed, "spde", 0);
    std::vector<double> rhs(f.w.size()), eta(f.w.size()), tmp(f.w.size());

    // geometric sample ladder
    std::vector<double> sample_times;
    const double t0 = std::max(10 * dt, T / 512);
    for (int k = 0; k < n_samples; ++k)
        sample_times.push_back(t0 * std::pow(T / t0, k / (n_samples - 1.0)));

    double t = 0;
    std::size_t next_sample = 0;
    const auto idx = [n](int i, int j) {
        return static_cast<std::size_t>(((i % n) + n) % n) * n + (((j % n) + n) % n);
    };
    while (t < T && next_sample < sample_times.size()) {
        const double step = std::min(dt, sample_times[next_sample] - t);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double c = f.at(i, j);
                const double p1 = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * dx);
                const double p2 = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * dx);
                const double lap = (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) +
                                    f.at(i, j - 1) - 4 * c) /
                                   (dx * dx);
                rhs[idx(i, j)] = par.nu * lap + par.h11 * p1 * p1 + 2 * par.h12 * p1 * p2 +
                                 par.h22 * p2 * p2;
            }
        if (par.amplitude > 0) {
            for (double& e : eta) e = rng.normal();
            const int rad = (static_cast<int>(kern.size()) - 1) / 2;
            for (int i = 0; i < n; ++i) // rows
                for (int j = 0; j < n; ++j) {
                    double s = 0;
                    for (int k = -rad; k <= rad; ++k)
                        s += kern[static_cast<std::size_t>(k + rad)] * eta[idx(i + k, j)];
                    tmp[idx(i, j)] = s;
                }
            for (int i = 0; i < n; ++i) // columns
                for (int j = 0; j < n; ++j) {
                    double s = 0;
                    for (int k = -rad; k <= rad; ++k)
                        s += kern[static_cast<std::size_t>(k + rad)] * tmp[idx(i, j + k)];
                    f.w[idx(i, j)] += step * rhs[idx(i, j)] +
                                      par.amplitude * std::sqrt(step) / dx * s;
                }
        } else {
            for (std::size_t k = 0; k < f.w.size(); ++k) f.w[k] += step * rhs[k];
        }
        t += step;
        bool stable = true;
        for (double x : f.w)
            if (!std::isfinite(x) || std::abs(x) > 1e8) stable = false;
        if (!stable) {
            res.aborted = true;
            break;
        }
        res.last_stable_time = t;
        if (t >= sample_times[next_sample] - 1e-12) {
            res.times.push_back(t);
            res.variance.push_back(field_variance(f));
            ++next_sample;
        }
    }

    // axis structure function at the final recorded state
    for (int r = 1; r <= n / 2; r *= 2) {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double d = f.at(i + r, j) - f.at(i, j);
                s += d * d;
            }
        res.sf_r.push_back(r * dx);
        res.sf_val.push_back(s / static_cast<double>(n) / n);
    }
    if (res.times.size() >= 5) {
        bool positive = true;
        for (double v : res.variance) positive = positive && v > 0;
        if (positive) res.fit = fit_exponent(res.times, res.variance);
    }
    return res;
}

} // namespace dimerlab
