#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fit.hpp"
#include "glauber.hpp"
#include "height.hpp"
#include "rng.hpp"

namespace dimerlab {

struct GibbsDiagnostics {
    int64_t burn_in_sweeps = 0;
    int64_t spacing_sweeps = 0;
    uint64_t seed = 0;
    double ess = 0; ///< autocorrelation-based effective sample size
    std::string warning;
};

struct GibbsEnsemble {
    Slope slope;
    TorusGeometry geom;
    int64_t col_wrap = 0;
    std::vector<HeightField> samples;
    GibbsDiagnostics diag;
};

namespace detail {

/// Integrated-autocorrelation ESS of a scalar series (Geyer initial positive
/// sequence, truncated at the first nonpositive pair sum).
inline double effective_sample_size(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 4) return static_cast<double>(n);
    double m = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(n);
    auto gamma = [&](std::size_t k) {
        double s = 0;
        for (std::size_t i = 0; i + k < n; ++i) s += (x[i] - m) * (x[i + k] - m);
        return s / static_cast<double>(n);
    };
    const double g0 = gamma(0);
    if (g0 <= 0) return static_cast<double>(n);
    double tau = 1.0;
    for (std::size_t k = 1; k + 1 < n / 2; k += 2) {
        const double pair = gamma(k) + gamma(k + 1);
        if (pair <= 0) break;
        tau += 2.0 * pair / g0;
    }
    return static_cast<double>(n) / tau;
}

} // namespace detail

/// Uniform samples on the torus winding class fixed by (geometry, rho) via
/// single-site heat-bath MCMC started from make_flat.  Documented minimum
/// burn-in is 10 * L1 * L2 sweeps; fewer is a warning, not an error.
inline GibbsEnsemble sample_gibbs(Slope rho, const TorusGeometry& geom, int64_t burn_in_sweeps,
                                  uint64_t seed, std::size_t n_samples = 1,
                                  int64_t spacing_sweeps = -1) {
    rho.require_interior("sample_gibbs");
    GibbsEnsemble ens;
    ens.slope = rho;
    ens.geom = geom;
    ens.diag.burn_in_sweeps = burn_in_sweeps;
    ens.diag.seed = seed;
    const int64_t min_burn = 10LL * geom.faces();
    if (burn_in_sweeps < min_burn)
        ens.diag.warning = "burn-in below documented minimum of " + std::to_string(min_burn) + " sweeps";
    if (spacing_sweeps < 0) spacing_sweeps = std::max<int64_t>(1, geom.faces() / 4);
    ens.diag.spacing_sweeps = spacing_sweeps;

    auto hf = particles_to_height(make_flat(rho, geom));
    ens.col_wrap = hf.col_wrap;
    Rng rng = Rng::labeled(seed, "gibbs", 0);
    for (int64_t i = 0; i < burn_in_sweeps; ++i) glauber_sweep(hf, rng);
    std::vector<double> probe;
    probe.reserve(n_samples);
    ens.samples.reserve(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        if (k > 0)
            for (int64_t i = 0; i < spacing_sweeps; ++i) glauber_sweep(hf, rng);
        ens.samples.push_back(hf);
        probe.push_back(static_cast<double>(hf.at(0, 0) - hf.at(geom.L1 / 2, geom.L2 / 2)));
    }
    ens.diag.ess = detail::effective_sample_size(probe);
    return ens;
}

struct VarianceProfile {
    std::vector<int64_t> r;
    std::vector<double> variance;
    std::vector<double> jackknife;
    LinearFit log_fit; ///< Var vs log r over the requested window
    std::string warning;
};

/// Var(h_0 - h_r) vs separation r (along the column axis, averaged over all
/// base faces), with a c*log r + d fit over [fit_lo, fit_hi].
inline VarianceProfile height_variance_profile(const GibbsEnsemble& ens, int64_t max_r,
                                               int64_t fit_lo = 4, int64_t fit_hi = 32) {
    const auto& g = ens.geom;
    VarianceProfile vp;
    if (max_r > g.L2 / 4) {
        vp.warning = "max_r " + std::to_string(max_r) + " truncated to L2/4 (wrap-around bias)";
        max_r = g.L2 / 4;
    }
    const std::size_t S = ens.samples.size();
    const std::size_t F = static_cast<std::size_t>(g.faces());
    // Var is estimated per base face over samples and averaged over base
    // faces (averaging the differences first would wash fluctuations out);
    // error bars by jackknife over samples.
    if (fit_lo < 1) fit_lo = 1;
    std::vector<double> d(S);
    for (int64_t r = 0; r <= max_r; ++r) {
        double var_acc = 0;
        std::vector<double> loo(S, 0.0);
        for (int m = 0; m < g.L1; ++m)
            for (int64_t s = 0; s < g.L2; ++s) {
                double sum = 0, sumsq = 0;
                for (std::size_t k = 0; k < S; ++k) {
                    d[k] = static_cast<double>(ens.samples[k].value(m, s) -
                                               ens.samples[k].value(m, s + r));
                    sum += d[k];
                    sumsq += d[k] * d[k];
                }
                var_acc += (sumsq - sum * sum / static_cast<double>(S)) / (static_cast<double>(S) - 1);
                for (std::size_t k = 0; k < S; ++k) {
                    const double sk = sum - d[k], sqk = sumsq - d[k] * d[k];
                    const double nk = static_cast<double>(S - 1);
                    loo[k] += (sqk - sk * sk / nk) / (nk - 1);
                }
            }
        for (std::size_t k = 0; k < S; ++k) loo[k] /= static_cast<double>(F);
        vp.r.push_back(r);
        vp.variance.push_back(var_acc / static_cast<double>(F));
        vp.jackknife.push_back(jackknife_stderr(loo));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < vp.r.size(); ++i)
        if (vp.r[i] >= fit_lo && vp.r[i] <= fit_hi) {
            lx.push_back(std::log(static_cast<double>(vp.r[i])));
            ly.push_back(vp.variance[i]);
        }
    if (lx.size() >= 2) vp.log_fit = linear_fit(lx, ly);
    return vp;
}

} // namespace dimerlab
