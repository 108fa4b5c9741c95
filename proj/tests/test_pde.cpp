#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <dimerlab/field.hpp>
#include <dimerlab/geometry.hpp>
#include <dimerlab/hessian.hpp>
#include <dimerlab/hj.hpp>
#include <dimerlab/parabolic.hpp>
#include <dimerlab/spde.hpp>

using namespace dimerlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

ContinuumField sampled_field(int n, const Slope& tilt,
                             const std::function<double(double, double)>& w) {
    ContinuumField f(n, tilt);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f.w[static_cast<std::size_t>(i) * n + j] =
                w(static_cast<double>(i) / n, static_cast<double>(j) / n);
    return f;
}

} // namespace

// ---------------------------------------------------------------------------
// Hamilton-Jacobi solver
// ---------------------------------------------------------------------------

TEST_CASE("hj_solve translates affine data at the exact speed", "[hj]") {
    const Slope rho{0.3, 0.45};
    const double T = 0.15;
    const ContinuumField f0(64, rho);
    const auto H = speed_hamiltonian();
    const ContinuumField f = hj_solve(f0, H, T);
    // An affine state has zero one-sided gradient spread, so the numerical
    // dissipation cancels exactly and the field grows by T * H(rho).
    const double expect = T * H(rho.rho1, rho.rho2);
    for (double w : f.w) REQUIRE(w == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("hj_solve is monotone: ordered data stay ordered", "[hj]") {
    const int n = 48;
    const Slope rho{0.35, 0.35};
    const auto f0 = sampled_field(n, rho, [](double x, double y) {
        return 0.01 * std::sin(2 * kPi * (x + y)) + 0.008 * std::cos(2 * kPi * x);
    });
    auto g0 = f0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g0.w[static_cast<std::size_t>(i) * n + j] +=
                0.004 * (1 + std::cos(2 * kPi * j / n));
    const auto H = speed_hamiltonian();
    for (double T : {0.004, 0.008, 0.016}) {
        const ContinuumField f = hj_solve(f0, H, T);
        const ContinuumField g = hj_solve(g0, H, T);
        for (std::size_t k = 0; k < f.w.size(); ++k) REQUIRE(g.w[k] >= f.w[k] - 1e-12);
    }
}

TEST_CASE("hj_solve rejects time steps above the CFL bound", "[hj]") {
    const ContinuumField f0(32, {0.3, 0.3});
    REQUIRE_THROWS_WITH(hj_solve(f0, speed_hamiltonian(), 0.1, 10.0),
                        Catch::Matchers::ContainsSubstring("need dt"));
}

TEST_CASE("hj_solve reports scheme viscosity of order dx", "[hj]") {
    const auto w = [](double x, double y) {
        return 0.01 * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
    };
    const auto H = speed_hamiltonian();
    const HjRun coarse = hj_solve_report(sampled_field(32, {0.35, 0.35}, w), H, 0.01);
    const HjRun fine = hj_solve_report(sampled_field(64, {0.35, 0.35}, w), H, 0.01);
    REQUIRE(coarse.scheme_viscosity > 0);
    // Halving dx should roughly halve the reported artificial viscosity.
    REQUIRE(fine.scheme_viscosity < 0.75 * coarse.scheme_viscosity);
    REQUIRE(fine.scheme_viscosity > 0.25 * coarse.scheme_viscosity);
}

// ---------------------------------------------------------------------------
// Hopf oracle
// ---------------------------------------------------------------------------

TEST_CASE("hopf_oracle reproduces the affine solution", "[hopf]") {
    const double r1 = 0.3, r2 = 0.45, c0 = 0.2;
    const auto phi0 = [&](double y1, double y2) { return c0 + r1 * y1 + r2 * y2; };
    const auto H = speed_hamiltonian();
    const double t = 0.3, x1 = 0.4, x2 = 0.7;
    const double expect = c0 + r1 * x1 + r2 * x2 + t * H(r1, r2);
    REQUIRE(hopf_oracle(phi0, H, x1, x2, t) == Catch::Approx(expect).margin(1e-8));
}

TEST_CASE("hopf_oracle at t = 0 recovers the initial condition", "[hopf]") {
    const auto phi0 = [](double y1, double y2) {
        return 0.45 * y1 + 0.3 * y2 + 0.03 * ((y1 - 0.5) * (y1 - 0.5) + (y2 - 0.5) * (y2 - 0.5));
    };
    const double x1 = 0.35, x2 = 0.6;
    REQUIRE(hopf_oracle(phi0, speed_hamiltonian(), x1, x2, 0.0) ==
            Catch::Approx(phi0(x1, x2)).margin(1e-5));
}

TEST_CASE("hopf_oracle is stable under slope-grid refinement", "[hopf]") {
    const auto phi0 = [](double y1, double y2) {
        return 0.45 * y1 + 0.3 * y2 + 0.03 * ((y1 - 0.5) * (y1 - 0.5) + (y2 - 0.5) * (y2 - 0.5));
    };
    const auto H = speed_hamiltonian();
    const double coarse = hopf_oracle(phi0, H, 0.5, 0.5, 0.02, 64);
    const double fine = hopf_oracle(phi0, H, 0.5, 0.5, 0.02, 128);
    REQUIRE(std::fabs(fine - coarse) < 1e-5);
}

TEST_CASE("hopf_oracle rejects non-convex data", "[hopf]") {
    const auto phi0 = [](double y1, double y2) { return -(y1 * y1 + y2 * y2); };
    REQUIRE_THROWS_WITH(hopf_oracle(phi0, speed_hamiltonian(), 0.5, 0.5, 0.1),
                        Catch::Matchers::ContainsSubstring("not convex"));
}

TEST_CASE("hj_solve converges to hopf_oracle with order at least 1/2", "[hj][hopf]") {
    // Convex paraboloid with the gradient range strictly inside the triangle;
    // the field is sampled without periodization, so compare only at the
    // centre where the seam cannot propagate within the short horizon.
    const double r1 = 0.45, r2 = 0.3, c = 0.03, T = 0.02;
    const auto phi0 = [&](double y1, double y2) {
        return r1 * y1 + r2 * y2 + c * ((y1 - 0.5) * (y1 - 0.5) + (y2 - 0.5) * (y2 - 0.5));
    };
    const auto H = speed_hamiltonian();
    const double ref = hopf_oracle(phi0, H, 0.5, 0.5, T);

    std::vector<double> errs;
    for (int n : {32, 64, 128, 256}) {
        const auto f0 = sampled_field(n, {r1, r2}, [&](double x, double y) {
            return c * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5));
        });
        const ContinuumField f = hj_solve(f0, H, T);
        errs.push_back(std::fabs(f.value(n / 2, n / 2) - ref));
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        REQUIRE(errs[k] < errs[k - 1]);
        const double order = std::log2(errs[k - 1] / errs[k]);
        REQUIRE(order >= 0.5);
    }
}

// ---------------------------------------------------------------------------
// Parabolic equation with the surface-tension coefficients
// ---------------------------------------------------------------------------

namespace {
const SurfaceTensionTable& shared_table() {
    static const SurfaceTensionTable tab = build_surface_tension_table(21);
    return tab;
}
} // namespace

TEST_CASE("bicubic sigma interpolation is stable across table resolutions", "[parabolic]") {
    const SurfaceTensionTable fine = build_surface_tension_table(41);
    for (const Slope rho : {Slope{0.35, 0.35}, Slope{0.25, 0.5}, Slope{0.5, 0.2}}) {
        const auto a = sigma_hessian_interp(shared_table(), rho);
        const auto b = sigma_hessian_interp(fine, rho);
        for (int k = 0; k < 3; ++k)
            REQUIRE(a[k] == Catch::Approx(b[k]).epsilon(0.01));
        const auto ga = sigma_gradient_interp(shared_table(), rho);
        const auto gb = sigma_gradient_interp(fine, rho);
        for (int k = 0; k < 2; ++k)
            REQUIRE(ga[k] == Catch::Approx(gb[k]).margin(0.01));
    }
    REQUIRE_THROWS_AS(sigma_hessian_interp(shared_table(), Slope{0.7, 0.45}), std::domain_error);
}

TEST_CASE("parabolic_solve keeps affine states stationary", "[parabolic]") {
    const ContinuumField f0(48, {0.35, 0.35});
    const ContinuumField f = parabolic_solve(f0, shared_table(), 0.01);
    for (double w : f.w) REQUIRE(w == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("small sinusoids decay at the linearised rate", "[parabolic]") {
    const int n = 64;
    const Slope rho{0.35, 0.35};
    const auto s = sigma_hessian_interp(shared_table(), rho);
    const double rate = mobility_function(rho) * 4 * kPi * kPi * s[0]; // k = (1, 0)
    const auto f0 = sampled_field(n, rho,
                                  [](double x, double) { return 1e-3 * std::sin(2 * kPi * x); });
    const double T = 0.5 / rate;
    const ContinuumField f = parabolic_solve(f0, shared_table(), T);
    const double rhat = -std::log(field_variance(f) / field_variance(f0)) / (2 * T);
    REQUIRE(rhat == Catch::Approx(rate).epsilon(0.05));
}

TEST_CASE("parabolic_solve contracts the L2 distance of ordered pairs", "[parabolic]") {
    const int n = 48;
    const Slope rho{0.4, 0.3};
    const auto f0 = sampled_field(n, rho, [](double x, double y) {
        return 5e-3 * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
    });
    const auto g0 = sampled_field(n, rho, [](double x, double y) {
        return 4e-3 * std::cos(2 * kPi * (x + y));
    });
    double prev = field_l2_distance_sq(f0, g0);
    for (double T : {0.001, 0.002, 0.004, 0.008}) {
        const double d = field_l2_distance_sq(parabolic_solve(f0, shared_table(), T),
                                              parabolic_solve(g0, shared_table(), T));
        REQUIRE(d <= prev * (1 + 1e-12));
        prev = d;
    }
}

TEST_CASE("divergence and non-divergence forms agree to O(dx)", "[parabolic]") {
    const auto w = [](double x, double y) {
        return 4e-3 * std::sin(2 * kPi * x) * std::sin(2 * kPi * y);
    };
    double prev = 0;
    for (int n : {32, 64}) {
        const auto f = sampled_field(n, {0.35, 0.35}, w);
        const auto r1 = parabolic_rhs(f, shared_table());
        const auto r2 = parabolic_rhs_divergence(f, shared_table());
        double diff = 0, scale = 0;
        for (std::size_t k = 0; k < r1.size(); ++k) {
            diff = std::max(diff, std::fabs(r1[k] - r2[k]));
            scale = std::max(scale, std::fabs(r1[k]));
        }
        REQUIRE(diff < 0.2 * scale);
        if (prev > 0) REQUIRE(diff < 0.75 * prev); // roughly halves with dx
        prev = diff;
    }
}

TEST_CASE("gradient excursions abort with a snapshot", "[parabolic]") {
    // Steep data whose gradient leaves the dilated triangle immediately.
    const auto f0 = sampled_field(48, {0.35, 0.35},
                                  [](double x, double) { return 0.2 * std::sin(2 * kPi * x); });
    try {
        parabolic_solve(f0, shared_table(), 0.01);
        FAIL("expected GradientMarginError");
    } catch (const GradientMarginError& e) {
        REQUIRE(e.snapshot.n == 48);
        REQUIRE(e.snapshot.finite());
        REQUIRE(e.time >= 0.0);
    }
}

TEST_CASE("parabolic_solve rejects time steps above the diffusive bound", "[parabolic]") {
    const ContinuumField f0(32, {0.35, 0.35});
    REQUIRE_THROWS_WITH(parabolic_solve(f0, shared_table(), 0.01, 1.0),
                        Catch::Matchers::ContainsSubstring("need dt"));
}

// ---------------------------------------------------------------------------
// Speed Hessian report
// ---------------------------------------------------------------------------

TEST_CASE("analytic speed Hessian matches finite differences", "[hessian]") {
    const HessianReport rep = hessian_report(interior_slope_grid(50, 0.2));
    REQUIRE(rep.grid.size() > 500);
    REQUIRE(rep.max_rel_err <= 1e-6);
    REQUIRE(rep.all_det_negative);
}

TEST_CASE("speed Hessian determinant is negative across the interior", "[hessian]") {
    const HessianReport rep = hessian_report(interior_slope_grid(80, 0.02));
    REQUIRE(rep.all_det_negative);
    for (const auto& h : rep.analytic) REQUIRE(h.det() < 0);
}

TEST_CASE("speed Hessian respects the slope-exchange symmetry", "[hessian]") {
    for (double a : {0.15, 0.3, 0.45})
        for (double b : {0.2, 0.35}) {
            const SpeedHessian hab = speed_hessian({a, b});
            const SpeedHessian hba = speed_hessian({b, a});
            REQUIRE(hab.h11 == Catch::Approx(hba.h22).epsilon(1e-12));
            REQUIRE(hab.h12 == Catch::Approx(hba.h12).epsilon(1e-12));
        }
}

// ---------------------------------------------------------------------------
// Quadratic-Hamiltonian bumps
// ---------------------------------------------------------------------------

TEST_CASE("definite positive bump keeps height and spreads as sqrt(t)", "[bump]") {
    const BumpEvolution b = bump_evolution(1, 0, 1, +1, 0.14, 480, 9, 0.10);
    REQUIRE_FALSE(b.degenerate);
    double hmin = 1e300, hmax = -1e300, wmin = 1e300, wmax = -1e300;
    for (std::size_t k = 0; k < b.t.size(); ++k) {
        hmin = std::min(hmin, b.height[k]);
        hmax = std::max(hmax, b.height[k]);
        const double ws = b.width[k] / std::sqrt(b.t[k]);
        wmin = std::min(wmin, ws);
        wmax = std::max(wmax, ws);
    }
    REQUIRE((hmax - hmin) / hmax < 0.05);
    REQUIRE((wmax - wmin) / wmax < 0.10);
}

TEST_CASE("definite negative bump decays as 1/t", "[bump]") {
    const BumpEvolution b = bump_evolution(1, 0, 1, -1, 0.14, 480, 9, 0.10);
    double lo = 1e300, hi = -1e300, sum = 0;
    for (std::size_t k = 0; k < b.t.size(); ++k) {
        const double ht = b.height[k] * b.t[k];
        lo = std::min(lo, ht);
        hi = std::max(hi, ht);
        sum += ht;
    }
    const double mean = sum / static_cast<double>(b.t.size());
    REQUIRE(hi / mean - 1 < 0.15);
    REQUIRE(1 - lo / mean < 0.15);
}

TEST_CASE("indefinite bump height strictly decreases", "[bump]") {
    const BumpEvolution b = bump_evolution(1, 0, -1, +1, 0.14, 480, 9, 0.10);
    for (std::size_t k = 1; k < b.height.size(); ++k) REQUIRE(b.height[k] < b.height[k - 1]);
}

TEST_CASE("degenerate quadratic forms are flagged but still run", "[bump]") {
    const BumpEvolution b = bump_evolution(1, 0, 0, +1, 0.05, 96, 5, 0.05);
    REQUIRE(b.degenerate);
    REQUIRE(b.t.size() == 5);
}

// ---------------------------------------------------------------------------
// Stochastic PDE
// ---------------------------------------------------------------------------

namespace {

struct AveragedGrowth {
    std::vector<double> t, var;
    bool aborted = false;
};

AveragedGrowth averaged_growth(const SpdeParams& par, int n, double T, double dt, int reps) {
    AveragedGrowth out;
    const ContinuumField f0(n, {0, 0});
    for (int r = 0; r < reps; ++r) {
        const SpdeResult res = spde_run(par, f0, T, 100 + static_cast<uint64_t>(r), dt);
        if (res.aborted) {
            out.aborted = true;
            return out;
        }
        if (r == 0) {
            out.t = res.times;
            out.var = res.variance;
        } else {
            for (std::size_t k = 0; k < out.var.size(); ++k) out.var[k] += res.variance[k];
        }
    }
    for (double& v : out.var) v /= reps;
    return out;
}

} // namespace

TEST_CASE("Edwards-Wilkinson roughening is logarithmic", "[spde]") {
    const int n = 64;
    SpdeParams p;
    p.nu = 1;
    p.amplitude = 1.0;
    p.corr_len = 1.0 / n;
    const double dt = 0.4 * 0.25 / (p.nu * n * n);
    const AveragedGrowth g = averaged_growth(p, n, 0.02, dt, 8);
    REQUIRE_FALSE(g.aborted);
    const ExponentEstimate fit = fit_exponent(g.t, g.var, 0, g.t.size());
    REQUIRE(fit.model == "log");
    REQUIRE(fit.r2_log >= 0.95);
}

TEST_CASE("anisotropic nonlinearity keeps logarithmic roughening", "[spde]") {
    const int n = 64;
    SpdeParams p;
    p.nu = 1;
    p.h11 = 2.0;
    p.h22 = -2.0;
    p.amplitude = 1.0;
    p.corr_len = 1.0 / n;
    const double dt = 0.4 * 0.25 / (p.nu * n * n);
    const AveragedGrowth g = averaged_growth(p, n, 0.02, dt, 8);
    REQUIRE_FALSE(g.aborted);
    const ExponentEstimate fit = fit_exponent(g.t, g.var, 0, g.t.size());
    REQUIRE(fit.model == "log");
    REQUIRE(fit.r2_log > fit.r2_power);
}

TEST_CASE("isotropic nonlinearity shows power-law roughening", "[spde]") {
    const int n = 64;
    SpdeParams p;
    p.nu = 1;
    p.h11 = 2.2;
    p.h22 = 2.2;
    p.amplitude = 1.0;
    p.corr_len = 1.0 / n;
    const double dt = 0.15 * 0.25 / (p.nu * n * n);
    const AveragedGrowth g = averaged_growth(p, n, 0.003, dt, 8);
    REQUIRE_FALSE(g.aborted);
    const ExponentEstimate fit = fit_exponent(g.t, g.var, 0, g.t.size());
    REQUIRE(fit.model == "power");
    REQUIRE(fit.beta >= 0.15);
    REQUIRE(fit.beta <= 0.33);
}

TEST_CASE("zero-noise spde_run is the discrete heat equation", "[spde]") {
    const int n = 64;
    SpdeParams p;
    p.nu = 0.5;
    const double rate = p.nu * 4 * kPi * kPi; // k = (1, 0)
    const auto f0 = sampled_field(n, {0, 0},
                                  [](double x, double) { return 0.01 * std::sin(2 * kPi * x); });
    const double T = 0.5 / rate;
    const SpdeResult res = spde_run(p, f0, T, 1);
    REQUIRE_FALSE(res.aborted);
    const double rhat =
        -std::log(field_variance(res.psi) / field_variance(f0)) / (2 * res.last_stable_time);
    REQUIRE(rhat == Catch::Approx(rate).epsilon(0.02));
}

TEST_CASE("strong isotropic coupling aborts with the last stable time", "[spde]") {
    const int n = 64;
    SpdeParams p;
    p.nu = 0.25;
    p.h11 = 4.0;
    p.h22 = 4.0;
    p.amplitude = 1.0;
    p.corr_len = 1.0 / n;
    const SpdeResult res = spde_run(p, ContinuumField(n, {0, 0}), 0.1, 7);
    REQUIRE(res.aborted);
    REQUIRE(res.last_stable_time > 0);
    REQUIRE(res.last_stable_time < 0.1);
}

TEST_CASE("spde_run validates its parameters", "[spde]") {
    const ContinuumField f0(32, {0, 0});
    SpdeParams p;
    p.nu = -1;
    REQUIRE_THROWS_AS(spde_run(p, f0, 0.1, 1), std::invalid_argument);
    p.nu = 1;
    p.amplitude = 1;
    p.corr_len = 0.001; // below one mesh cell
    REQUIRE_THROWS_AS(spde_run(p, f0, 0.1, 1), std::invalid_argument);
    p.corr_len = 1.0 / 32;
    REQUIRE_THROWS_AS(spde_run(p, f0, 0.1, 1, 1.0), std::invalid_argument); // dt above CFL
    REQUIRE_THROWS_AS(spde_run(p, f0, -0.1, 1), std::invalid_argument);
}
