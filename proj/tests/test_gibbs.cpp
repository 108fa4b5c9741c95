#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <queue>

#include "dimerlab/enumerate.hpp"
#include "dimerlab/gibbs.hpp"
#include "dimerlab/kasteleyn.hpp"

using namespace dimerlab;

namespace {

// Lobachevsky function L(x) = -int_0^x log|2 sin t| dt, with the log
// singularity at 0 split off analytically so plain Simpson converges fast;
// used as an independent closed-form route to the surface tension.
double lobachevsky(double x) {
    if (x == 0) return 0;
    // int_0^x log(2t) dt = x log(2x) - x; the remainder log(sin t / t) is
    // smooth on [0, pi)
    const int n = 4000;
    double smooth = 0;
    auto f = [](double t) { return t < 1e-12 ? 0.0 : std::log(std::sin(t) / t); };
    for (int i = 0; i < n; ++i) {
        const double t0 = x * i / n, t1 = x * (i + 1) / n;
        smooth += (t1 - t0) / 6 * (f(t0) + 4 * f(0.5 * (t0 + t1)) + f(t1));
    }
    return -(x * std::log(2 * x) - x + smooth);
}

double sigma_oracle(const Slope& rho) {
    const double pi = 3.14159265358979323846;
    const double r3 = 1 - rho.rho1 - rho.rho2;
    return -(lobachevsky(pi * rho.rho1) + lobachevsky(pi * rho.rho2) + lobachevsky(pi * r3)) / pi;
}

HeightField normalized(const HeightField& hf) {
    HeightField out = hf;
    const int64_t off = out.h[0];
    for (auto& v : out.h) v -= off;
    return out;
}

} // namespace

TEST_CASE("free energy: limits, symmetry, quadrature") {
    CHECK(std::abs(free_energy(1e-3, 1e-3)) < 1e-5);
    CHECK(free_energy(2.0, 0.7) == Catch::Approx(free_energy(0.7, 2.0)).margin(1e-8));
    CHECK(free_energy(1.0, 1.0) == Catch::Approx(0.3230659669).margin(1e-7));
}

TEST_CASE("torus dimer counts match exhaustive enumeration") {
    CHECK(torus_dimer_count(2, 3) == Catch::Approx(static_cast<double>(count_torus_all_windings(2, 3))).margin(1e-6));
    CHECK(torus_dimer_count(3, 3) == Catch::Approx(static_cast<double>(count_torus_all_windings(3, 3))).margin(1e-6));
    CHECK(torus_dimer_count(3, 4) == Catch::Approx(static_cast<double>(count_torus_all_windings(3, 4))).margin(1e-6));
    CHECK(torus_dimer_count(4, 4) == Catch::Approx(static_cast<double>(count_torus_all_windings(4, 4))).margin(1e-6));
}

TEST_CASE("free energy agrees with finite-torus log counts extrapolated in L") {
    const double F = free_energy(1.0, 1.0);
    const double x6 = std::log(torus_dimer_count(6, 6)) / 36;
    const double x8 = std::log(torus_dimer_count(8, 8)) / 64;
    // Richardson in 1/L^2
    const double extrap = (64 * x8 - 36 * x6) / (64 - 36);
    CHECK(std::abs(extrap - F) < 5e-4);
    CHECK(std::abs(extrap - F) < std::abs(x8 - F)); // extrapolation helps
}

TEST_CASE("weight densities are the gradient of the free energy") {
    for (auto [a, b] : {std::pair{1.3, 0.8}, {0.6, 1.9}, {1.0, 1.0}}) {
        const double h = 1e-4;
        const Slope g = weight_densities(a, b);
        const double da = (free_energy(a * std::exp(h), b) - free_energy(a * std::exp(-h), b)) / (2 * h);
        const double db = (free_energy(a, b * std::exp(h)) - free_energy(a, b * std::exp(-h))) / (2 * h);
        CHECK(g.rho1 == Catch::Approx(da).margin(5e-5));
        CHECK(g.rho2 == Catch::Approx(db).margin(5e-5));
    }
}

TEST_CASE("winding class counts match exhaustive enumeration") {
    for (int N : {1, 2})
        for (int K = 0; K <= 3; ++K) {
            const auto exact = enumerate_torus({3, 3, N}, K).size();
            CHECK(winding_class_count(3, 3, N, K) ==
                  Catch::Approx(static_cast<double>(exact)).margin(1e-6));
        }
    CHECK(winding_class_count(5, 5, 2, 2) ==
          Catch::Approx(static_cast<double>(enumerate_torus({5, 5, 2}, 2).size())).margin(1e-4));
}

TEST_CASE("surface tension: duality, symmetry, closed-form oracle") {
    const auto st = surface_tension({1.0 / 3, 1.0 / 3});
    CHECK(st.duality_residual < 1e-6);
    CHECK(std::abs(st.log_a) < 1e-9); // symmetric point has unit weights
    CHECK(std::abs(st.log_b) < 1e-9);
    CHECK(st.sigma == Catch::Approx(sigma_oracle({1.0 / 3, 1.0 / 3})).margin(1e-6));

    const auto p = surface_tension({0.2, 0.45}), q = surface_tension({0.45, 0.2});
    CHECK(p.sigma == Catch::Approx(q.sigma).margin(1e-8));
    CHECK(p.sigma == Catch::Approx(sigma_oracle({0.2, 0.45})).margin(1e-6));

    CHECK_THROWS(surface_tension({0.5, 0.4995}));
}

TEST_CASE("surface tension Hessian: cotangent oracle and step robustness") {
    const double pi = 3.14159265358979323846;
    for (Slope rho : {Slope{1.0 / 3, 1.0 / 3}, {0.2, 0.45}, {0.55, 0.15}}) {
        const auto st = surface_tension(rho);
        const double r3 = 1 - rho.rho1 - rho.rho2;
        const double c1 = 1 / std::tan(pi * rho.rho1), c2 = 1 / std::tan(pi * rho.rho2),
                     c3 = 1 / std::tan(pi * r3);
        CHECK(st.s11 == Catch::Approx(pi * (c1 + c3)).margin(1e-4));
        CHECK(st.s12 == Catch::Approx(pi * c3).margin(1e-4));
        CHECK(st.s22 == Catch::Approx(pi * (c2 + c3)).margin(1e-4));
        const auto half = surface_tension(rho, 1.25e-4);
        CHECK(std::abs(half.s11 - st.s11) < 1e-4);
        CHECK(std::abs(half.s12 - st.s12) < 1e-4);
        CHECK(std::abs(half.s22 - st.s22) < 1e-4);
    }
}

TEST_CASE("surface tension is convex on an interior grid") {
    const int n = 20;
    int tested = 0;
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            const Slope rho{i / static_cast<double>(n), j / static_cast<double>(n)};
            if (!rho.in_interior(0.02)) continue;
            const auto st = surface_tension(rho);
            // smallest eigenvalue of the 2x2 symmetric Hessian
            const double tr = st.s11 + st.s22;
            const double disc = std::sqrt((st.s11 - st.s22) * (st.s11 - st.s22) + 4 * st.s12 * st.s12);
            REQUIRE((tr - disc) / 2 > 0);
            ++tested;
        }
    CHECK(tested > 100);
}

TEST_CASE("surface tension matches winding-class log counts extrapolated in L") {
    // second, fully independent route: exact class counts at (1/3, 1/3) for
    // L in {6, 9, 12}, fitted to -sigma + (c1 log L + c0) / L^2
    double x[3];
    const int Ls[3] = {6, 9, 12};
    for (int i = 0; i < 3; ++i) {
        const int L = Ls[i];
        x[i] = std::log(winding_class_count(L, L, L / 3, L / 3)) / (static_cast<double>(L) * L);
    }
    double A[3][3], rhs[3];
    for (int i = 0; i < 3; ++i) {
        const double L = Ls[i];
        A[i][0] = 1;
        A[i][1] = std::log(L) / (L * L);
        A[i][2] = 1 / (L * L);
        rhs[i] = x[i];
    }
    for (int c = 0; c < 3; ++c) {
        int p = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        std::swap(A[c], A[p]);
        std::swap(rhs[c], rhs[p]);
        for (int r = 0; r < 3; ++r)
            if (r != c) {
                const double f = A[r][c] / A[c][c];
                for (int cc = 0; cc < 3; ++cc) A[r][cc] -= f * A[c][cc];
                rhs[r] -= f * rhs[c];
            }
    }
    const double minus_sigma = rhs[0] / A[0][0];
    const auto st = surface_tension({1.0 / 3, 1.0 / 3});
    CHECK(std::abs(-minus_sigma - st.sigma) < 1e-4);
}

TEST_CASE("sample_gibbs matches exact enumeration (chi-squared)") {
    const auto states = enumerate_torus({3, 3, 1}, 1);
    REQUIRE(states.size() == 21);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i) index[state_key(states[i])] = i;

    const std::size_t n_samples = 100000;
    auto ens = sample_gibbs({1.0 / 3, 1.0 / 3}, {3, 3, 1}, 200, 7, n_samples, 3);
    std::vector<int64_t> counts(states.size(), 0);
    for (const auto& hf : ens.samples) {
        auto it = index.find(state_key(normalized(hf)));
        REQUIRE(it != index.end());
        ++counts[it->second];
    }
    const double expect = static_cast<double>(n_samples) / static_cast<double>(states.size());
    double chi2 = 0;
    for (int64_t c : counts) chi2 += (c - expect) * (c - expect) / expect;
    // chi-squared critical value for p = 0.01 at 20 degrees of freedom
    CHECK(chi2 < 37.566);
}

TEST_CASE("sample_gibbs determinism, forced slope, burn-in warning") {
    auto a = sample_gibbs({1.0 / 3, 1.0 / 3}, {6, 6, 2}, 400, 99, 4);
    auto b = sample_gibbs({1.0 / 3, 1.0 / 3}, {6, 6, 2}, 400, 99, 4);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].h == b.samples[i].h);
    CHECK(a.diag.warning.empty());

    // windings force the empirical slope exactly
    const auto sl = measured_slope(a.samples.back());
    CHECK(sl.rho1 == Catch::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(sl.rho2 == Catch::Approx(1.0 / 3).epsilon(1e-14));

    auto c = sample_gibbs({1.0 / 3, 1.0 / 3}, {6, 6, 2}, 10, 99, 1);
    CHECK(!c.diag.warning.empty());
}

TEST_CASE("Glauber generator is symmetric and irreducible on a winding class") {
    const auto states = enumerate_torus({3, 3, 1}, 1);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i) index[state_key(states[i])] = i;
    const std::size_t n = states.size();
    std::vector<std::vector<int>> Q(n, std::vector<int>(n, 0));
    for (std::size_t u = 0; u < n; ++u)
        for (const auto& fl : admissible_flips(states[u])) {
            HeightField next = states[u];
            REQUIRE(try_flip(next, fl.m, fl.s, fl.dir));
            auto it = index.find(state_key(normalized(next)));
            REQUIRE(it != index.end());
            ++Q[u][it->second];
        }
    // rate-1 flips: exact detailed balance against the uniform measure is
    // symmetry of the generator
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) REQUIRE(Q[u][v] == Q[v][u]);
    // irreducibility via breadth-first search
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> bfs;
    bfs.push(0);
    seen[0] = 1;
    while (!bfs.empty()) {
        const std::size_t u = bfs.front();
        bfs.pop();
        for (std::size_t v = 0; v < n; ++v)
            if (Q[u][v] && !seen[v]) {
                seen[v] = 1;
                bfs.push(v);
            }
    }
    for (std::size_t u = 0; u < n; ++u) REQUIRE(seen[u] == 1);
}

TEST_CASE("height variance profile: zero at r=0, log growth, truncation") {
    auto ens = sample_gibbs({1.0 / 3, 1.0 / 3}, {36, 36, 12}, 12960, 5, 48);
    auto vp = height_variance_profile(ens, 40, 2, 9);
    CHECK(!vp.warning.empty()); // 40 > L2/4 = 9
    REQUIRE(vp.r.front() == 0);
    CHECK(vp.variance.front() == 0.0);
    REQUIRE(vp.r.back() == 9);
    for (std::size_t i = 2; i < vp.variance.size(); ++i)
        CHECK(vp.variance[i] >= vp.variance[i - 1] - 3 * (vp.jackknife[i] + vp.jackknife[i - 1]));
    CHECK(vp.log_fit.slope > 0);
    CHECK(vp.log_fit.r2 > 0.9);
}
