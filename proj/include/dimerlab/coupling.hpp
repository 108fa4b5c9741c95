#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fit.hpp"
#include "geometry.hpp"
#include "glauber.hpp"
#include "height.hpp"
#include "reversible.hpp"
#include "rng.hpp"

namespace dimerlab {

// ---------------------------------------------------------------------------
// Domains for mixing-time experiments: the periodic torus (a winding class of
// height fields) and the a x b x c hexagon (boxed plane partitions, i.e.
// lozenge tilings of the hexagon with fixed frozen boundary).
// ---------------------------------------------------------------------------

enum class DomainKind { torus, hexagon };

struct DomainSpec {
    DomainKind kind = DomainKind::torus;
    int L = 0;                       // torus: L x L periods
    Slope slope{1.0 / 3, 1.0 / 3};   // torus: affine class
    int a = 0, b = 0, c = 0;         // hexagon sides

    static DomainSpec torus_spec(int L, Slope rho) {
        DomainSpec d;
        d.kind = DomainKind::torus;
        d.L = L;
        d.slope = rho;
        return d;
    }
    static DomainSpec hexagon_spec(int a, int b, int c) {
        DomainSpec d;
        d.kind = DomainKind::hexagon;
        d.a = a;
        d.b = b;
        d.c = c;
        return d;
    }

    /// Diameter-like linear size used for the scaling fit.
    int linear_size() const {
        return kind == DomainKind::torus ? L : std::max({a, b, c});
    }
    int sites() const { return kind == DomainKind::torus ? L * L : a * b; }

    void validate() const {
        if (kind == DomainKind::torus) {
            if (L < 2) throw std::invalid_argument("DomainSpec: torus needs L >= 2");
            slope.require_interior("DomainSpec");
        } else {
            if (a < 1 || b < 1 || c < 1)
                throw std::invalid_argument("DomainSpec: hexagon sides must be positive");
        }
    }
};

// ---------------------------------------------------------------------------
// Torus extremes.  A winding class is invariant under global shifts, so the
// relevant sandwich is over the anchored class {h : h(0,0) = flat(0,0)},
// which is a finite lattice.  Its pointwise maximum (minimum) is reached by
// starting all unanchored sites at flat + D (flat - D) and iterating the
// single-site admissibility bounds to a fixed point; D >= L1 + L2 exceeds
// the anchored deviation bound, so the start dominates every anchored class
// member and the fixed point is the true extreme.  Class members with other
// anchor values are global shifts of sandwiched ones, which the coupling
// absorbs by detecting coalescence as a constant difference field.
// ---------------------------------------------------------------------------

inline HeightField torus_anchored_extreme(const HeightField& flat, int64_t D, bool upper) {
    HeightField hf = flat;
    for (std::size_t i = 1; i < hf.h.size(); ++i) hf.h[i] += upper ? D : -D;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int m = 0; m < hf.geom.L1; ++m)
            for (int64_t s = 0; s < hf.geom.L2; ++s) {
                if (m == 0 && s == 0) continue; // anchor
                const auto [lo, hi] = flip_bounds(hf, m, s);
                int64_t& v = hf.at(m, s);
                if (upper && v > hi) {
                    v = hi;
                    changed = true;
                } else if (!upper && v < lo) {
                    v = lo;
                    changed = true;
                }
            }
    }
    if (auto err = height_gradient_violation(hf); !err.empty())
        throw std::logic_error("torus_anchored_extreme: " + err);
    return hf;
}

// ---------------------------------------------------------------------------
// Boxed plane partitions: h(i,j) in [0,c] on an a x b grid, weakly decreasing
// along rows and columns.  These are in bijection with lozenge tilings of the
// a x b x c hexagon.  The full and empty boxes are the maximal and minimal
// elements of the pointwise order.
// ---------------------------------------------------------------------------

struct BoxedPartition {
    int a = 0, b = 0, c = 0;
    std::vector<int> h; // a*b, row-major

    BoxedPartition() = default;
    BoxedPartition(int a_, int b_, int c_, int fill)
        : a(a_), b(b_), c(c_), h(static_cast<std::size_t>(a_) * b_, fill) {}

    int& at(int i, int j) { return h[static_cast<std::size_t>(i) * b + j]; }
    int at(int i, int j) const { return h[static_cast<std::size_t>(i) * b + j]; }

    /// Conditional support of h(i,j) given the rest: [lo, hi].
    int site_lo(int i, int j) const {
        return std::max(i + 1 < a ? at(i + 1, j) : 0, j + 1 < b ? at(i, j + 1) : 0);
    }
    int site_hi(int i, int j) const {
        return std::min(i > 0 ? at(i - 1, j) : c, j > 0 ? at(i, j - 1) : c);
    }

    bool valid() const {
        for (int i = 0; i < a; ++i)
            for (int j = 0; j < b; ++j) {
                if (at(i, j) < 0 || at(i, j) > c) return false;
                if (i + 1 < a && at(i + 1, j) > at(i, j)) return false;
                if (j + 1 < b && at(i, j + 1) > at(i, j)) return false;
            }
        return true;
    }
};

inline BoxedPartition full_box(int a, int b, int c) { return {a, b, c, c}; }
inline BoxedPartition empty_box(int a, int b, int c) { return {a, b, c, 0}; }

/// Heat-bath refresh at (i,j): resample uniformly on the conditional support
/// via the quantile transform.  For nested supports [lo1,hi1] <= [lo2,hi2]
/// (componentwise) and shared u the outputs stay ordered, so the coupling is
/// monotone even when the support has more than two values.
inline void heat_bath(BoxedPartition& bp, int i, int j, double u) {
    const int lo = bp.site_lo(i, j), hi = bp.site_hi(i, j);
    bp.at(i, j) = std::min(hi, lo + static_cast<int>(u * (hi - lo + 1)));
}

// ---------------------------------------------------------------------------
// Grand monotone coupling: run the maximal and minimal chains with shared
// (site, uniform) randomness and report the coalescence time in sweeps
// (continuous time, one heat-bath refresh per site per unit time).
// ---------------------------------------------------------------------------

struct CouplingRun {
    double sweeps = 0;   // coalescence time, or the cap if censored
    bool coalesced = false;
};

inline CouplingRun torus_coupling_run(const DomainSpec& dom, Rng& rng, double cap_sweeps) {
    const HeightField flat = particles_to_height(make_flat(dom.slope, {dom.L, dom.L, 0}));
    HeightField up = torus_anchored_extreme(flat, dom.L + dom.L, true);
    HeightField dn = torus_anchored_extreme(flat, dom.L + dom.L, false);
    const int64_t faces = flat.geom.faces();
    const int64_t cap_steps = static_cast<int64_t>(cap_sweeps * static_cast<double>(faces));
    for (int64_t step = 1; step <= cap_steps; ++step) {
        const int64_t f = static_cast<int64_t>(rng.below(static_cast<uint64_t>(faces)));
        const int m = static_cast<int>(f / flat.geom.L2);
        const int64_t s = f % flat.geom.L2;
        const double u = rng.uniform();
        heat_bath(up, m, s, u);
        heat_bath(dn, m, s, u);
        assert(up.at(m, s) >= dn.at(m, s));
        if (step % faces == 0) {
            // coalesced once the difference field is a global constant
            const int64_t diff0 = up.h[0] - dn.h[0];
            bool flat_diff = true;
            for (std::size_t i = 1; i < up.h.size() && flat_diff; ++i)
                flat_diff = (up.h[i] - dn.h[i]) == diff0;
            if (flat_diff)
                return {static_cast<double>(step) / static_cast<double>(faces), true};
        }
    }
    return {cap_sweeps, false};
}

inline CouplingRun hexagon_coupling_run(const DomainSpec& dom, Rng& rng, double cap_sweeps) {
    BoxedPartition up = full_box(dom.a, dom.b, dom.c);
    BoxedPartition dn = empty_box(dom.a, dom.b, dom.c);
    const int64_t sites = static_cast<int64_t>(dom.a) * dom.b;
    const int64_t cap_steps = static_cast<int64_t>(cap_sweeps * static_cast<double>(sites));
    for (int64_t step = 1; step <= cap_steps; ++step) {
        const int64_t f = static_cast<int64_t>(rng.below(static_cast<uint64_t>(sites)));
        const int i = static_cast<int>(f / dom.b);
        const int j = static_cast<int>(f % dom.b);
        const double u = rng.uniform();
        heat_bath(up, i, j, u);
        heat_bath(dn, i, j, u);
        assert(up.at(i, j) >= dn.at(i, j));
        if (up.h == dn.h)
            return {static_cast<double>(step) / static_cast<double>(sites), true};
    }
    return {cap_sweeps, false};
}

inline CouplingRun coupling_run(const DomainSpec& dom, Rng& rng, double cap_sweeps) {
    dom.validate();
    return dom.kind == DomainKind::torus ? torus_coupling_run(dom, rng, cap_sweeps)
                                         : hexagon_coupling_run(dom, rng, cap_sweeps);
}

// ---------------------------------------------------------------------------
// Mixing-time ladder.
// ---------------------------------------------------------------------------

struct MixingEstimate {
    std::vector<DomainSpec> ladder;
    std::vector<double> median, q25, q75;   // coupling sweeps per size
    std::vector<int> censored_runs;         // per size
    double exponent = 0, exponent_stderr = 0;
    bool censored = false;
    std::string warning;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& xs, double q) {
    const double pos = q * (static_cast<double>(xs.size()) - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < xs.size() ? xs[i] * (1 - frac) + xs[i + 1] * frac : xs.back();
}

} // namespace detail

/// Coupling times of the grand monotone coupling over a ladder of domains,
/// with a log-log fit of the median time against linear size.  Only the
/// heat-bath (Glauber) dynamics is monotone site by site, so that is the
/// chain being coupled; tower dynamics is rejected.
inline MixingEstimate coupling_time(const std::vector<DomainSpec>& ladder,
                                    ReversibleDynamics dynamics, int replicas, uint64_t seed,
                                    double cap_sweeps = 1e5) {
    if (dynamics != ReversibleDynamics::glauber)
        throw std::invalid_argument("coupling_time: monotone coupling requires glauber heat-bath");
    if (ladder.empty()) throw std::invalid_argument("coupling_time: empty ladder");
    if (replicas < 1) throw std::invalid_argument("coupling_time: replicas must be positive");

    MixingEstimate est;
    est.ladder = ladder;
    std::vector<double> log_size, log_med;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const DomainSpec& dom = ladder[k];
        dom.validate();
        std::vector<double> times;
        int censored_here = 0;
        for (int r = 0; r < replicas; ++r) {
            Rng rng = Rng::labeled(seed, "coupling", k * 1000 + static_cast<std::size_t>(r));
            const CouplingRun run = coupling_run(dom, rng, cap_sweeps);
            times.push_back(run.sweeps);
            if (!run.coalesced) ++censored_here;
        }
        std::sort(times.begin(), times.end());
        est.median.push_back(detail::quantile_sorted(times, 0.5));
        est.q25.push_back(detail::quantile_sorted(times, 0.25));
        est.q75.push_back(detail::quantile_sorted(times, 0.75));
        est.censored_runs.push_back(censored_here);
        if (censored_here > 0) est.censored = true;
        // the median is trustworthy as long as fewer than half the runs hit the cap
        if (2 * censored_here < replicas) {
            log_size.push_back(std::log(static_cast<double>(dom.linear_size())));
            log_med.push_back(std::log(est.median.back()));
        }
    }
    if (est.censored) est.warning = "some coupling runs hit the time cap (censored)";
    if (log_size.size() >= 2) {
        const LinearFit fit = linear_fit(log_size, log_med);
        est.exponent = fit.slope;
        est.exponent_stderr = fit.slope_stderr;
    } else {
        est.warning += std::string(est.warning.empty() ? "" : "; ") +
                       "too few uncensored sizes for an exponent fit";
    }
    return est;
}

} // namespace dimerlab
