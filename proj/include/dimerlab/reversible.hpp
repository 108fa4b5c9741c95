#pragma once

// Reversible equilibrium dynamics on the torus: single Glauber flips and
// tower moves (a particle jumping n levels moves n aligned heights by the
// same +-1) with rate 1/n, plus the Green-Kubo static mobility estimator.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerlab/gibbs.hpp"
#include "dimerlab/growth.hpp"
#include "dimerlab/interlaced.hpp"
#include "dimerlab/rng.hpp"

namespace dimerlab {

enum class ReversibleDynamics { glauber, tower };

/// Rate of a length-n tower move.
inline double tower_rate(int64_t n) {
    if (n < 1) throw std::invalid_argument("tower_rate: n must be >= 1");
    return 1.0 / static_cast<double>(n);
}

/// Move particle j of column m by n levels in direction sign (+1 up, -1
/// down) if admissible; returns false (configuration untouched) otherwise.
/// A length-n move shifts the height by sign at the n swept faces.
inline bool tower_move(InterlacedConfig& cfg, int m, int j, int64_t n, int sign) {
    if (n < 1) return false;
    const int64_t cap = sign > 0 ? up_capacity(cfg, m, j) : down_capacity(cfg, m, j);
    if (n > cap) return false;
    apply_jump(cfg, m, j, sign > 0 ? n : -n);
    return true;
}

/// Event-driven simulation of the reversible dynamics.  Glauber uses only
/// n = 1 moves at rate 1 in both directions; tower dynamics allows every
/// admissible length n at rate 1/n.  Rates are recomputed per event (the
/// simulator targets modest equilibrium domains, not the growth budget).
class ReversibleSim {
public:
    ReversibleSim(InterlacedConfig cfg, ReversibleDynamics dyn) : cfg_(std::move(cfg)), dyn_(dyn) {}

    const InterlacedConfig& config() const { return cfg_; }
    double time() const { return t_; }
    int64_t events() const { return events_; }
    int64_t height_sum_delta() const { return dh_; }

    /// Total event rate of the current configuration.
    double total_rate() const {
        double r = 0;
        for (int m = 0; m < cfg_.geom.L1; ++m)
            for (int j = 0; j < cfg_.geom.N; ++j)
                r += dir_weight(up_capacity(cfg_, m, j)) + dir_weight(down_capacity(cfg_, m, j));
        return r;
    }

    /// Advance by one event; false if no move is admissible.
    bool step(Rng& rng) {
        const double total = total_rate();
        if (total <= 0) return false;
        t_ += rng.exponential(total);
        apply_event(rng, total);
        return true;
    }

    /// Advance the clock to time T (events strictly before T applied).
    void run_until(double T, Rng& rng) {
        while (t_ < T) {
            const double total = total_rate();
            if (total <= 0) {
                t_ = T;
                return;
            }
            const double dt = rng.exponential(total);
            if (t_ + dt > T) {
                t_ = T;
                return;
            }
            t_ += dt;
            apply_event(rng, total);
        }
    }

private:
    double dir_weight(int64_t cap) const {
        if (dyn_ == ReversibleDynamics::glauber) return cap >= 1 ? 1.0 : 0.0;
        double h = 0;
        for (int64_t n = 1; n <= cap; ++n) h += tower_rate(n);
        return h;
    }

    void apply_event(Rng& rng, double total) {
        const auto& g = cfg_.geom;
        double u = rng.uniform() * total;
        int lm = -1, lj = -1, lsign = 0; // last admissible, for roundoff spill
        for (int m = 0; m < g.L1; ++m)
            for (int j = 0; j < g.N; ++j)
                for (int sign : {+1, -1}) {
                    const int64_t cap =
                        sign > 0 ? up_capacity(cfg_, m, j) : down_capacity(cfg_, m, j);
                    if (cap < 1) continue;
                    const double w = dir_weight(cap);
                    if (u >= w) {
                        u -= w;
                        lm = m;
                        lj = j;
                        lsign = sign;
                        continue;
                    }
                    // pick the length: n with probability (1/n) / weight
                    int64_t n = 1;
                    if (dyn_ == ReversibleDynamics::tower)
                        while (n < cap && u >= tower_rate(n)) u -= tower_rate(n), ++n;
                    apply_jump(cfg_, m, j, sign > 0 ? n : -n);
                    dh_ += sign * n;
                    ++events_;
                    return;
                }
        // floating-point spill past the last weight: use the last move, n=1
        apply_jump(cfg_, lm, lj, lsign);
        dh_ += lsign;
        ++events_;
    }

    InterlacedConfig cfg_;
    ReversibleDynamics dyn_;
    double t_ = 0;
    int64_t events_ = 0;
    int64_t dh_ = 0;
};

/// Continuous-time trajectory of the reversible dynamics, in the same
/// record format as the growth runs.
inline TrajectoryRecord reversible_run(const InterlacedConfig& cfg0, ReversibleDynamics dyn,
                                       double T, const std::vector<double>& obs_times,
                                       const std::vector<int64_t>& tracked, uint64_t seed) {
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.tracked_faces = tracked;
    ReversibleSim sim(cfg0, dyn);
    Rng rng = Rng::labeled(seed, "reversible", 0);
    auto snapshot = [&](double t) {
        rec.times.push_back(t);
        rec.events_at.push_back(sim.events());
        std::vector<int64_t> row;
        row.reserve(tracked.size());
        for (int64_t f : tracked)
            row.push_back(face_height(sim.config(), static_cast<int>(f / cfg0.geom.L2),
                                      f % cfg0.geom.L2));
        rec.heights.push_back(std::move(row));
    };
    for (double t : obs_times) {
        if (t > T) break;
        sim.run_until(t, rng);
        snapshot(t);
    }
    sim.run_until(T, rng);
    snapshot(T);
    rec.events = sim.events();
    rec.height_sum_delta = sim.height_sum_delta();
    rec.jammed = sim.total_rate() <= 0;
    rec.final_cfg = sim.config();
    return rec;
}

struct MobilityEstimate {
    double mean = 0;
    double stderr_mean = 0;
    std::vector<double> per_sample;
    std::string warning;
};

/// Static Green-Kubo estimator of the mobility at slope rho:
/// mu_hat = (1 / 2|Lambda|) E_pi[ sum_j U_j(U_j+1)/2 + D_j(D_j+1)/2 ],
/// where U, D are the up/down tower capacities: a length-n tower carries
/// rate 1/n and moves the summed height by n, contributing n to the static
/// sum.  (The time-integral term vanishes by the gradient condition, which
/// tower_imbalance asserts exactly.)
inline MobilityEstimate mobility_estimate(const Slope& rho, const TorusGeometry& geom,
                                          std::size_t samples, uint64_t seed,
                                          int64_t burn_in = -1) {
    if (burn_in < 0) burn_in = 10 * geom.faces();
    MobilityEstimate est;
    if (samples < 8) est.warning = "ensemble too small for a stable stderr (need >= 8 samples)";
    auto ens = sample_gibbs(rho, geom, burn_in, seed, samples);
    const double faces = static_cast<double>(ens.geom.L1) * static_cast<double>(ens.geom.L2);
    for (const auto& hf : ens.samples) {
        auto cfg = height_to_particles(hf);
        double acc = 0;
        for (int m = 0; m < cfg.geom.L1; ++m)
            for (int j = 0; j < cfg.geom.N; ++j) {
                const double u = static_cast<double>(up_capacity(cfg, m, j));
                const double d = static_cast<double>(down_capacity(cfg, m, j));
                acc += u * (u + 1) / 2 + d * (d + 1) / 2;
            }
        est.per_sample.push_back(acc / (2 * faces));
    }
    const auto ms = mean_stderr(est.per_sample);
    est.mean = ms.mean;
    est.stderr_mean = ms.stderr;
    return est;
}

/// Number of admissible up-towers minus down-towers; deterministically zero
/// for every valid configuration (the gradient condition).
inline int64_t tower_imbalance(const InterlacedConfig& cfg) {
    int64_t up = 0, dn = 0;
    for (int m = 0; m < cfg.geom.L1; ++m)
        for (int j = 0; j < cfg.geom.N; ++j) {
            up += up_capacity(cfg, m, j);
            dn += down_capacity(cfg, m, j);
        }
    return up - dn;
}

} // namespace dimerlab
