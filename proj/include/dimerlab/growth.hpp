#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fit.hpp"
#include "gibbs.hpp"
#include "interlaced.hpp"
#include "rates.hpp"
#include "rng.hpp"

namespace dimerlab {

enum class Dynamics { longjump, corner };

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<int64_t> tracked_faces;           ///< face ids m*L2 + s
    std::vector<std::vector<int64_t>> heights;    ///< heights[time][face]
    std::vector<int64_t> events_at;               ///< cumulative events per observation
    int64_t events = 0;
    int64_t height_sum_delta = 0; ///< total height increase summed over all faces
    uint64_t seed = 0;
    bool jammed = false;
    InterlacedConfig final_cfg;

    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        os << "trajectory seed=" << seed << " events=" << events << " jammed=" << jammed
           << " dh=" << height_sum_delta << '\n';
        for (std::size_t i = 0; i < times.size(); ++i) {
            os << times[i] << " " << events_at[i];
            for (int64_t h : heights[i]) os << ' ' << h;
            os << '\n';
        }
        write_config(os, final_cfg);
        return os.str();
    }
};

/// Event-driven simulation of the growth dynamics.  Every admissible upward
/// destination carries rate exactly 1, so a particle's rate is its
/// up_capacity (long jumps) or min(up_capacity, 1) (corner growth), and a
/// uniform integer in [0, total) selects particle and jump length jointly.
class GrowthSim {
public:
    GrowthSim(InterlacedConfig cfg, Dynamics dyn) : cfg_(std::move(cfg)), dyn_(dyn) {
        const auto& g = cfg_.geom;
        tree_.reset(static_cast<std::size_t>(g.L1) * static_cast<std::size_t>(g.N));
        for (int m = 0; m < g.L1; ++m)
            for (int j = 0; j < g.N; ++j) tree_.set(leaf(m, j), rate(m, j));
    }

    const InterlacedConfig& config() const { return cfg_; }
    double time() const { return t_; }
    int64_t events() const { return events_; }
    int64_t height_sum_delta() const { return dh_; }
    int64_t total_rate() const { return tree_.total(); }

    /// Exact recount of every particle rate; true iff the tree agrees.
    bool rates_consistent() const {
        for (int m = 0; m < cfg_.geom.L1; ++m)
            for (int j = 0; j < cfg_.geom.N; ++j)
                if (tree_.get(leaf(m, j)) != rate(m, j)) return false;
        return true;
    }

    /// Advance by one event; false if the configuration is jammed.
    bool step(Rng& rng) {
        const int64_t total = tree_.total();
        if (total == 0) return false;
        t_ += rng.exponential(static_cast<double>(total));
        const int64_t u = static_cast<int64_t>(rng.below(static_cast<uint64_t>(total)));
        const auto [l, r] = tree_.locate(u);
        const int m = static_cast<int>(l) / cfg_.geom.N;
        const int j = static_cast<int>(l) % cfg_.geom.N;
        const int64_t n = (dyn_ == Dynamics::corner) ? 1 : r + 1;
        const int64_t x_old = cfg_.pos[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
        apply_jump(cfg_, m, j, n);
        ++events_;
        dh_ += n;
        refresh_around(m, j, x_old, x_old + n);
        return true;
    }

    /// Advance the clock to time T (events strictly before T applied).
    void run_until(double T, Rng& rng) {
        while (t_ < T) {
            const int64_t total = tree_.total();
            if (total == 0) {
                jammed_ = true;
                t_ = T;
                return;
            }
            const double dt = rng.exponential(static_cast<double>(total));
            if (t_ + dt > T) {
                t_ = T;
                return;
            }
            t_ += dt;
            const int64_t u = static_cast<int64_t>(rng.below(static_cast<uint64_t>(total)));
            const auto [l, r] = tree_.locate(u);
            const int m = static_cast<int>(l) / cfg_.geom.N;
            const int j = static_cast<int>(l) % cfg_.geom.N;
            const int64_t n = (dyn_ == Dynamics::corner) ? 1 : r + 1;
            const int64_t x_old = cfg_.pos[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
            apply_jump(cfg_, m, j, n);
            ++events_;
            dh_ += n;
            refresh_around(m, j, x_old, x_old + n);
        }
    }

    bool jammed() const { return jammed_; }

private:
    std::size_t leaf(int m, int j) const {
        return static_cast<std::size_t>(m) * static_cast<std::size_t>(cfg_.geom.N) +
               static_cast<std::size_t>(j);
    }

    int64_t rate(int m, int j) const {
        const int64_t c = up_capacity(cfg_, m, j);
        return (dyn_ == Dynamics::corner) ? (c > 0 ? 1 : 0) : c;
    }

    /// Refresh the rates that a jump of (m, j) from x_old to x_new can have
    /// touched: the particle, its own-column neighbors, and the wing-column
    /// particles near either endpoint (at most a handful; interlacement
    /// keeps wing columns empty strictly between the endpoints).
    void refresh_around(int m, int j, int64_t x_old, int64_t x_new) {
        const auto& g = cfg_.geom;
        std::set<std::size_t> leaves;
        const int N = g.N;
        for (int dj : {-1, 0, 1}) leaves.insert(leaf(m, ((j + dj) % N + N) % N));
        if (g.L1 > 1) {
            for (int c : {(m + g.L1 - 1) % g.L1, (m + 1) % g.L1}) {
                const auto& col = cfg_.pos[static_cast<std::size_t>(c)];
                for (int64_t x : {x_old, x_new}) {
                    const int64_t i0 = detail::first_geq(col, g.L2, x);
                    for (int64_t di = -2; di <= 1; ++di) {
                        const int64_t i = i0 + di;
                        const int64_t kk = detail::floor_div(i, N);
                        leaves.insert(leaf(c, static_cast<int>(i - kk * N)));
                    }
                }
            }
        }
        for (std::size_t l : leaves)
            tree_.set(l, rate(static_cast<int>(l) / N, static_cast<int>(l) % N));
    }

    InterlacedConfig cfg_;
    Dynamics dyn_;
    SumTree tree_;
    double t_ = 0;
    int64_t events_ = 0, dh_ = 0;
    bool jammed_ = false;
};

/// n_max of a particle (count of admissible upward destinations).
inline int64_t admissible_jumps(const InterlacedConfig& cfg, int m, int j) {
    return up_capacity(cfg, m, j);
}

inline std::vector<int64_t> default_tracked_faces(const TorusGeometry& g, int per_side = 4) {
    std::vector<int64_t> faces;
    for (int a = 0; a < per_side; ++a)
        for (int b = 0; b < per_side; ++b)
            faces.push_back(static_cast<int64_t>((a * g.L1 / per_side)) * g.L2 + (b * g.L2 / per_side));
    return faces;
}

inline TrajectoryRecord kmc_run(const InterlacedConfig& cfg0, double T,
                                const std::vector<double>& obs_times,
                                const std::vector<int64_t>& tracked, uint64_t seed,
                                Dynamics dyn = Dynamics::longjump) {
    if (auto v = validate(cfg0); !v.empty()) throw std::runtime_error("kmc_run: " + v.front().what);
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.tracked_faces = tracked;
    GrowthSim sim(cfg0, dyn);
    Rng rng = Rng::labeled(seed, "kmc", 0);
    auto snapshot = [&]() {
        std::vector<int64_t> hs;
        hs.reserve(tracked.size());
        for (int64_t f : tracked)
            hs.push_back(face_height(sim.config(), static_cast<int>(f / cfg0.geom.L2), f % cfg0.geom.L2));
        rec.heights.push_back(std::move(hs));
        rec.events_at.push_back(sim.events());
    };
    for (double tau : obs_times) {
        sim.run_until(std::min(tau, T), rng);
        rec.times.push_back(std::min(tau, T));
        snapshot();
        if (tau >= T) break;
    }
    if (rec.times.empty() || rec.times.back() < T) {
        sim.run_until(T, rng);
        rec.times.push_back(T);
        snapshot();
    }
    rec.events = sim.events();
    rec.height_sum_delta = sim.height_sum_delta();
    rec.jammed = sim.jammed();
    rec.final_cfg = sim.config();
    return rec;
}

inline TrajectoryRecord corner_growth_run(const InterlacedConfig& cfg0, double T,
                                          const std::vector<double>& obs_times,
                                          const std::vector<int64_t>& tracked, uint64_t seed) {
    return kmc_run(cfg0, T, obs_times, tracked, seed, Dynamics::corner);
}

struct VelocityEstimate {
    double mean = 0, stderr = 0;
    std::vector<double> per_replica;
    bool no_stderr = false;
};

/// Growth velocity (height increase per face per unit time) from Gibbs
/// initial conditions, averaged over faces and replicas.
inline VelocityEstimate measure_velocity(Slope rho, const TorusGeometry& geom, double T,
                                         int replicas, uint64_t seed,
                                         Dynamics dyn = Dynamics::longjump,
                                         int64_t burn_in = -1) {
    rho.require_interior("measure_velocity");
    if (burn_in < 0) burn_in = 10LL * geom.faces();
    VelocityEstimate est;
    for (int k = 0; k < replicas; ++k) {
        auto ens = sample_gibbs(rho, geom, burn_in, seed + 1000003ULL * (k + 1));
        auto cfg0 = height_to_particles(ens.samples.front());
        GrowthSim sim(std::move(cfg0), dyn);
        Rng rng = Rng::labeled(seed, "velocity", static_cast<uint64_t>(k));
        sim.run_until(T, rng);
        est.per_replica.push_back(static_cast<double>(sim.height_sum_delta()) /
                                  (static_cast<double>(geom.faces()) * T));
    }
    const auto ms = mean_stderr(est.per_replica);
    est.mean = ms.mean;
    est.stderr = ms.stderr;
    est.no_stderr = replicas < 2;
    return est;
}

struct FluctuationResult {
    std::vector<double> times;
    std::vector<double> variance;
    ExponentEstimate fit;
};

/// Var(h_x(t) - h_x(0)) over replicas and tracked faces, with power/log fits
/// over the latter half of the time grid.  `tracked_per_side` controls the
/// density of the tracked-face grid; raising it pools more (increasingly
/// correlated) faces into each variance estimate.
inline FluctuationResult measure_fluctuations(Dynamics dyn, Slope rho, const TorusGeometry& geom,
                                              const std::vector<double>& time_grid, int replicas,
                                              uint64_t seed, bool stationary_start = true,
                                              int64_t burn_in = -1, int tracked_per_side = 4) {
    if (time_grid.size() < 5) throw std::invalid_argument("measure_fluctuations: need >= 5 time points");
    if (burn_in < 0) burn_in = 10LL * geom.faces();
    const auto tracked = default_tracked_faces(geom, tracked_per_side);
    std::vector<std::vector<double>> deltas(time_grid.size()); // per time, pooled over replicas x faces
    for (int k = 0; k < replicas; ++k) {
        InterlacedConfig cfg0;
        if (stationary_start) {
            auto ens = sample_gibbs(rho, geom, burn_in, seed + 999983ULL * (k + 1));
            cfg0 = height_to_particles(ens.samples.front());
        } else {
            cfg0 = make_flat(rho, geom);
        }
        auto rec = kmc_run(cfg0, time_grid.back(), time_grid, tracked,
                           seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)), dyn);
        for (std::size_t i = 0; i < time_grid.size(); ++i)
            for (std::size_t f = 0; f < tracked.size(); ++f)
                deltas[i].push_back(static_cast<double>(rec.heights[i][f] - rec.heights[0][f]));
    }
    FluctuationResult res;
    res.times = time_grid;
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        double m = 0;
        for (double d : deltas[i]) m += d;
        m /= static_cast<double>(deltas[i].size());
        double v = 0;
        for (double d : deltas[i]) v += (d - m) * (d - m);
        res.variance.push_back(v / (static_cast<double>(deltas[i].size()) - 1));
    }
    res.fit = fit_exponent(res.times, res.variance);
    return res;
}

} // namespace dimerlab
