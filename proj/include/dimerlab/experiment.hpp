#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "coupling.hpp"
#include "gibbs.hpp"
#include "growth.hpp"
#include "hessian.hpp"
#include "hj.hpp"
#include "manifest.hpp"
#include "parabolic.hpp"
#include "reversible.hpp"
#include "spde.hpp"

namespace dimerlab {

namespace detail {

/// Shared state of one run: output directory, wall-time cap, accumulating
/// manifest.  Outputs are written atomically as they are produced; the
/// manifest itself is written last by run_experiment.
struct RunContext {
    std::filesystem::path dir;
    RunManifest manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double max_wall_s = 0; ///< 0 = unlimited

    bool over_budget() const {
        if (max_wall_s <= 0) return false;
        const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t0;
        return el.count() > max_wall_s;
    }
    void emit(const std::string& name, const std::string& bytes, bool censored = false) {
        atomic_write(dir / name, bytes);
        manifest.outputs.push_back({name, fnv1a(bytes), censored});
    }
    void warn(const std::string& w) { manifest.warnings.push_back(w); }
};

inline TorusGeometry torus_for(const Slope& rho, int L) {
    rho.require_interior("experiment");
    const int64_t N = std::llround((1.0 - rho.rho1 - rho.rho2) * L);
    if (N < 1 || N >= L)
        throw std::invalid_argument("experiment: slope not representable at torus.L = " +
                                    std::to_string(L));
    return {L, L, static_cast<int>(N)};
}

inline Slope slope_from(const ExperimentConfig& c, const std::string& section) {
    return {c.get_double(section + ".rho1"), c.get_double(section + ".rho2")};
}

inline std::vector<double> geometric_grid(double t_min, double t_max, int points) {
    if (!(t_min > 0) || !(t_max > t_min) || points < 5)
        throw std::invalid_argument("experiment: need 0 < t_min < t_max and >= 5 points");
    std::vector<double> g;
    for (int k = 0; k < points; ++k)
        g.push_back(t_min * std::pow(t_max / t_min, k / (points - 1.0)));
    return g;
}

inline nlohmann::json fit_json(const ExponentEstimate& e) {
    return {{"model", e.model},       {"beta", e.beta},       {"beta_stderr", e.beta_stderr},
            {"r2_power", e.r2_power}, {"r2_log", e.r2_log},   {"log_coeff", e.log_coeff},
            {"window_begin", e.window_begin}, {"window_end", e.window_end}};
}

// --- experiment kinds -----------------------------------------------------

inline void run_velocity(const ExperimentConfig& c, RunContext& ctx) {
    const Slope rho = slope_from(c, "torus");
    const auto geom = torus_for(rho, static_cast<int>(c.get_int("torus.L")));
    const double T = c.get_double("run.T");
    const int replicas = static_cast<int>(c.get_int("run.replicas"));
    const auto dyn = c.get_string("run.dynamics", "longjump") == "corner" ? Dynamics::corner
                                                                          : Dynamics::longjump;
    const auto est = measure_velocity(rho, geom, T, replicas, c.get_seed(), dyn);
    CsvBuilder csv({"replica", "velocity"});
    for (std::size_t k = 0; k < est.per_replica.size(); ++k)
        csv.row({static_cast<double>(k), est.per_replica[k]});
    ctx.emit("velocity.csv", csv.text);
    nlohmann::json side{{"mean", est.mean},
                        {"stderr", est.stderr},
                        {"replicas", replicas},
                        {"speed_function", speed_function(rho)}};
    ctx.emit("velocity.json", side.dump(2));
    if (est.no_stderr) ctx.warn("single replica: no stderr");
}

inline void run_fluctuations(const ExperimentConfig& c, RunContext& ctx) {
    const Slope rho = slope_from(c, "torus");
    const auto geom = torus_for(rho, static_cast<int>(c.get_int("torus.L")));
    const auto grid = geometric_grid(c.get_double("run.t_min"), c.get_double("run.t_max"),
                                     static_cast<int>(c.get_int("run.points")));
    const bool stationary = c.get_int("run.stationary", 1) != 0;
    const auto dyn = c.get_string("run.dynamics", "longjump") == "corner" ? Dynamics::corner
                                                                          : Dynamics::longjump;
    const auto res = measure_fluctuations(dyn, rho, geom, grid,
                                          static_cast<int>(c.get_int("run.replicas")),
                                          c.get_seed(), stationary);
    CsvBuilder csv({"t", "variance"});
    for (std::size_t k = 0; k < res.times.size(); ++k) csv.row({res.times[k], res.variance[k]});
    ctx.emit("fluctuations.csv", csv.text);
    ctx.emit("fluctuations.json", fit_json(res.fit).dump(2));
}

inline void run_gibbs_profile(const ExperimentConfig& c, RunContext& ctx) {
    const Slope rho = slope_from(c, "torus");
    const auto geom = torus_for(rho, static_cast<int>(c.get_int("torus.L")));
    const auto samples = static_cast<std::size_t>(c.get_int("gibbs.samples"));
    auto ens = sample_gibbs(rho, geom, 10LL * geom.faces(), c.get_seed(), samples);
    const auto vp = height_variance_profile(ens, c.get_int("gibbs.max_r", geom.L2 / 4),
                                            c.get_int("gibbs.fit_lo", 4),
                                            c.get_int("gibbs.fit_hi", 32));
    CsvBuilder csv({"r", "variance", "jackknife"});
    for (std::size_t k = 0; k < vp.r.size(); ++k)
        csv.row({static_cast<double>(vp.r[k]), vp.variance[k], vp.jackknife[k]});
    ctx.emit("profile.csv", csv.text);
    nlohmann::json side{{"log_slope", vp.log_fit.slope},
                        {"log_slope_stderr", vp.log_fit.slope_stderr},
                        {"r2", vp.log_fit.r2},
                        {"ess", ens.diag.ess}};
    ctx.emit("profile.json", side.dump(2));
    if (!vp.warning.empty()) ctx.warn(vp.warning);
    if (!ens.diag.warning.empty()) ctx.warn(ens.diag.warning);
}

inline void run_mobility(const ExperimentConfig& c, RunContext& ctx) {
    const Slope rho = slope_from(c, "torus");
    const auto geom = torus_for(rho, static_cast<int>(c.get_int("torus.L")));
    const auto est = mobility_estimate(rho, geom,
                                       static_cast<std::size_t>(c.get_int("run.samples")),
                                       c.get_seed());
    CsvBuilder csv({"sample", "mobility"});
    for (std::size_t k = 0; k < est.per_sample.size(); ++k)
        csv.row({static_cast<double>(k), est.per_sample[k]});
    ctx.emit("mobility.csv", csv.text);
    nlohmann::json side{{"mean", est.mean},
                        {"stderr", est.stderr_mean},
                        {"mobility_function", mobility_function(rho)}};
    ctx.emit("mobility.json", side.dump(2));
    if (!est.warning.empty()) ctx.warn(est.warning);
}

inline void run_mixing(const ExperimentConfig& c, RunContext& ctx) {
    const std::string kind = c.get_string("mixing.domain");
    std::vector<DomainSpec> ladder;
    if (kind == "torus") {
        const Slope rho = slope_from(c, "torus");
        for (double L : c.get_ladder("mixing.sizes"))
            ladder.push_back(DomainSpec::torus_spec(static_cast<int>(L), rho));
    } else if (kind == "hexagon") {
        for (double a : c.get_ladder("mixing.sizes"))
            ladder.push_back(DomainSpec::hexagon_spec(static_cast<int>(a), static_cast<int>(a),
                                                      static_cast<int>(a)));
    } else {
        throw std::invalid_argument("experiment: mixing.domain must be torus or hexagon");
    }
    const auto est = coupling_time(ladder, ReversibleDynamics::glauber,
                                   static_cast<int>(c.get_int("mixing.replicas")), c.get_seed(),
                                   c.get_double("mixing.cap_sweeps", 1e5));
    CsvBuilder csv({"size", "median_sweeps", "q25", "q75", "censored_runs"});
    for (std::size_t k = 0; k < ladder.size(); ++k)
        csv.row({static_cast<double>(ladder[k].linear_size()), est.median[k], est.q25[k],
                 est.q75[k], static_cast<double>(est.censored_runs[k])});
    ctx.emit("mixing.csv", csv.text, est.censored);
    nlohmann::json side{{"exponent", est.exponent},
                        {"exponent_stderr", est.exponent_stderr},
                        {"censored", est.censored}};
    ctx.emit("mixing.json", side.dump(2), est.censored);
    if (!est.warning.empty()) ctx.warn(est.warning);
}

inline void run_pde_hessian(const ExperimentConfig& c, RunContext& ctx) {
    const auto grid = interior_slope_grid(static_cast<int>(c.get_int("pde.n", 50)),
                                          c.get_double("pde.margin", 0.2));
    const auto rep = hessian_report(grid, c.get_double("pde.fd_step", 1e-4));
    CsvBuilder csv({"rho1", "rho2", "h11", "h12", "h22", "det", "fd_h11", "fd_h12", "fd_h22"});
    for (std::size_t k = 0; k < rep.grid.size(); ++k)
        csv.row({rep.grid[k].rho1, rep.grid[k].rho2, rep.analytic[k].h11, rep.analytic[k].h12,
                 rep.analytic[k].h22, rep.analytic[k].det(), rep.fd[k].h11, rep.fd[k].h12,
                 rep.fd[k].h22});
    ctx.emit("hessian.csv", csv.text);
    nlohmann::json side{{"max_rel_err", rep.max_rel_err},
                        {"all_det_negative", rep.all_det_negative},
                        {"grid_points", rep.grid.size()}};
    ctx.emit("hessian.json", side.dump(2));
}

inline void run_pde_hj(const ExperimentConfig& c, RunContext& ctx) {
    const int n = static_cast<int>(c.get_int("pde.n", 128));
    const Slope tilt = slope_from(c, "pde");
    const double amp = c.get_double("pde.amplitude", 0.01);
    ContinuumField f0(n, tilt);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f0.w[static_cast<std::size_t>(i) * n + j] =
                amp * std::sin(2 * M_PI * i / n) * std::cos(2 * M_PI * j / n);
    const HjRun run = hj_solve_report(f0, speed_hamiltonian(), c.get_double("pde.T"));
    CsvBuilder csv({"i", "j", "w"});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            csv.row({static_cast<double>(i), static_cast<double>(j), run.phi.at(i, j)});
    ctx.emit("hj_field.csv", csv.text);
    nlohmann::json side{{"steps", run.steps},
                        {"scheme_viscosity", run.scheme_viscosity},
                        {"max_alpha1", run.max_alpha1},
                        {"max_alpha2", run.max_alpha2},
                        {"mesh", n}};
    ctx.emit("hj_field.json", side.dump(2));
}

inline void run_pde_parabolic(const ExperimentConfig& c, RunContext& ctx) {
    const int n = static_cast<int>(c.get_int("pde.n", 64));
    const Slope tilt = slope_from(c, "pde");
    const double amp = c.get_double("pde.amplitude", 1e-3);
    const auto tab = build_surface_tension_table(static_cast<int>(c.get_int("pde.table_n", 21)));
    ContinuumField f0(n, tilt);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f0.w[static_cast<std::size_t>(i) * n + j] = amp * std::sin(2 * M_PI * i / n);
    const ContinuumField f = parabolic_solve(f0, tab, c.get_double("pde.T"));
    CsvBuilder csv({"i", "j", "w"});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            csv.row({static_cast<double>(i), static_cast<double>(j), f.at(i, j)});
    ctx.emit("parabolic_field.csv", csv.text);
    nlohmann::json side{{"mesh", n},
                        {"variance_initial", field_variance(f0)},
                        {"variance_final", field_variance(f)}};
    ctx.emit("parabolic_field.json", side.dump(2));
}

inline void run_pde_bump(const ExperimentConfig& c, RunContext& ctx) {
    const auto b = bump_evolution(c.get_double("pde.h11"), c.get_double("pde.h12"),
                                  c.get_double("pde.h22"), static_cast<int>(c.get_int("pde.sign")),
                                  c.get_double("pde.T"), static_cast<int>(c.get_int("pde.n", 256)),
                                  static_cast<int>(c.get_int("pde.samples", 9)),
                                  c.get_double("pde.amplitude", 0.05));
    CsvBuilder csv({"t", "height", "width"});
    for (std::size_t k = 0; k < b.t.size(); ++k) csv.row({b.t[k], b.height[k], b.width[k]});
    ctx.emit("bump.csv", csv.text);
    nlohmann::json side{{"degenerate", b.degenerate}};
    ctx.emit("bump.json", side.dump(2));
    if (b.degenerate) ctx.warn("quadratic form is degenerate (det H = 0)");
}

inline void run_pde_spde(const ExperimentConfig& c, RunContext& ctx) {
    const int n = static_cast<int>(c.get_int("pde.n", 64));
    SpdeParams p;
    p.nu = c.get_double("pde.nu");
    p.h11 = c.get_double("pde.h11", 0);
    p.h12 = c.get_double("pde.h12", 0);
    p.h22 = c.get_double("pde.h22", 0);
    p.amplitude = c.get_double("pde.amplitude");
    p.corr_len = c.get_double("pde.corr_len_cells", 1.0) / n;
    const int replicas = static_cast<int>(c.get_int("run.replicas", 1));
    const double T = c.get_double("pde.T");
    const uint64_t seed = c.get_seed();

    std::vector<double> t, var;
    bool aborted = false;
    double last_stable = 0;
    SpdeResult last;
    for (int r = 0; r < replicas; ++r) {
        last = spde_run(p, ContinuumField(n), T, seed + static_cast<uint64_t>(r));
        if (last.aborted) {
            aborted = true;
            last_stable = last.last_stable_time;
            break;
        }
        if (r == 0) {
            t = last.times;
            var = last.variance;
        } else {
            for (std::size_t k = 0; k < var.size(); ++k) var[k] += last.variance[k];
        }
    }
    if (!aborted)
        for (double& v : var) v /= replicas;

    CsvBuilder csv({"t", "variance"});
    for (std::size_t k = 0; k < t.size(); ++k) csv.row({t[k], var[k]});
    ctx.emit("spde_variance.csv", csv.text, aborted);
    CsvBuilder sf({"r", "structure_function"});
    for (std::size_t k = 0; k < last.sf_r.size(); ++k) sf.row({last.sf_r[k], last.sf_val[k]});
    ctx.emit("spde_structure.csv", sf.text, aborted);
    nlohmann::json side{{"aborted", aborted}, {"replicas", replicas}};
    if (aborted) {
        side["last_stable_time"] = last_stable;
        ctx.warn("spde run aborted (blow-up) at t = " + std::to_string(last_stable));
    } else if (t.size() >= 5) {
        side["fit"] = fit_json(fit_exponent(t, var, 0, t.size()));
    }
    ctx.emit("spde_variance.json", side.dump(2), aborted);
}

} // namespace detail

/// Run one configured experiment into config's output directory.  All data
/// files are written atomically as produced; manifest.json is written last
/// and lists every emitted file with its FNV-1a checksum.  Runs that hit a
/// resource cap mark their partial outputs CENSORED rather than failing.
inline RunManifest run_experiment(const ExperimentConfig& cfg) {
    detail::RunContext ctx;
    ctx.manifest.started_at = iso_timestamp();
    ctx.manifest.config_echo = cfg.echo();
    ctx.max_wall_s = cfg.get_double("experiment.max_wall_time_s", 0);

    const std::string kind = cfg.get_string("experiment.kind");
    const std::string out_dir = cfg.get_string("experiment.out_dir");
    cfg.get_seed(); // seed is mandatory for every experiment (no implicit entropy)

    using Runner = std::function<void(const ExperimentConfig&, detail::RunContext&)>;
    const std::map<std::string, Runner> runners{
        {"velocity", detail::run_velocity},       {"fluctuations", detail::run_fluctuations},
        {"gibbs", detail::run_gibbs_profile},     {"mobility", detail::run_mobility},
        {"mixing", detail::run_mixing},           {"pde_hessian", detail::run_pde_hessian},
        {"pde_hj", detail::run_pde_hj},           {"pde_parabolic", detail::run_pde_parabolic},
        {"pde_bump", detail::run_pde_bump},       {"pde_spde", detail::run_pde_spde},
    };
    const auto it = runners.find(kind);
    if (it == runners.end())
        throw std::invalid_argument("experiment: unknown kind " + kind);

    std::filesystem::create_directories(out_dir);
    ctx.dir = out_dir;
    it->second(cfg, ctx);
    cfg.reject_unknown_keys();

    if (ctx.over_budget()) {
        for (auto& o : ctx.manifest.outputs) o.censored = true;
        ctx.warn("wall-time cap exceeded; outputs flagged CENSORED");
    }
    ctx.manifest.finished_at = iso_timestamp();
    atomic_write(ctx.dir / "manifest.json", ctx.manifest.to_json().dump(2) + "\n");
    return ctx.manifest;
}

} // namespace dimerlab
