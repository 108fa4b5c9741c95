#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimerlab {

struct LinearFit {
    double slope = 0, intercept = 0, r2 = 0, slope_stderr = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need >= 2 matching points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = (syy > 0) ? 1.0 - ss_res / syy : 1.0;
    if (n > 2) f.slope_stderr = std::sqrt(ss_res / (n - 2) / sxx);
    return f;
}

/// Growth-exponent estimate from a Var(t) series: compares a power law
/// Var ~ t^(2 beta) (fit on log-log) against Var ~ c log t + d (fit on
/// lin-log), both over the given window, and prefers the better R².
struct ExponentEstimate {
    double beta = 0, beta_stderr = 0;
    double r2_power = 0, r2_log = 0;
    double log_coeff = 0; ///< c in c*log t + d
    std::string model;    ///< "power" or "log"
    std::size_t window_begin = 0, window_end = 0;

    double r2() const { return model == "power" ? r2_power : r2_log; }
};

inline ExponentEstimate fit_exponent(const std::vector<double>& t, const std::vector<double>& var,
                                     std::size_t begin, std::size_t end) {
    if (end > t.size() || begin + 2 > end) throw std::invalid_argument("fit_exponent: bad window");
    std::vector<double> lt, lv, v;
    for (std::size_t i = begin; i < end; ++i) {
        if (t[i] <= 0 || var[i] <= 0) throw std::invalid_argument("fit_exponent: need positive t and Var");
        lt.push_back(std::log(t[i]));
        lv.push_back(std::log(var[i]));
        v.push_back(var[i]);
    }
    const auto pw = linear_fit(lt, lv);
    const auto lg = linear_fit(lt, v);
    ExponentEstimate e;
    e.beta = pw.slope / 2.0;
    e.beta_stderr = pw.slope_stderr / 2.0;
    e.r2_power = pw.r2;
    e.r2_log = lg.r2;
    e.log_coeff = lg.slope;
    e.model = (pw.r2 >= lg.r2) ? "power" : "log";
    e.window_begin = begin;
    e.window_end = end;
    return e;
}

/// Fit over the latter half of the time grid (the documented default).
inline ExponentEstimate fit_exponent(const std::vector<double>& t, const std::vector<double>& var) {
    if (t.size() < 5) throw std::invalid_argument("fit_exponent: need at least 5 time points");
    return fit_exponent(t, var, t.size() / 2, t.size());
}

struct MeanStderr {
    double mean = 0, stderr = 0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(r.n);
    if (r.n < 2) return r;
    double s = 0;
    for (double x : xs) s += (x - r.mean) * (x - r.mean);
    r.stderr = std::sqrt(s / (static_cast<double>(r.n) * (static_cast<double>(r.n) - 1)));
    return r;
}

/// Jackknife standard error of a statistic given its leave-one-out values.
inline double jackknife_stderr(const std::vector<double>& loo) {
    const std::size_t n = loo.size();
    if (n < 2) return 0;
    double m = 0;
    for (double x : loo) m += x;
    m /= static_cast<double>(n);
    double s = 0;
    for (double x : loo) s += (x - m) * (x - m);
    return std::sqrt(s * (static_cast<double>(n) - 1) / static_cast<double>(n));
}

} // namespace dimerlab
