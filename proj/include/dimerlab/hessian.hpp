#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"

namespace dimerlab {

struct HessianReport {
    std::vector<Slope> grid;
    std::vector<SpeedHessian> analytic;
    std::vector<SpeedHessian> fd;  ///< centered finite differences of the speed
    std::vector<int> det_sign;     ///< sign of det H per slope
    double max_rel_err = 0;        ///< worst |analytic - fd| / |analytic| (max norm)
    bool all_det_negative = true;
};

/// Regular grid on the margin-dilated interior of the slope triangle.
inline std::vector<Slope> interior_slope_grid(int n, double margin) {
    if (n < 2) throw std::invalid_argument("interior_slope_grid: need n >= 2");
    std::vector<Slope> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Slope rho{margin + (1 - 2 * margin) * i / (n - 1.0),
                            margin + (1 - 2 * margin) * j / (n - 1.0)};
            if (rho.rho1 + rho.rho2 <= 1 - margin) out.push_back(rho);
        }
    return out;
}

/// Closed-form speed Hessian on the grid, cross-checked against centered
/// second differences of the speed itself, with the determinant sign map.
inline HessianReport hessian_report(const std::vector<Slope>& grid, double fd_step = 1e-4) {
    HessianReport rep;
    rep.grid = grid;
    const double h = fd_step;
    for (const Slope& rho : grid) {
        rho.require_interior("hessian_report");
        const SpeedHessian a = speed_hessian(rho);
        SpeedHessian f;
        const auto v = [](double r1, double r2) { return speed_function({r1, r2}); };
        f.h11 = (v(rho.rho1 + h, rho.rho2) - 2 * v(rho.rho1, rho.rho2) + v(rho.rho1 - h, rho.rho2)) /
                (h * h);
        f.h22 = (v(rho.rho1, rho.rho2 + h) - 2 * v(rho.rho1, rho.rho2) + v(rho.rho1, rho.rho2 - h)) /
                (h * h);
        f.h12 = (v(rho.rho1 + h, rho.rho2 + h) - v(rho.rho1 + h, rho.rho2 - h) -
                 v(rho.rho1 - h, rho.rho2 + h) + v(rho.rho1 - h, rho.rho2 - h)) /
                (4 * h * h);
        rep.analytic.push_back(a);
        rep.fd.push_back(f);
        const double scale = std::max({std::abs(a.h11), std::abs(a.h12), std::abs(a.h22)});
        const double err = std::max({std::abs(a.h11 - f.h11), std::abs(a.h12 - f.h12),
                                     std::abs(a.h22 - f.h22)}) /
                           scale;
        rep.max_rel_err = std::max(rep.max_rel_err, err);
        rep.det_sign.push_back(a.det() > 0 ? 1 : (a.det() < 0 ? -1 : 0));
        if (a.det() >= 0) rep.all_det_negative = false;
    }
    return rep;
}

} // namespace dimerlab
