#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace dimerlab {

/// Scalar field on the periodic unit square, sampled on an n x n grid with
/// mesh dx = 1/n.  Fields with a nonzero mean slope are stored as the
/// periodic remainder plus an affine tilt, phi(x) = tilt . x + w(x), so the
/// true gradient of cell (i, j) is the discrete gradient of w plus tilt.
struct ContinuumField {
    int n = 0;
    double dx = 0;
    Slope tilt{0, 0};
    std::vector<double> w; // periodic part, row-major, w[i*n+j] at (i/n, j/n)

    ContinuumField() = default;
    explicit ContinuumField(int n_, Slope tilt_ = {0, 0})
        : n(n_), dx(1.0 / n_), tilt(tilt_), w(static_cast<std::size_t>(n_) * n_, 0.0) {
        if (n_ < 4) throw std::invalid_argument("ContinuumField: need n >= 4");
    }

    double& at(int i, int j) {
        return w[static_cast<std::size_t>(((i % n) + n) % n) * n + (((j % n) + n) % n)];
    }
    double at(int i, int j) const {
        return w[static_cast<std::size_t>(((i % n) + n) % n) * n + (((j % n) + n) % n)];
    }

    /// Full value including the affine part (i, j need not be reduced).
    double value(int i, int j) const {
        return at(i, j) + tilt.rho1 * (static_cast<double>(i) * dx) +
               tilt.rho2 * (static_cast<double>(j) * dx);
    }

    /// Centered discrete gradient of the full field at cell (i, j).
    Slope gradient(int i, int j) const {
        return {tilt.rho1 + (at(i + 1, j) - at(i - 1, j)) / (2 * dx),
                tilt.rho2 + (at(i, j + 1) - at(i, j - 1)) / (2 * dx)};
    }

    bool finite() const {
        for (double x : w)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

/// Sample phi at the grid nodes; phi minus the tilt must be 1-periodic
/// (checked at the seams to 1e-9).
inline ContinuumField make_field(int n, Slope tilt, const std::function<double(double, double)>& phi) {
    ContinuumField f(n, tilt);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f.at(i, j) = phi(i * f.dx, j * f.dx) - tilt.rho1 * i * f.dx - tilt.rho2 * j * f.dx;
    for (int k = 0; k < n; ++k) {
        const double seam1 = phi(1.0, k * f.dx) - tilt.rho1 - tilt.rho2 * k * f.dx;
        const double seam2 = phi(k * f.dx, 1.0) - tilt.rho1 * k * f.dx - tilt.rho2;
        if (std::abs(seam1 - f.at(0, k)) > 1e-9 || std::abs(seam2 - f.at(k, 0)) > 1e-9)
            throw std::invalid_argument("make_field: phi minus tilt is not 1-periodic");
    }
    return f;
}

inline double field_max_abs_diff(const ContinuumField& a, const ContinuumField& b) {
    if (a.n != b.n) throw std::invalid_argument("field_max_abs_diff: size mismatch");
    double out = 0;
    for (std::size_t k = 0; k < a.w.size(); ++k) out = std::max(out, std::abs(a.w[k] - b.w[k]));
    return out;
}

/// Spatial variance of the periodic part (fluctuation size of the field).
inline double field_variance(const ContinuumField& f) {
    double mean = 0;
    for (double x : f.w) mean += x;
    mean /= static_cast<double>(f.w.size());
    double var = 0;
    for (double x : f.w) var += (x - mean) * (x - mean);
    return var / static_cast<double>(f.w.size());
}

/// L2 distance squared between two fields with equal tilt, integral form.
inline double field_l2_distance_sq(const ContinuumField& a, const ContinuumField& b) {
    if (a.n != b.n || !(a.tilt == b.tilt))
        throw std::invalid_argument("field_l2_distance_sq: incompatible fields");
    double s = 0;
    for (std::size_t k = 0; k < a.w.size(); ++k) s += (a.w[k] - b.w[k]) * (a.w[k] - b.w[k]);
    return s * a.dx * a.dx;
}

} // namespace dimerlab
