#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dimerlab {

/// Discrete torus carrying the interlaced particle system: L1 columns,
/// L2 sites per column, N particles in every column.  N is conserved by
/// every dynamics in this project and fixes the vertical winding of the
/// height function.
struct TorusGeometry {
    int L1 = 0; ///< number of columns
    int L2 = 0; ///< sites per column
    int N = 0;  ///< particles per column, 0 < N < L2

    int faces() const { return L1 * L2; }
    int particles() const { return L1 * N; }

    void check() const {
        if (L1 < 1 || L2 < 1) throw std::invalid_argument("TorusGeometry: L1, L2 must be positive");
        if (N <= 0 || N >= L2)
            throw std::invalid_argument("TorusGeometry: need 0 < N < L2, got N=" + std::to_string(N) +
                                        " L2=" + std::to_string(L2));
    }

    bool operator==(const TorusGeometry&) const = default;
};

/// Average height gradient (rho1, rho2).  Admissible slopes form the
/// triangle 0 <= rho1, rho2, rho1 + rho2 <= 1; ergodic Gibbs states and
/// all our formulas need the open interior.
struct Slope {
    double rho1 = 0.0;
    double rho2 = 0.0;

    bool in_interior(double margin = 0.0) const {
        return rho1 > margin && rho2 > margin && rho1 + rho2 < 1.0 - margin;
    }

    void require_interior(const char* who) const {
        if (!in_interior())
            throw std::domain_error(std::string(who) + ": slope (" + std::to_string(rho1) + "," +
                                    std::to_string(rho2) + ") not in the interior of the slope triangle");
    }

    bool operator==(const Slope&) const = default;
};

/// Growth speed of the long-jump dynamics,
///   v(rho) = sin(pi rho1) sin(pi rho2) / (pi sin(pi (rho1+rho2))).
inline double speed_function(const Slope& rho) {
    rho.require_interior("speed_function");
    const double pi = 3.14159265358979323846;
    return std::sin(pi * rho.rho1) * std::sin(pi * rho.rho2) / (pi * std::sin(pi * (rho.rho1 + rho.rho2)));
}

/// Mobility of the reversible tower dynamics.  Coincides with the speed
/// function of the growth dynamics (Einstein relation); kept as a separate
/// entry point because the two play different roles.
inline double mobility_function(const Slope& rho) {
    rho.require_interior("mobility_function");
    const double pi = 3.14159265358979323846;
    return std::sin(pi * rho.rho1) * std::sin(pi * rho.rho2) / (pi * std::sin(pi * (rho.rho1 + rho.rho2)));
}

struct SpeedHessian {
    double h11, h12, h22;
    double det() const { return h11 * h22 - h12 * h12; }
};

/// Closed-form Hessian of speed_function.  With u = pi rho1, w = pi rho2,
/// S = sin(u+w), C = cos(u+w):
///   d2v/drho1^2    = -2 pi sin^2(w) C / S^3
///   d2v/drho1drho2 =  2 pi sin(u) sin(w) / S^3
///   d2v/drho2^2    = -2 pi sin^2(u) C / S^3
/// whence det H = -(2 pi)^2 sin^2(u) sin^2(w) / S^4 < 0 on the interior.
inline SpeedHessian speed_hessian(const Slope& rho) {
    rho.require_interior("speed_hessian");
    const double pi = 3.14159265358979323846;
    const double u = pi * rho.rho1, w = pi * rho.rho2;
    const double S = std::sin(u + w), C = std::cos(u + w);
    const double S3 = S * S * S;
    SpeedHessian H;
    H.h11 = -2.0 * pi * std::sin(w) * std::sin(w) * C / S3;
    H.h12 = 2.0 * pi * std::sin(u) * std::sin(w) / S3;
    H.h22 = -2.0 * pi * std::sin(u) * std::sin(u) * C / S3;
    return H;
}

} // namespace dimerlab
