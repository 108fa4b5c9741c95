#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "height.hpp"

namespace dimerlab {

/// Exhaustive list of valid height functions on the torus with windings
/// (geom.N, K), normalized by h(0,0) = 0 (one representative per tiling).
/// Faces are filled in raster order; each new face has at most two candidate
/// values, so the search tree is tiny for the geometries this is meant for.
/// `cap` bounds the number of states; exceeding it throws with an estimate.
inline std::vector<HeightField> enumerate_torus(const TorusGeometry& geom, int64_t K,
                                                std::size_t cap = 10'000'000) {
    const int L1 = geom.L1;
    const int64_t L2 = geom.L2, N = geom.N;
    if (L1 * L2 > 30) throw std::runtime_error("enumerate_torus: state space too large (> 2^30 bound)");
    std::vector<HeightField> out;
    HeightField cur;
    cur.geom = geom;
    cur.col_wrap = K;
    cur.h.assign(static_cast<std::size_t>(L1 * L2), 0);

    auto ok = [&](int m, int64_t s, int64_t v) {
        if (s > 0 && !(cur.at(m, s - 1) - v == 0 || cur.at(m, s - 1) - v == 1)) return false;
        if (m > 0 && !(v - cur.at(m - 1, s) == 0 || v - cur.at(m - 1, s) == 1)) return false;
        if (m > 0) { // diagonal family against the completed previous row
            const int64_t t = v - (s + 1 < L2 ? cur.at(m - 1, s + 1) : cur.at(m - 1, 0) - N);
            if (t != 0 && t != 1) return false;
        }
        if (s == L2 - 1) { // vertical wrap to (m, 0) - N
            const int64_t p = v - (cur.at(m, 0) - N);
            if (p != 0 && p != 1) return false;
        }
        if (m == L1 - 1) { // horizontal wrap to (0, s) + K
            const int64_t d = cur.at(0, s) + K - v;
            if (d != 0 && d != 1) return false;
        }
        return true;
    };

    auto rec = [&](auto&& self, int64_t f) -> void {
        if (f == L1 * L2) {
            // the in-search pruning misses some wrap diagonals; full recheck
            if (!height_gradient_violation(cur).empty()) return;
            if (out.size() >= cap) throw std::runtime_error("enumerate_torus: cap exceeded (> " +
                                                            std::to_string(cap) + " states)");
            out.push_back(cur);
            return;
        }
        const int m = static_cast<int>(f / L2);
        const int64_t s = f % L2;
        if (f == 0) {
            cur.at(0, 0) = 0;
            self(self, f + 1);
            return;
        }
        // candidate interval from whichever backward neighbor exists
        int64_t lo, hi;
        if (s > 0) {
            lo = cur.at(m, s - 1) - 1;
            hi = cur.at(m, s - 1);
        } else {
            lo = cur.at(m - 1, 0);
            hi = cur.at(m - 1, 0) + 1;
        }
        for (int64_t v = lo; v <= hi; ++v)
            if (ok(m, s, v)) {
                cur.at(m, s) = v;
                self(self, f + 1);
            }
    };
    rec(rec, 0);
    return out;
}

/// Total tiling count of the L1 x L2 torus, all winding classes (for
/// cross-checks against Kasteleyn determinants).
inline int64_t count_torus_all_windings(int L1, int64_t L2) {
    int64_t total = 0;
    for (int64_t N = 0; N <= L2; ++N)
        for (int64_t K = 0; K <= L1; ++K) {
            TorusGeometry g{L1, static_cast<int>(L2), static_cast<int>(N)};
            total += static_cast<int64_t>(enumerate_torus(g, K).size());
        }
    return total;
}

/// Boxed plane partition: an a x b matrix with entries in [0, c], weakly
/// decreasing along rows and columns.  Equivalent to a lozenge tiling of the
/// hexagon with side lengths (a, b, c).
struct PlanePartition {
    int a = 0, b = 0, c = 0;
    std::vector<int> e; ///< e[i*b + j]

    int& at(int i, int j) { return e[static_cast<std::size_t>(i * b + j)]; }
    int at(int i, int j) const { return e[static_cast<std::size_t>(i * b + j)]; }
    bool operator==(const PlanePartition& o) const { return e == o.e; }
};

inline std::vector<PlanePartition> enumerate_hexagon(int a, int b, int c,
                                                     std::size_t cap = 10'000'000) {
    std::vector<PlanePartition> out;
    PlanePartition cur;
    cur.a = a;
    cur.b = b;
    cur.c = c;
    cur.e.assign(static_cast<std::size_t>(a * b), 0);
    auto rec = [&](auto&& self, int k) -> void {
        if (k == a * b) {
            if (out.size() >= cap) throw std::runtime_error("enumerate_hexagon: cap exceeded");
            out.push_back(cur);
            return;
        }
        const int i = k / b, j = k % b;
        const int hi = std::min(i > 0 ? cur.at(i - 1, j) : c, j > 0 ? cur.at(i, j - 1) : c);
        for (int v = 0; v <= hi; ++v) {
            cur.at(i, j) = v;
            self(self, k + 1);
        }
    };
    rec(rec, 0);
    return out;
}

/// Stable key for hashing/comparing torus states modulo the (already fixed)
/// normalization.
inline std::string state_key(const HeightField& hf) {
    std::string k;
    k.reserve(hf.h.size() * 3);
    for (int64_t v : hf.h) {
        k += std::to_string(v);
        k += ',';
    }
    return k;
}

} // namespace dimerlab
