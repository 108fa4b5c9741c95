#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace dimerlab {

using std::int64_t;

/// Microscopic state: one sorted list of particle positions per column.
///
/// Positions are stored as plain (unreduced) integers; the set of particles
/// of column m is { pos[m][j] + k*L2, j < N, k in Z }.  The choice of stored
/// representatives is part of the state: it pins the height function
///   h(m, s) = height_offset + nu_m(s),
/// where nu_m(s) = -(index of the first extended particle >= s), indices
/// counted so that pos[m][0] has index 0.  Storing lifts instead of residues
/// keeps long jumps and height bookkeeping unambiguous: a jump simply
/// increments the stored integer and the height field follows.
///
/// Validity of a configuration is exactly the statement that the three
/// height-gradient families (one per triangular-lattice direction) take two
/// values:
///   h(m,s) - h(m,s+1)    in {0,1}   (1 iff a particle sits at (m,s))
///   h(m+1,s) - h(m,s)    in {0,1}
///   h(m+1,s) - h(m,s+1)  in {0,1}
/// with the horizontal wrap h(L1,s) = h(0,s) + col_wrap.  The third family
/// equals the sum of the first two at (m,s), so it is the single extra rule
/// "a particle of column m at level s forces h(m+1,s) = h(m,s)"; without it,
/// pairs of columns could trade particles between interlacement windows
/// (two in one gap, none in the next) while keeping the first two families
/// two-valued.  Together the three rules are equivalent to the interlacement
/// x^{m+1}_j in [x^m_j, x^m_{j+1}) with a globally consistent index pairing.
/// col_wrap (the horizontal height winding) is conserved by the dynamics,
/// as is N per column.
struct InterlacedConfig {
    TorusGeometry geom;
    std::vector<std::vector<int64_t>> pos; ///< pos[m], sorted, span < L2
    int64_t height_offset = 0;             ///< additive height normalization
    int64_t col_wrap = 0;                  ///< K: h(m+L1,s) = h(m,s) + K

    bool same_tiling(const InterlacedConfig& o) const { return pos == o.pos && col_wrap == o.col_wrap; }
};

namespace detail {

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

/// Index (into the bi-infinite extension of column `col`) of the first
/// extended particle with position >= s.
inline int64_t first_geq(const std::vector<int64_t>& col, int64_t L2, int64_t s) {
    const int64_t N = static_cast<int64_t>(col.size());
    const int64_t k = floor_div(s - col[0], L2);
    const int64_t t = s - k * L2; // in [col[0], col[0]+L2)
    const auto it = std::lower_bound(col.begin(), col.end(), t);
    return k * N + (it - col.begin());
}

/// Position of the extended particle with (possibly out-of-range) index i.
inline int64_t ext_pos(const std::vector<int64_t>& col, int64_t L2, int64_t i) {
    const int64_t N = static_cast<int64_t>(col.size());
    const int64_t k = floor_div(i, N);
    return col[static_cast<std::size_t>(i - k * N)] + k * L2;
}

} // namespace detail

/// nu_m(s): height of column m at level s relative to the column's stored
/// lift (h = height_offset + nu).
inline int64_t column_height(const InterlacedConfig& cfg, int m, int64_t s) {
    return -detail::first_geq(cfg.pos[static_cast<std::size_t>(m)], cfg.geom.L2, s);
}

/// d-value of the oriented column pair m -> m+1 (cyclic) at level s; equals
/// h(m+1,s) - h(m,s) and must be 0 or 1 in a valid configuration.
inline int64_t pair_gradient(const InterlacedConfig& cfg, int m, int64_t s) {
    const int mr = (m + 1) % cfg.geom.L1;
    int64_t d = column_height(cfg, mr, s) - column_height(cfg, m, s);
    if (m == cfg.geom.L1 - 1) d += cfg.col_wrap;
    return d;
}

/// Height of face (m, s), s in any lift (h(m, s+L2) = h(m,s) - N).
inline int64_t face_height(const InterlacedConfig& cfg, int m, int64_t s) {
    return cfg.height_offset + column_height(cfg, m, s);
}

struct Violation {
    std::string what;
};

/// Full validity check; empty result iff every column-ordering and
/// interlacement invariant holds.  O(L1 L2 log N).
inline std::vector<Violation> validate(const InterlacedConfig& cfg) {
    std::vector<Violation> out;
    const auto& g = cfg.geom;
    if (g.L1 < 1 || g.L2 < 1 || g.N < 1 || g.N > g.L2) {
        out.push_back({"bad geometry"});
        return out;
    }
    for (int m = 0; m < g.L1; ++m) {
        const auto& col = cfg.pos[static_cast<std::size_t>(m)];
        if (static_cast<int>(col.size()) != g.N) {
            out.push_back({"column " + std::to_string(m) + ": expected " + std::to_string(g.N) +
                           " particles, got " + std::to_string(col.size())});
            continue;
        }
        for (int j = 0; j + 1 < g.N; ++j)
            if (col[j] >= col[j + 1])
                out.push_back({"column " + std::to_string(m) + ": positions not strictly increasing at index " +
                               std::to_string(j)});
        if (g.N >= 1 && col[static_cast<std::size_t>(g.N - 1)] - col[0] >= g.L2)
            out.push_back({"column " + std::to_string(m) + ": position span >= L2"});
    }
    for (auto& v : out)
        if (!v.what.empty()) return out; // ordering broken: gradients meaningless
    if (g.L1 == 1) return out;           // single column: no interlacement (TASEP reduction)
    for (int m = 0; m < g.L1; ++m) {
        for (int64_t s = 0; s < g.L2; ++s) {
            const int64_t d = pair_gradient(cfg, m, s);
            if (d != 0 && d != 1) {
                out.push_back({"interlacement violated on edge between columns " + std::to_string(m) + " and " +
                               std::to_string((m + 1) % g.L1) + " at level " + std::to_string(s) +
                               " (gradient " + std::to_string(d) + ")"});
                continue;
            }
            const int64_t p = column_height(cfg, m, s) - column_height(cfg, m, s + 1);
            if (d + p > 1)
                out.push_back({"interlacement violated on diagonal edge between columns " + std::to_string(m) +
                               " and " + std::to_string((m + 1) % g.L1) + " at level " + std::to_string(s) +
                               " (gradient " + std::to_string(d + p) + ")"});
        }
    }
    return out;
}

/// Number of admissible upward destinations of particle (m, j): the particle
/// may jump to x+n for any 1 <= n <= result.  Constraints: the next particle
/// of its own column; the left pair gradient must read 0 on the swept levels
/// with no left-column particle there (the diagonal rule makes the left
/// window end strict); the right pair gradient must read 1 on the swept
/// levels (landing level may coincide with a right-column particle).
inline int64_t up_capacity(const InterlacedConfig& cfg, int m, int j) {
    const auto& g = cfg.geom;
    const auto& col = cfg.pos[static_cast<std::size_t>(m)];
    const int64_t x = col[static_cast<std::size_t>(j)];
    int64_t cap = detail::ext_pos(col, g.L2, j + 1) - 1 - x;
    if (g.L1 == 1) return cap;
    const int ml = (m + g.L1 - 1) % g.L1;
    const int mr = (m + 1) % g.L1;
    if (pair_gradient(cfg, ml, x + 1) != 0) return 0;
    const auto& left = cfg.pos[static_cast<std::size_t>(ml)];
    const int64_t a = detail::ext_pos(left, g.L2, detail::first_geq(left, g.L2, x + 1));
    cap = std::min(cap, a - 1 - x);
    if (cap <= 0) return 0;
    if (pair_gradient(cfg, m, x + 1) != 1) return 0;
    const auto& right = cfg.pos[static_cast<std::size_t>(mr)];
    const int64_t r = detail::ext_pos(right, g.L2, detail::first_geq(right, g.L2, x + 1));
    cap = std::min(cap, r - x);
    return cap;
}

/// Downward analogue of up_capacity (reversible dynamics only); mirror
/// conventions — the right window end is the strict one going down.
inline int64_t down_capacity(const InterlacedConfig& cfg, int m, int j) {
    const auto& g = cfg.geom;
    const auto& col = cfg.pos[static_cast<std::size_t>(m)];
    const int64_t x = col[static_cast<std::size_t>(j)];
    int64_t cap = x - detail::ext_pos(col, g.L2, j - 1) - 1;
    if (g.L1 == 1) return cap;
    const int ml = (m + g.L1 - 1) % g.L1;
    const int mr = (m + 1) % g.L1;
    if (pair_gradient(cfg, ml, x) != 1) return 0;
    const auto& left = cfg.pos[static_cast<std::size_t>(ml)];
    const int64_t a = detail::ext_pos(left, g.L2, detail::first_geq(left, g.L2, x) - 1);
    cap = std::min(cap, x - a);
    if (cap <= 0) return 0;
    if (pair_gradient(cfg, m, x) != 0) return 0;
    const auto& right = cfg.pos[static_cast<std::size_t>(mr)];
    const int64_t r = detail::ext_pos(right, g.L2, detail::first_geq(right, g.L2, x) - 1);
    cap = std::min(cap, x - r - 1);
    return cap;
}

/// Move particle (m, j) by n (signed).  The caller guarantees admissibility;
/// sortedness and the span invariant are preserved automatically because the
/// own-column constraint is part of every capacity.
inline void apply_jump(InterlacedConfig& cfg, int m, int j, int64_t n) {
    cfg.pos[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)] += n;
}

/// Index j of the particle of column m sitting at level congruent to s
/// (mod L2), or -1.  On hit, *lifted is the stored-lift position.
inline int particle_at(const InterlacedConfig& cfg, int m, int64_t s, int64_t* lifted = nullptr) {
    const auto& g = cfg.geom;
    const auto& col = cfg.pos[static_cast<std::size_t>(m)];
    const int64_t t = s - g.L2 * detail::floor_div(s - col[0], g.L2); // rep of s in [col[0], col[0]+L2)
    const auto it = std::lower_bound(col.begin(), col.end(), t);
    if (it == col.end() || *it != t) return -1;
    if (lifted) *lifted = t;
    return static_cast<int>(it - col.begin());
}

// ---------------------------------------------------------------------------
// serialization: line-oriented text, bit-exact round trip
// ---------------------------------------------------------------------------

inline void write_config(std::ostream& os, const InterlacedConfig& cfg) {
    os << "dimerlab-tiling " << cfg.geom.L1 << ' ' << cfg.geom.L2 << ' ' << cfg.geom.N << ' '
       << cfg.height_offset << ' ' << cfg.col_wrap << '\n';
    for (const auto& col : cfg.pos) {
        for (std::size_t j = 0; j < col.size(); ++j) os << (j ? " " : "") << col[j];
        os << '\n';
    }
}

inline std::string config_to_string(const InterlacedConfig& cfg) {
    std::ostringstream os;
    write_config(os, cfg);
    return os.str();
}

inline InterlacedConfig read_config(std::istream& is) {
    std::string tag;
    InterlacedConfig cfg;
    if (!(is >> tag) || tag != "dimerlab-tiling")
        throw std::runtime_error("read_config: missing dimerlab-tiling header");
    if (!(is >> cfg.geom.L1 >> cfg.geom.L2 >> cfg.geom.N >> cfg.height_offset >> cfg.col_wrap))
        throw std::runtime_error("read_config: malformed header");
    cfg.pos.assign(static_cast<std::size_t>(cfg.geom.L1), {});
    for (auto& col : cfg.pos) {
        col.resize(static_cast<std::size_t>(cfg.geom.N));
        for (auto& x : col)
            if (!(is >> x)) throw std::runtime_error("read_config: truncated position data");
    }
    return cfg;
}

inline InterlacedConfig config_from_string(const std::string& s) {
    std::istringstream is(s);
    return read_config(is);
}

} // namespace dimerlab
