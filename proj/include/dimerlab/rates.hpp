#pragma once

#include <cstdint>
#include <vector>

namespace dimerlab {

/// Flat binary sum tree over integer weights, O(log n) point update and
/// weighted selection.  Weights are exact integers (destination counts), so
/// the root is always an exact recount.
class SumTree {
public:
    explicit SumTree(std::size_t n = 0) { reset(n); }

    void reset(std::size_t n) {
        size_ = 1;
        while (size_ < n) size_ <<= 1;
        if (n == 0) size_ = 1;
        t_.assign(2 * size_, 0);
        count_ = n;
    }

    std::size_t count() const { return count_; }
    int64_t total() const { return t_[1]; }
    int64_t get(std::size_t i) const { return t_[size_ + i]; }

    void set(std::size_t i, int64_t w) {
        std::size_t k = size_ + i;
        t_[k] = w;
        for (k >>= 1; k >= 1; k >>= 1) {
            t_[k] = t_[2 * k] + t_[2 * k + 1];
            if (k == 1) break;
        }
    }

    /// Index i and residual r such that u lands in leaf i with offset r
    /// (0 <= u < total()).
    std::pair<std::size_t, int64_t> locate(int64_t u) const {
        std::size_t k = 1;
        while (k < size_) {
            k *= 2;
            if (u >= t_[k]) {
                u -= t_[k];
                ++k;
            }
        }
        return {k - size_, u};
    }

private:
    std::size_t size_ = 1, count_ = 0;
    std::vector<int64_t> t_;
};

} // namespace dimerlab
