#pragma once

#include <cstddef>
#include <stdexcept>

namespace covcalc {

/**
 * Uniform grid 0 = t_0 < t_1 < ... < t_n = T with t_i = i*T/n.
 * `n` counts cells; there are n+1 grid points.
 */
struct Grid {
    std::size_t n;
    double T;

    Grid(std::size_t n_, double T_) : n(n_), T(T_) {
        if (n == 0) throw std::invalid_argument("Grid: need at least one cell");
        if (!(T > 0.0)) throw std::invalid_argument("Grid: horizon T must be positive");
    }

    double h() const { return T / static_cast<double>(n); }
    double t(std::size_t i) const { return T * static_cast<double>(i) / static_cast<double>(n); }
    std::size_t points() const { return n + 1; }

    // Largest grid index k with t_k <= time (clamped to [0, n]).
    std::size_t index_at(double time) const {
        if (time <= 0.0) return 0;
        if (time >= T) return n;
        auto k = static_cast<std::size_t>(time / h() * (1.0 + 1e-15));
        return k > n ? n : k;
    }
};

} // namespace covcalc
