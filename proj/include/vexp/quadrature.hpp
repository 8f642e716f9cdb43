#pragma once

#include <span>
#include <vector>

#include "vexp/grid.hpp"

namespace vexp {

/// Tensor-product trapezoid weights; they sum to the measure of the box.
inline std::vector<double> trapezoid_weights(const Grid& g) {
    std::vector<double> w(g.size());
    const std::size_t nx = g.nodes(0), ny = g.nodes(1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto [i, j] = g.multi_index(k);
        double wx = g.spacing(0);
        if (i == 0 || i + 1 == nx) wx *= 0.5;
        double wy = 1.0;
        if (g.dimension() == 2) {
            wy = g.spacing(1);
            if (j == 0 || j + 1 == ny) wy *= 0.5;
        }
        w[k] = wx * wy;
    }
    return w;
}

inline double integrate(std::span<const double> f, const Grid& g) {
    require_size(g, f.size(), "integrate");
    const auto w = trapezoid_weights(g);
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += w[k] * f[k];
    return s;
}

inline double integrate(const GridFunction& f) { return integrate(f.span(), f.grid()); }

} // namespace vexp
