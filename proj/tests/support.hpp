#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "vexp/grid.hpp"

namespace testing_support {

// Random zero-boundary field from a few sine modes per axis.
inline vexp::GridFunction random_field(const vexp::Grid& g, std::mt19937_64& rng, double amplitude = 1.0,
                                       int modes = 4) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> c(2 * modes);
    for (double& x : c) x = unif(rng);
    return vexp::GridFunction::sample(g, [&](const vexp::Point& x) {
        double val = 1.0;
        for (int a = 0; a < g.dimension(); ++a) {
            const double t = (x[a] - g.lower(a)) / (g.upper(a) - g.lower(a));
            double s = 0.0;
            for (int m = 0; m < modes; ++m) s += c[a * modes + m] * std::sin((m + 1) * M_PI * t) / (m + 1);
            val *= s;
        }
        return amplitude * val;
    });
}

// Random interior nodal vector, boundary entries zero.
inline std::vector<double> random_nodal(const vexp::Grid& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.on_boundary(k)) v[k] = unif(rng);
    return v;
}

} // namespace testing_support
