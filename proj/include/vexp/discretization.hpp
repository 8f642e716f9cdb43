#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "vexp/exponent_spaces.hpp"
#include "vexp/grid.hpp"

namespace vexp {

/**
 * Nodal gradient: central differences at interior nodes, one-sided at the
 * boundary. Interior nodes next to the boundary read the boundary value
 * (zero for a GridFunction) inside the central stencil.
 */
inline VectorField gradient(std::span<const double> u, const Grid& g) {
    require_size(g, u.size(), "gradient");
    std::vector<std::array<double, 2>> out(g.size(), {0.0, 0.0});
    for (int a = 0; a < g.dimension(); ++a) {
        const std::size_t n = g.nodes(a);
        const std::size_t stride = a == 0 ? 1 : g.nodes(0);
        const double h = g.spacing(a);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const std::size_t i = g.multi_index(k)[a];
            double d;
            if (i == 0) d = (u[k + stride] - u[k]) / h;
            else if (i + 1 == n) d = (u[k] - u[k - stride]) / h;
            else d = (u[k + stride] - u[k - stride]) / (2.0 * h);
            out[k][a] = d;
        }
    }
    return VectorField(g, std::move(out));
}

inline VectorField gradient(const GridFunction& u) { return gradient(u.span(), u.grid()); }

/// Luxemburg norm of |grad u| under p; the working norm on the zero-trace space.
inline double sobolev_norm(const GridFunction& u, const ExponentField& p) {
    if (u.is_zero()) return 0.0;
    const auto mag = gradient(u).magnitude();
    return luxemburg_norm(mag, p, u.grid());
}

namespace detail {

inline double distance(const Point& a, const Point& b, int dim) {
    const double dx = a[0] - b[0];
    const double dy = dim == 2 ? a[1] - b[1] : 0.0;
    return std::hypot(dx, dy);
}

inline void check_ball_inside(const Point& c, double r, const Grid& g, const char* what) {
    for (int a = 0; a < g.dimension(); ++a) {
        if (!(c[a] - r > g.lower(a) && c[a] + r < g.upper(a)))
            throw GeometryError(std::string(what) + ": ball of radius " + std::to_string(r) +
                                " around the center touches the boundary");
    }
}

inline std::size_t nearest_node(const Point& c, const Grid& g) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double d = distance(g.coordinates(k), c, g.dimension());
        if (d < bd) { bd = d; best = k; }
    }
    return best;
}

} // namespace detail

/**
 * Radial hat max(0, eps - |x - center|). The nearest node to the center is
 * set to eps exactly so the peak does not depend on where the center falls.
 */
inline GridFunction tent_function(const Point& center, double epsilon, const Grid& g) {
    if (!(epsilon > 2.0 * g.max_spacing()))
        throw GeometryError("tent_function: radius must exceed twice the grid spacing");
    detail::check_ball_inside(center, epsilon, g, "tent_function");
    std::vector<double> vals(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.on_boundary(k)) continue;
        vals[k] = std::max(0.0, epsilon - detail::distance(g.coordinates(k), center, g.dimension()));
    }
    vals[detail::nearest_node(center, g)] = epsilon;
    return GridFunction(g, std::move(vals));
}

// C^2 bump (1 - r^2/R^2)^3 with unit peak; used for small-amplitude starts.
inline GridFunction smooth_bump(const Point& center, double radius, const Grid& g) {
    detail::check_ball_inside(center, radius, g, "smooth_bump");
    return GridFunction::sample(g, [&](const Point& x) {
        const double r = detail::distance(x, center, g.dimension()) / radius;
        if (r >= 1.0) return 0.0;
        const double s = 1.0 - r * r;
        return s * s * s;
    });
}

} // namespace vexp
