#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "vexp/exponent_field.hpp"
#include "vexp/quadrature.hpp"

namespace vexp {

namespace detail {

inline void check_exponent_grid(const ExponentField& p, const Grid& g, const char* what) {
    if (!(p.grid() == g)) throw ShapeError(std::string(what) + ": exponent lives on a different grid");
}

inline void check_finite(std::span<const double> u, const char* what) {
    for (double x : u)
        if (!std::isfinite(x)) throw DataError(std::string(what) + ": non-finite sample");
}

// Trapezoid sum of |u/mu|^p.
inline double scaled_modular(std::span<const double> u, double mu, const ExponentField& p,
                             const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] == 0.0) continue;
        s += w[k] * std::pow(std::fabs(u[k]) / mu, p[k]);
    }
    return s;
}

} // namespace detail

/// Trapezoid approximation of the integral of |u|^p(x).
inline double modular(std::span<const double> u, const ExponentField& p, const Grid& g) {
    require_size(g, u.size(), "modular");
    detail::check_exponent_grid(p, g, "modular");
    return detail::scaled_modular(u, 1.0, p, trapezoid_weights(g));
}

inline double modular(const GridFunction& u, const ExponentField& p) { return modular(u.span(), p, u.grid()); }

/**
 * Luxemburg norm inf{mu > 0 : modular(u/mu) <= 1}.
 *
 * mu -> modular(u/mu) is continuous and strictly decreasing, so a doubling /
 * halving bracket from max|u| followed by bisection cannot fail; the width is
 * driven down to ~1e-13 relative so the modular at the root is 1 to ~1e-12.
 */
inline double luxemburg_norm(std::span<const double> u, const ExponentField& p, const Grid& g) {
    require_size(g, u.size(), "luxemburg_norm");
    detail::check_exponent_grid(p, g, "luxemburg_norm");
    detail::check_finite(u, "luxemburg_norm");

    double umax = 0.0;
    for (double x : u) umax = std::max(umax, std::fabs(x));
    if (umax == 0.0) return 0.0;

    const auto w = trapezoid_weights(g);
    auto rho = [&](double mu) { return detail::scaled_modular(u, mu, p, w); };

    constexpr int max_iter = 200;
    double lo = umax, hi = umax;
    int it = 0;
    if (rho(umax) > 1.0) {
        while (rho(hi) > 1.0) {
            lo = hi;
            hi *= 2.0;
            if (++it > max_iter) throw ConvergenceError("luxemburg_norm: bracket expansion failed");
        }
    } else {
        while (rho(lo) <= 1.0) {
            hi = lo;
            lo *= 0.5;
            if (++it > max_iter) throw ConvergenceError("luxemburg_norm: bracket contraction failed");
        }
    }
    // Invariant: rho(lo) > 1 >= rho(hi).
    for (it = 0; hi - lo > 1e-14 * hi; ++it) {
        if (it >= max_iter) throw ConvergenceError("luxemburg_norm: bisection did not converge");
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (rho(mid) > 1.0) lo = mid;
        else hi = mid;
    }
    return hi;
}

inline double luxemburg_norm(const GridFunction& u, const ExponentField& p) {
    return luxemburg_norm(u.span(), p, u.grid());
}

struct HolderCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

/// |int uv| against (1/p- + 1/(p')-) |u|_p |v|_p'.
inline HolderCheck holder_check(std::span<const double> u, std::span<const double> v, const ExponentField& p,
                                const Grid& g, double slack = 1e-9) {
    require_size(g, u.size(), "holder_check");
    require_size(g, v.size(), "holder_check");
    detail::check_finite(u, "holder_check");
    detail::check_finite(v, "holder_check");
    const ExponentField pc = conjugate_exponent(p);
    std::vector<double> uv(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) uv[k] = u[k] * v[k];
    HolderCheck out;
    out.lhs = std::fabs(integrate(uv, g));
    out.rhs = (1.0 / p.min() + 1.0 / pc.min()) * luxemburg_norm(u, p, g) * luxemburg_norm(v, pc, g);
    out.holds = out.lhs <= out.rhs * (1.0 + slack);
    return out;
}

inline HolderCheck holder_check(const GridFunction& u, const GridFunction& v, const ExponentField& p,
                                double slack = 1e-9) {
    return holder_check(u.span(), v.span(), p, u.grid(), slack);
}

struct ModularReport {
    double modular_value = 0.0;
    double norm_value = 0.0;
    std::pair<double, double> relation_band{0.0, 0.0};
    bool band_holds = true;
};

/**
 * Compares the modular with the power band of the norm:
 * |u|^{p+} <= rho(u) <= |u|^{p-} below 1, reversed above 1.
 */
inline ModularReport norm_modular_relation_check(std::span<const double> u, const ExponentField& p, const Grid& g,
                                                 double slack = 1e-9) {
    ModularReport r;
    r.modular_value = modular(u, p, g);
    r.norm_value = luxemburg_norm(u, p, g);
    const double a = std::pow(r.norm_value, p.min());
    const double b = std::pow(r.norm_value, p.max());
    r.relation_band = {std::min(a, b), std::max(a, b)};
    r.band_holds = r.modular_value >= r.relation_band.first * (1.0 - slack) &&
                   r.modular_value <= r.relation_band.second * (1.0 + slack);
    return r;
}

inline ModularReport norm_modular_relation_check(const GridFunction& u, const ExponentField& p,
                                                 double slack = 1e-9) {
    return norm_modular_relation_check(u.span(), p, u.grid(), slack);
}

} // namespace vexp
