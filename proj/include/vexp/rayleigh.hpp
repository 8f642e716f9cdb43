#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "vexp/energy.hpp"
#include "vexp/exponent_field.hpp"
#include "vexp/metric.hpp"

namespace vexp {

namespace detail {

// Integral of (1/p)|u|^p with trapezoid weights; derivative into grad_out if non-empty.
inline double weighted_modular(std::span<const double> u, const std::vector<double>& p, const std::vector<double>& w,
                               std::span<double> grad_out) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double a = std::fabs(u[k]);
        if (a == 0.0) continue;
        const double pa = std::pow(a, p[k]);
        s += w[k] * pa / p[k];
        if (!grad_out.empty()) grad_out[k] += w[k] * (pa / a) * (u[k] > 0.0 ? 1.0 : -1.0);
    }
    return s;
}

} // namespace detail

/// Quotient of the weighted gradient modular by the weighted modular.
inline double rayleigh_quotient(std::span<const double> u, const ExponentField& p, const Grid& g) {
    require_size(g, u.size(), "rayleigh_quotient");
    const double den = detail::weighted_modular(u, p.values(), trapezoid_weights(g), {});
    if (den == 0.0) throw DomainError("rayleigh_quotient: u vanishes identically");
    return detail::principal_part(g, u, p.values(), 0.0, {}) / den;
}

inline double rayleigh_quotient(const GridFunction& u, const ExponentField& p) {
    return rayleigh_quotient(u.span(), p, u.grid());
}

/// Quotient and its nodal gradient (boundary entries zero).
inline double rayleigh_gradient(std::span<const double> u, const ExponentField& p, const Grid& g,
                                std::vector<double>& grad, double eps = 1e-10) {
    require_size(g, u.size(), "rayleigh_gradient");
    const auto w = trapezoid_weights(g);
    std::vector<double> gn(u.size(), 0.0), gd(u.size(), 0.0);
    const double num = detail::principal_part(g, u, p.values(), eps, gn);
    const double den = detail::weighted_modular(u, p.values(), w, gd);
    if (den == 0.0) throw DomainError("rayleigh_gradient: u vanishes identically");
    const double r = num / den;
    grad.assign(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!g.on_boundary(k)) grad[k] = (gn[k] - r * gd[k]) / den;
    return r;
}

struct RayleighOptions {
    std::size_t max_iterations = 4000;
    double relative_stop = 1e-13;  // stop when the predicted decrease falls below this times R
    double armijo = 1e-4;
    double shrink = 0.5;
};

struct RayleighEstimate {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> restart_values;
    std::vector<std::size_t> restart_iterations;
    std::vector<double> minimizer;
};

/**
 * Metric-preconditioned gradient descent on the quotient with Armijo
 * backtracking. The quotient is not scale invariant for variable p, so the
 * iterate is not renormalized; the descent also moves the scale.
 */
inline double descend_rayleigh(std::vector<double>& u, const ExponentField& p, const Grid& g,
                               const RayleighOptions& opt, std::size_t& iterations) {
    std::vector<double> grad, d, trial(u.size()), tg;
    double r = rayleigh_gradient(u, p, g, grad);
    double step = 1.0;
    iterations = 0;
    for (; iterations < opt.max_iterations; ++iterations) {
        const double kappa = std::max(1e-2 * detail::max_element_gradient(g, u), 1e-12);
        FieldMetric m(g, u, p.values(), kappa);
        m.solve(grad, d);
        // The metric is homogeneous of degree p-2 in u while R is degree 0;
        // rescale so a unit step is of the order of the iterate.
        double dg = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) dg += d[k] * grad[k];
        if (!(dg > 0.0) || dg < opt.relative_stop * r) break;
        double umax = 0.0, dmax = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            umax = std::max(umax, std::fabs(u[k]));
            dmax = std::max(dmax, std::fabs(d[k]));
        }
        const double scale = 0.5 * umax / dmax;
        step = std::min(1.0, 4.0 * step);
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            const double s = step * scale;
            for (std::size_t k = 0; k < u.size(); ++k) trial[k] = u[k] - s * d[k];
            double rt;
            try {
                rt = rayleigh_quotient(trial, p, g);
            } catch (const DomainError&) {
                step *= opt.shrink;
                continue;
            }
            if (rt <= r - opt.armijo * s * dg) {
                u.swap(trial);
                accepted = true;
                break;
            }
            step *= opt.shrink;
        }
        if (!accepted) break;
        r = rayleigh_gradient(u, p, g, grad);
    }
    return r;
}

/**
 * Smallest quotient found from `restarts` random positive starts.
 * Starts are smooth positive profiles with random modal perturbations and
 * random amplitude in [0.1, 10].
 */
inline RayleighEstimate minimize_rayleigh(const ExponentField& p, const Grid& g, std::size_t restarts,
                                          std::uint64_t seed = 0, const RayleighOptions& opt = {}) {
    if (restarts == 0) throw ConfigError("minimize_rayleigh: need at least one restart");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    RayleighEstimate est;
    for (std::size_t r = 0; r < restarts; ++r) {
        double coef[3][3];
        for (auto& row : coef)
            for (double& c : row) c = 0.3 * unif(rng);
        const double amp = std::pow(10.0, unif(rng));
        std::vector<double> u(g.size(), 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (g.on_boundary(k)) continue;
            const Point x = g.coordinates(k);
            double base = 1.0, pert = 1.0;
            for (int a = 0; a < g.dimension(); ++a) {
                const double t = (x[a] - g.lower(a)) / (g.upper(a) - g.lower(a));
                base *= 4.0 * t * (1.0 - t);
                double s = 0.0;
                for (int m = 0; m < 3; ++m) s += coef[a][m] * std::sin((m + 2) * 3.141592653589793 * t);
                pert += s;
            }
            u[k] = amp * base * std::max(0.2, pert);
        }
        std::size_t its = 0;
        const double val = descend_rayleigh(u, p, g, opt, its);
        est.restart_values.push_back(val);
        est.restart_iterations.push_back(its);
        if (val < est.value) {
            est.value = val;
            est.minimizer = u;
        }
    }
    return est;
}

} // namespace vexp
