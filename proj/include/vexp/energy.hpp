#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vexp/grid.hpp"
#include "vexp/problem.hpp"
#include "vexp/quadrature.hpp"

namespace vexp {

enum class Quadrant { Q1, Q2, Q3, Q4 };

inline const char* to_string(Quadrant q) {
    switch (q) {
        case Quadrant::Q1: return "Q1";
        case Quadrant::Q2: return "Q2";
        case Quadrant::Q3: return "Q3";
        case Quadrant::Q4: return "Q4";
    }
    return "?";
}

inline Quadrant parse_quadrant(const std::string& s) {
    if (s == "Q1" || s == "1") return Quadrant::Q1;
    if (s == "Q2" || s == "2") return Quadrant::Q2;
    if (s == "Q3" || s == "3") return Quadrant::Q3;
    if (s == "Q4" || s == "4") return Quadrant::Q4;
    throw ConfigError("unknown quadrant tag '" + s + "' (expected Q1..Q4)");
}

/// Sign of the cone in each component: +1 for u >= 0, -1 for u <= 0.
inline std::pair<double, double> quadrant_signs(Quadrant q) {
    switch (q) {
        case Quadrant::Q1: return {1.0, 1.0};
        case Quadrant::Q2: return {-1.0, 1.0};
        case Quadrant::Q3: return {-1.0, -1.0};
        case Quadrant::Q4: return {1.0, -1.0};
    }
    throw ConfigError("invalid quadrant tag");
}

namespace detail {

// Flux factor |g|^{p-2}; regularized only where p < 2, where it is singular at g = 0.
inline double flux_factor(double g2, double p, double eps) {
    if (p < 2.0) return std::pow(g2 + eps, 0.5 * (p - 2.0));
    if (p == 2.0) return 1.0;
    return std::pow(g2, 0.5 * (p - 2.0));
}

inline double density(double g2, double p) { return g2 == 0.0 ? 0.0 : std::pow(g2, 0.5 * p) / p; }

/**
 * Element loop shared by the energy, its gradient and the metric assembly.
 * 1D: cells [i, i+1]. 2D: each cell split into a lower-left and an
 * upper-right triangle. Per element the visitor receives the element
 * gradient, the measure and the vertex list with the coefficient of each
 * vertex in each gradient component.
 */
struct Element {
    std::array<std::size_t, 3> vert{};
    int nv = 2;
    double measure = 0.0;
    std::array<double, 2> grad{0.0, 0.0};
    // d grad[axis] / d u[vert[m]]
    std::array<std::array<double, 3>, 2> coef{};
};

template <class Visit>
void for_each_element(const Grid& g, std::span<const double> u, Visit&& visit) {
    Element e;
    if (g.dimension() == 1) {
        const double h = g.spacing(0);
        e.nv = 2;
        e.measure = h;
        e.coef[0] = {-1.0 / h, 1.0 / h, 0.0};
        e.coef[1] = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i + 1 < g.nodes(0); ++i) {
            e.vert = {i, i + 1, 0};
            e.grad = {(u[i + 1] - u[i]) / h, 0.0};
            visit(e);
        }
        return;
    }
    const double hx = g.spacing(0), hy = g.spacing(1);
    const std::size_t nx = g.nodes(0), ny = g.nodes(1);
    e.nv = 3;
    e.measure = 0.5 * hx * hy;
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const std::size_t k00 = g.index(i, j), k10 = g.index(i + 1, j);
            const std::size_t k01 = g.index(i, j + 1), k11 = g.index(i + 1, j + 1);
            e.vert = {k00, k10, k01};
            e.coef[0] = {-1.0 / hx, 1.0 / hx, 0.0};
            e.coef[1] = {-1.0 / hy, 0.0, 1.0 / hy};
            e.grad = {(u[k10] - u[k00]) / hx, (u[k01] - u[k00]) / hy};
            visit(e);
            e.vert = {k11, k01, k10};
            e.coef[0] = {1.0 / hx, -1.0 / hx, 0.0};
            e.coef[1] = {1.0 / hy, 0.0, -1.0 / hy};
            e.grad = {(u[k11] - u[k01]) / hx, (u[k11] - u[k10]) / hy};
            visit(e);
        }
    }
}

/**
 * Integral of (1/p)|grad u|^p with vertex quadrature on each element;
 * accumulates the derivative into `grad_out` when it is non-empty.
 */
inline double principal_part(const Grid& g, std::span<const double> u, const std::vector<double>& p, double eps,
                             std::span<double> grad_out) {
    double total = 0.0;
    const bool want = !grad_out.empty();
    for_each_element(g, u, [&](const Element& e) {
        const double g2 = e.grad[0] * e.grad[0] + e.grad[1] * e.grad[1];
        const double w = e.measure / e.nv;
        double dens = 0.0, fac = 0.0;
        for (int m = 0; m < e.nv; ++m) {
            const double pv = p[e.vert[m]];
            dens += density(g2, pv);
            if (want) fac += flux_factor(g2, pv, eps);
        }
        total += w * dens;
        if (want) {
            const double fx = w * fac * e.grad[0], fy = w * fac * e.grad[1];
            for (int m = 0; m < e.nv; ++m) grad_out[e.vert[m]] += fx * e.coef[0][m] + fy * e.coef[1][m];
        }
    });
    return total;
}

} // namespace detail

/// Parts of phi = Phi_u + Phi_v - coupling - potential.
struct EnergyParts {
    double phi_u = 0.0;
    double phi_v = 0.0;
    double coupling = 0.0;
    double potential = 0.0;

    double principal() const { return phi_u + phi_v; }
    double total() const { return phi_u + phi_v - coupling - potential; }
};

/**
 * The discrete functional phi, optionally truncated to a quadrant.
 *
 * With a quadrant the arguments of the coupling term and of F are replaced
 * by their projections on the quadrant's sign cone, the gradient terms keep
 * the raw fields. Holds a pointer to the problem, which must outlive it.
 */
class EnergyFunctional {
public:
    explicit EnergyFunctional(const ProblemSpec& prob, std::optional<Quadrant> quadrant = std::nullopt)
        : prob_(&prob), quadrant_(quadrant), nl_(prob.nonlinearity, prob.p, prob.q),
          weights_(trapezoid_weights(prob.grid)) {}

    const ProblemSpec& problem() const { return *prob_; }
    const Grid& grid() const { return prob_->grid; }
    std::optional<Quadrant> quadrant() const { return quadrant_; }
    const std::vector<double>& weights() const { return weights_; }

    EnergyParts parts(std::span<const double> u, std::span<const double> v) const {
        return evaluate(u, v, {}, {});
    }

    double value(std::span<const double> u, std::span<const double> v) const { return parts(u, v).total(); }

    /// Energy plus gradient with respect to all nodal values; boundary entries are zero.
    double value_and_gradient(std::span<const double> u, std::span<const double> v, std::vector<double>& gu,
                              std::vector<double>& gv) const {
        gu.assign(u.size(), 0.0);
        gv.assign(v.size(), 0.0);
        return evaluate(u, v, gu, gv).total();
    }

    /**
     * Discrete L2 norm of the strong-form defect: sqrt(sum g_k^2 / w_k) over
     * interior nodes. The nodal gradient is the weak form tested against
     * hat functions; dividing by the lumped mass turns it into a pointwise
     * defect, which keeps the number mesh-independent.
     */
    double residual(std::span<const double> gu, std::span<const double> gv) const {
        double s = 0.0;
        for (std::size_t k = 0; k < gu.size(); ++k) {
            if (prob_->grid.on_boundary(k)) continue;
            s += (gu[k] * gu[k] + gv[k] * gv[k]) / weights_[k];
        }
        return std::sqrt(s);
    }

private:
    EnergyParts evaluate(std::span<const double> u, std::span<const double> v, std::span<double> gu,
                         std::span<double> gv) const {
        const ProblemSpec& pr = *prob_;
        const Grid& g = pr.grid;
        require_size(g, u.size(), "energy");
        require_size(g, v.size(), "energy");

        EnergyParts e;
        e.phi_u = detail::principal_part(g, u, pr.p.values(), pr.grad_regularization, gu);
        e.phi_v = detail::principal_part(g, v, pr.q.values(), pr.grad_regularization, gv);

        const bool want = !gu.empty();
        double su = 0.0, sv = 0.0;
        if (quadrant_) std::tie(su, sv) = quadrant_signs(*quadrant_);

        double coupling = 0.0, potential = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (g.on_boundary(k)) continue;
            double uk = u[k], vk = v[k];
            double du = 1.0, dv = 1.0;  // derivative of the truncation
            if (quadrant_) {
                if (uk * su < 0.0) { uk = 0.0; du = 0.0; }
                if (vk * sv < 0.0) { vk = 0.0; dv = 0.0; }
            }
            const double w = weights_[k];
            const double au = std::fabs(uk), av = std::fabs(vk);
            double c = 0.0, cu = 0.0, cv = 0.0;
            if (pr.lambda != 0.0 && au > 0.0 && av > 0.0) {
                const double a = pr.alpha[k], b = pr.beta[k];
                const double pa = std::pow(au, a), pb = std::pow(av, b);
                c = pr.lambda * pa * pb;
                if (want) {
                    cu = pr.lambda * a * (pa / au) * pb * (uk > 0.0 ? 1.0 : -1.0);
                    cv = pr.lambda * b * pa * (pb / av) * (vk > 0.0 ? 1.0 : -1.0);
                }
            }
            const FValue f = nl_.at(k, uk, vk);
            coupling += w * c;
            potential += w * f.F;
            if (want) {
                gu[k] -= w * (cu + f.F_u) * du;
                gv[k] -= w * (cv + f.F_v) * dv;
            }
        }
        e.coupling = coupling;
        e.potential = potential;
        if (want) {
            for (std::size_t k = 0; k < g.size(); ++k)
                if (g.on_boundary(k)) { gu[k] = 0.0; gv[k] = 0.0; }
        }
        return e;
    }

    const ProblemSpec* prob_;
    std::optional<Quadrant> quadrant_;
    NodalNonlinearity nl_;
    std::vector<double> weights_;
};

inline double phi_energy(const GridFunction& u, const GridFunction& v, const ProblemSpec& prob) {
    return EnergyFunctional(prob).value(u.span(), v.span());
}

inline std::pair<GridFunction, GridFunction> phi_gradient(const GridFunction& u, const GridFunction& v,
                                                          const ProblemSpec& prob) {
    std::vector<double> gu, gv;
    EnergyFunctional(prob).value_and_gradient(u.span(), v.span(), gu, gv);
    return {GridFunction(prob.grid, std::move(gu)), GridFunction(prob.grid, std::move(gv))};
}

inline double truncated_energy(const GridFunction& u, const GridFunction& v, const ProblemSpec& prob,
                               Quadrant quadrant) {
    return EnergyFunctional(prob, quadrant).value(u.span(), v.span());
}

inline std::pair<GridFunction, GridFunction> truncated_gradient(const GridFunction& u, const GridFunction& v,
                                                                const ProblemSpec& prob, Quadrant quadrant) {
    std::vector<double> gu, gv;
    EnergyFunctional(prob, quadrant).value_and_gradient(u.span(), v.span(), gu, gv);
    return {GridFunction(prob.grid, std::move(gu)), GridFunction(prob.grid, std::move(gv))};
}

/// Norm of the weak-form defect of the untruncated system at (u, v).
inline double weak_residual(std::span<const double> u, std::span<const double> v, const ProblemSpec& prob) {
    const EnergyFunctional phi(prob);
    std::vector<double> gu, gv;
    phi.value_and_gradient(u, v, gu, gv);
    return phi.residual(gu, gv);
}

inline double weak_residual(const GridFunction& u, const GridFunction& v, const ProblemSpec& prob) {
    return weak_residual(u.span(), v.span(), prob);
}

/// Derivative of the gradient terms alone (the operator Phi').
inline std::pair<std::vector<double>, std::vector<double>> principal_gradient(std::span<const double> u,
                                                                              std::span<const double> v,
                                                                              const ProblemSpec& prob) {
    std::vector<double> gu(u.size(), 0.0), gv(v.size(), 0.0);
    detail::principal_part(prob.grid, u, prob.p.values(), prob.grad_regularization, gu);
    detail::principal_part(prob.grid, v, prob.q.values(), prob.grad_regularization, gv);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (prob.grid.on_boundary(k)) { gu[k] = 0.0; gv[k] = 0.0; }
    return {std::move(gu), std::move(gv)};
}

} // namespace vexp
