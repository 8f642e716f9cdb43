#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <span>
#include <vector>

#include "vexp/energy.hpp"

namespace vexp {

namespace detail {

inline double max_element_gradient(const Grid& g, std::span<const double> f) {
    double gmax = 0.0;
    for_each_element(g, f, [&](const Element& e) { gmax = std::max(gmax, std::hypot(e.grad[0], e.grad[1])); });
    return gmax;
}

} // namespace detail

/**
 * Stiffness matrix of one field with element weights
 * (p-1) (|grad f|^2 + kappa^2)^{(p-2)/2}, restricted to interior nodes and
 * factored once. This is the second variation of the gradient term with the
 * anisotropic part dropped, which keeps it SPD.
 */
class FieldMetric {
public:
    FieldMetric(const Grid& g, std::span<const double> f, const std::vector<double>& p, double kappa) {
        map_.assign(g.size(), -1);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (!g.on_boundary(k)) map_[k] = static_cast<int>(dofs_++);

        std::vector<Eigen::Triplet<double>> trip;
        const double k2 = kappa * kappa;
        detail::for_each_element(g, f, [&](const detail::Element& e) {
            const double g2 = e.grad[0] * e.grad[0] + e.grad[1] * e.grad[1];
            double c = 0.0;
            for (int m = 0; m < e.nv; ++m) {
                const double pv = p[e.vert[m]];
                c += (pv - 1.0) * std::pow(g2 + k2, 0.5 * (pv - 2.0));
            }
            c *= e.measure / e.nv;
            for (int a = 0; a < e.nv; ++a) {
                const int ia = map_[e.vert[a]];
                if (ia < 0) continue;
                for (int b = 0; b < e.nv; ++b) {
                    const int ib = map_[e.vert[b]];
                    if (ib < 0) continue;
                    const double val = c * (e.coef[0][a] * e.coef[0][b] + e.coef[1][a] * e.coef[1][b]);
                    if (val != 0.0) trip.emplace_back(ia, ib, val);
                }
            }
        });
        const auto n = static_cast<Eigen::Index>(dofs_);
        Eigen::SparseMatrix<double> m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        solver_.compute(m);
        if (solver_.info() != Eigen::Success) throw ConvergenceError("metric factorization failed");
    }

    FieldMetric(const FieldMetric&) = delete;
    FieldMetric& operator=(const FieldMetric&) = delete;

    /// d = M^{-1} r on interior nodes, zero on the boundary.
    void solve(std::span<const double> r, std::vector<double>& d) const {
        d.assign(r.size(), 0.0);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(dofs_));
        for (std::size_t k = 0; k < r.size(); ++k)
            if (map_[k] >= 0) rhs[map_[k]] = r[k];
        const Eigen::VectorXd x = solver_.solve(rhs);
        for (std::size_t k = 0; k < r.size(); ++k)
            if (map_[k] >= 0) d[k] = x[map_[k]];
    }

private:
    std::vector<int> map_;
    std::size_t dofs_ = 0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/**
 * Block-diagonal metric for the pair (u, v). kappa is a fixed fraction of
 * the largest element gradient of either component, so the metric scales
 * with the iterate and stays SPD at the origin.
 */
class PrincipalMetric {
public:
    PrincipalMetric(const ProblemSpec& prob, std::span<const double> u, std::span<const double> v,
                    double kappa_fraction = 1e-2)
        : kappa_(std::max(kappa_fraction * std::max(detail::max_element_gradient(prob.grid, u),
                                                    detail::max_element_gradient(prob.grid, v)),
                          1e-12)),
          mu_(prob.grid, u, prob.p.values(), kappa_),
          mv_(prob.grid, v, prob.q.values(), kappa_) {}

    void solve(std::span<const double> ru, std::span<const double> rv, std::vector<double>& du,
               std::vector<double>& dv) const {
        mu_.solve(ru, du);
        mv_.solve(rv, dv);
    }

    double kappa() const { return kappa_; }

private:
    double kappa_;
    FieldMetric mu_, mv_;
};

} // namespace vexp
