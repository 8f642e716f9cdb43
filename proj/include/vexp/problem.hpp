#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "vexp/exponent_field.hpp"
#include "vexp/nonlinearity.hpp"

namespace vexp {

struct Tolerances {
    double inequality_slack = 1e-9;  // relative slack on sampled inequalities
    double identity = 1e-12;         // exact identities (H3, H4)
    double theta_sum = 1e-9;         // |t1/p + t2/q - 1|
};

/**
 * Constants of the growth conditions. The theory only asserts they exist;
 * they are user input, with calibrated defaults for the shipped problem.
 */
struct HypothesisConstants {
    std::optional<double> C;                   // growth bound on |F_u u| + |F_v v|
    std::optional<Expression> gamma, delta;    // growth exponents, p < gamma, q < delta
    std::optional<double> M, C1, C2;           // far-field log-superlinearity
};

struct ProblemSpec {
    Grid grid;
    ExponentField p, q, alpha, beta;
    double lambda = 1e-3;
    NonlinearitySpec nonlinearity;
    double grad_regularization = 1e-10;
    Tolerances tolerances{};
    HypothesisConstants constants{};
};

/**
 * Structural checks on the problem data. Throws ValidationError whose
 * constraint() names the violated condition.
 */
inline void validate(const ProblemSpec& prob) {
    const Grid& g = prob.grid;
    for (const ExponentField* f : {&prob.p, &prob.q, &prob.alpha, &prob.beta})
        if (!(f->grid() == g)) throw ValidationError("grid", "exponent " + f->name() + " lives on a different grid");
    if (!(prob.grad_regularization > 0.0))
        throw ValidationError("regularization", "gradient regularization must be positive");
    if (!(prob.lambda >= 0.0) || !std::isfinite(prob.lambda))
        throw ValidationError("lambda", "lambda must be a finite nonnegative number");

    for (std::size_t k = 0; k < g.size(); ++k) {
        const double s = prob.alpha[k] / prob.p[k] + prob.beta[k] / prob.q[k];
        if (!(s < 1.0))
            throw ValidationError("H_alpha_beta", "alpha/p + beta/q = " + std::to_string(s) +
                                                      " is not below 1 at node " + std::to_string(k));
    }

    const auto& nl = prob.nonlinearity;
    if (nl.kind == NonlinearityKind::paper_example) {
        if (!nl.a || !nl.b || !nl.theta1 || !nl.theta2)
            throw ValidationError("nonlinearity", "paper_example needs a, b, theta1, theta2");
        for (std::size_t k = 0; k < g.size(); ++k) {
            const std::string at = " at node " + std::to_string(k);
            if (!((*nl.a)[k] > prob.p[k])) throw ValidationError("a>p", "exponent a must exceed p" + at);
            if (!((*nl.b)[k] > prob.q[k])) throw ValidationError("b>q", "exponent b must exceed q" + at);
            if (!((*nl.theta1)[k] < prob.p[k])) throw ValidationError("theta1<p", "theta1 must lie in (1, p)" + at);
            if (!((*nl.theta2)[k] < prob.q[k])) throw ValidationError("theta2<q", "theta2 must lie in (1, q)" + at);
            const double s = (*nl.theta1)[k] / prob.p[k] + (*nl.theta2)[k] / prob.q[k];
            if (std::fabs(s - 1.0) > prob.tolerances.theta_sum)
                throw ValidationError("theta1/p+theta2/q=1",
                                      "theta1/p + theta2/q = " + std::to_string(s) + ", must equal 1" + at);
        }
    } else if (nl.kind == NonlinearityKind::separable_power) {
        if (!(nl.power_u > 1.0 && nl.power_v > 1.0))
            throw ValidationError("nonlinearity", "separable_power exponents must exceed 1");
    }

    for (std::size_t k = 0; k < g.size(); ++k) {
        const FValue f = evaluate_F(nl, prob.p, prob.q, g.coordinates(k), 0.0, 0.0);
        if (f.F != 0.0)
            throw ValidationError("F(x,0,0)=0", "nonlinearity does not vanish at the origin at node " +
                                                    std::to_string(k));
    }
}

/**
 * Shipped problem: p = q = 3 (or 3 + x/2), a = b = 4, theta = p/2,
 * alpha = beta = 1.2, lambda = 1e-3 on the unit interval or square.
 */
inline ProblemSpec default_problem(int dimension = 1, std::size_t nodes = 129, bool monotone_exponent = false) {
    const Grid g = dimension == 1 ? make_grid_1d(nodes) : make_grid_2d(nodes, nodes);
    const Expression pe = monotone_exponent ? Expression::parse("3 + x/2") : Expression::constant(3.0);
    const Expression half = Expression::constant(0.5);
    ExponentField p(g, pe, "p"), q(g, pe, "q");
    auto nl = NonlinearitySpec::paper_example(ExponentField::constant(g, 4.0, "a"),
                                              ExponentField::constant(g, 4.0, "b"),
                                              ExponentField(g, half * pe, "theta1"),
                                              ExponentField(g, half * pe, "theta2"));
    ProblemSpec prob{g, p, q, ExponentField::constant(g, 1.2, "alpha"), ExponentField::constant(g, 1.2, "beta"),
                     1e-3, std::move(nl)};
    prob.constants.C = 1e3;
    prob.constants.gamma = pe + 0.5;
    prob.constants.delta = pe + 0.5;
    prob.constants.M = 1.0;
    prob.constants.C1 = 0.01;
    prob.constants.C2 = 0.1;
    return prob;
}

} // namespace vexp
