#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "vexp/discretization.hpp"
#include "vexp/energy.hpp"

using namespace vexp;

namespace {

// Quadratic Dirichlet energy with a linear load; alpha, beta are irrelevant at lambda = 0.
ProblemSpec poisson_problem(const Grid& g) {
    ProblemSpec prob{g,
                     ExponentField::constant(g, 2.0, "p"),
                     ExponentField::constant(g, 2.0, "q"),
                     ExponentField::constant(g, 1.2, "alpha"),
                     ExponentField::constant(g, 1.2, "beta"),
                     0.0,
                     NonlinearitySpec::linear_source(Expression::parse("1 + x"), Expression::parse("sin(pi*x) - 2"))};
    return prob;
}

ProblemSpec zero_potential(const Grid& g) {
    ProblemSpec prob = default_problem(g.dimension(), g.nodes(0));
    prob.lambda = 0.0;
    prob.nonlinearity = NonlinearitySpec::from_expression("0");
    return prob;
}

GridFunction abs_field(const GridFunction& f) {
    std::vector<double> a(f.values());
    for (double& x : a) x = std::fabs(x);
    return GridFunction(f.grid(), std::move(a));
}

std::vector<double> concat(const GridFunction& u, const GridFunction& v) {
    std::vector<double> w(u.values());
    w.insert(w.end(), v.values().begin(), v.values().end());
    return w;
}

// FD check of an energy functional over 50 random probes; returns the worst relative error.
double worst_fd_error(const EnergyFunctional& F, std::mt19937_64& rng, double amplitude, double step = 1e-6) {
    const Grid& g = F.grid();
    const std::size_t n = g.size();
    auto f = [&](const std::vector<double>& w) {
        return F.value(std::span<const double>(w.data(), n), std::span<const double>(w.data() + n, n));
    };
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto u = testing_support::random_field(g, rng, amplitude), v = testing_support::random_field(g, rng, amplitude);
        std::vector<double> gu, gv;
        F.value_and_gradient(u.span(), v.span(), gu, gv);
        gu.insert(gu.end(), gv.begin(), gv.end());
        auto d = oracles::interior_direction(g, rng);
        const auto d2 = oracles::interior_direction(g, rng);
        d.insert(d.end(), d2.begin(), d2.end());
        worst = std::max(worst, oracles::directional_error(f, concat(u, v), gu, d, step));
    }
    return worst;
}

} // namespace

TEST(ExampleF, Values) {
    const ExampleExponents e{3, 3, 4, 4, 1.5, 1.5};
    const FValue z = example_F(e, 0.0, 0.0);
    EXPECT_EQ(z.F, 0.0);
    EXPECT_EQ(z.F_u, 0.0);
    EXPECT_EQ(z.F_v, 0.0);
    const double l = std::log(2.0);
    EXPECT_NEAR(example_F(e, 1.0, 1.0).F, 2 * std::pow(l, 4) + l * l, 1e-14);
    EXPECT_NEAR(example_F(e, 1.0, 1.0).F, 0.94212, 1e-5);

    const ProblemSpec prob = default_problem();
    const FValue viaSpec = evaluate_F(prob.nonlinearity, prob.p, prob.q, {0.3, 0.0}, 1.0, 1.0);
    EXPECT_NEAR(viaSpec.F, 2 * std::pow(l, 4) + l * l, 1e-14);
}

TEST(ExampleF, EvenAndNonnegative) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-50, 50), ex(2.1, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = ex(rng), q = ex(rng);
        const double t1 = 1.0 + 0.5 * (p - 1.0);
        const double t2 = q * (1.0 - t1 / p);
        const ExampleExponents e{p, q, p + 1, q + 0.5, t1, t2};
        const double u = unif(rng), v = unif(rng);
        const FValue a = example_F(e, u, v), b = example_F(e, -u, -v);
        EXPECT_EQ(a.F, b.F);
        EXPECT_EQ(a.F_u, -b.F_u);
        EXPECT_GE(a.F, 0.0);
    }
}

TEST(ExampleF, PartialsMatchFiniteDifferences) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-3, 3);
    const ExampleExponents e{3.2, 3.0, 4.5, 4.0, 1.6, 1.5};
    for (int i = 0; i < 200; ++i) {
        const double u = unif(rng), v = unif(rng), h = 1e-6;
        const FValue f = example_F(e, u, v);
        const double fu = (example_F(e, u + h, v).F - example_F(e, u - h, v).F) / (2 * h);
        const double fv = (example_F(e, u, v + h).F - example_F(e, u, v - h).F) / (2 * h);
        EXPECT_NEAR(f.F_u, fu, 1e-6 * (1 + std::fabs(fu)));
        EXPECT_NEAR(f.F_v, fv, 1e-6 * (1 + std::fabs(fv)));
    }
}

TEST(PhiEnergy, Examples) {
    const ProblemSpec prob = default_problem();
    const Grid& g = prob.grid;
    EXPECT_EQ(phi_energy(GridFunction::zero(g), GridFunction::zero(g), prob), 0.0);

    std::mt19937_64 rng(9);
    const ProblemSpec free = zero_potential(g);
    for (int i = 0; i < 20; ++i)
        EXPECT_GE(phi_energy(testing_support::random_field(g, rng, 5), testing_support::random_field(g, rng, 5), free), 0.0);

    const auto h1 = tent_function({0.25, 0.0}, 0.2, g), h2 = tent_function({0.7, 0.0}, 0.2, g);
    EXPECT_LT(phi_energy(h1 * 1e3, h2 * 1e3, prob), 0.0);
}

TEST(PhiEnergy, BitwiseEven) {
    std::mt19937_64 rng(10);
    for (const ProblemSpec& prob : {default_problem(), default_problem(1, 129, true), default_problem(2, 17, true)}) {
        for (int i = 0; i < 20; ++i) {
            const auto u = testing_support::random_field(prob.grid, rng, 3), v = testing_support::random_field(prob.grid, rng, 3);
            EXPECT_EQ(phi_energy(u, v, prob), phi_energy(-u, -v, prob));
        }
    }
}

TEST(PhiGradient, ZeroAtOrigin) {
    const ProblemSpec prob = default_problem();
    const auto z = GridFunction::zero(prob.grid);
    const auto [gu, gv] = phi_gradient(z, z, prob);
    EXPECT_TRUE(gu.is_zero());
    EXPECT_TRUE(gv.is_zero());
    EXPECT_EQ(weak_residual(z, z, prob), 0.0);
}

TEST(PhiGradient, FiniteDifferences1D) {
    std::mt19937_64 rng(11);
    for (const ProblemSpec& prob : {default_problem(), default_problem(1, 65, true)}) {
        EXPECT_LT(worst_fd_error(EnergyFunctional(prob), rng, 1.0), 1e-5);
        for (Quadrant q : {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4})
            EXPECT_LT(worst_fd_error(EnergyFunctional(prob, q), rng, 1.0), 1e-5) << to_string(q);
    }
}

TEST(PhiGradient, FiniteDifferences2D) {
    std::mt19937_64 rng(12);
    const ProblemSpec prob = default_problem(2, 17, true);
    EXPECT_LT(worst_fd_error(EnergyFunctional(prob), rng, 1.0), 1e-5);
    for (Quadrant q : {Quadrant::Q1, Quadrant::Q3})
        EXPECT_LT(worst_fd_error(EnergyFunctional(prob, q), rng, 1.0), 1e-5) << to_string(q);
}

// Exponent below 2 exercises the regularized flux. The density is only C^1 at
// zero gradient, so a 1e-6 step loses accuracy on nearly flat elements; 1e-8 does not.
TEST(PhiGradient, FiniteDifferencesSubquadratic) {
    std::mt19937_64 rng(13);
    ProblemSpec prob = zero_potential(make_grid_1d(65));
    prob.p = ExponentField(prob.grid, "1.5 + x", "p");
    prob.q = ExponentField(prob.grid, "1.8", "q");
    EXPECT_LT(worst_fd_error(EnergyFunctional(prob), rng, 1.0, 1e-8), 1e-5);
}

TEST(PhiGradient, MatchesFivePointStencil) {
    const Grid g = make_grid_2d(13, 9, {0.0, 0.0}, {1.0, 2.0});
    const ProblemSpec prob = poisson_problem(g);
    std::mt19937_64 rng(14);
    const auto u = testing_support::random_field(g, rng), v = testing_support::random_field(g, rng);
    const auto [gu, gv] = phi_gradient(u, v, prob);
    const double hx = g.spacing(0), hy = g.spacing(1);
    double scale = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) scale = std::max(scale, std::fabs(gu[k]));
    for (std::size_t j = 1; j + 1 < g.nodes(1); ++j) {
        for (std::size_t i = 1; i + 1 < g.nodes(0); ++i) {
            const std::size_t k = g.index(i, j);
            const Point x = g.coordinates(k);
            auto lap = [&](const GridFunction& f) {
                return hx * hy * ((2 * f[k] - f[g.index(i - 1, j)] - f[g.index(i + 1, j)]) / (hx * hx) +
                                  (2 * f[k] - f[g.index(i, j - 1)] - f[g.index(i, j + 1)]) / (hy * hy));
            };
            EXPECT_NEAR(gu[k], lap(u) - hx * hy * (1 + x[0]), 1e-12 * scale);
            EXPECT_NEAR(gv[k], lap(v) - hx * hy * (std::sin(M_PI * x[0]) - 2), 1e-12 * scale);
        }
    }
    for (std::size_t k : g.boundary_nodes()) EXPECT_EQ(gu[k], 0.0);
}

TEST(WeakResidual, LinearSolveIsCritical) {
    for (const Grid& g : {make_grid_1d(65), make_grid_2d(17, 17)}) {
        const ProblemSpec prob = poisson_problem(g);
        const auto w = trapezoid_weights(g);
        std::vector<double> fu(g.size()), fv(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Point x = g.coordinates(k);
            fu[k] = w[k] * (1 + x[0]);
            fv[k] = w[k] * (std::sin(M_PI * x[0]) - 2);
        }
        const auto u = oracles::dense_stiffness_solve(g, fu), v = oracles::dense_stiffness_solve(g, fv);
        EXPECT_LT(weak_residual(u, v, prob), 1e-10);
    }
}

TEST(Truncation, Identities) {
    const ProblemSpec prob = default_problem();
    std::mt19937_64 rng(15);
    for (int i = 0; i < 20; ++i) {
        const auto u = abs_field(testing_support::random_field(prob.grid, rng, 2));
        const auto v = abs_field(testing_support::random_field(prob.grid, rng, 2));
        EXPECT_EQ(truncated_energy(u, v, prob, Quadrant::Q1), phi_energy(u, v, prob));
        const EnergyParts parts = EnergyFunctional(prob).parts(u.span(), v.span());
        EXPECT_NEAR(truncated_energy(-u, -v, prob, Quadrant::Q1), parts.principal(), 1e-14 * parts.principal());
        EXPECT_EQ(truncated_energy(-u, -v, prob, Quadrant::Q3), phi_energy(u, v, prob));
        EXPECT_EQ(truncated_energy(-u, v, prob, Quadrant::Q2), phi_energy(u, v, prob));
        EXPECT_EQ(truncated_energy(u, -v, prob, Quadrant::Q4), phi_energy(u, v, prob));
    }
}

TEST(Monotonicity, PointwiseInequalities) {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> pd(1.1, 6.0), cd(-10, 10);
    for (int i = 0; i < 10000; ++i) {
        const double xi[2] = {cd(rng), cd(rng)}, eta[2] = {cd(rng), cd(rng)};
        ASSERT_GE(oracles::monotonicity_margin(xi, eta, pd(rng)), -1e-12);
    }
}

TEST(Monotonicity, OperatorIsStrictlyMonotone) {
    std::mt19937_64 rng(17);
    const ProblemSpec prob = default_problem(1, 129, true);
    std::uniform_real_distribution<double> amp(0.01, 10);
    for (int i = 0; i < 200; ++i) {
        const auto u1 = testing_support::random_field(prob.grid, rng, amp(rng));
        const auto v1 = testing_support::random_field(prob.grid, rng, amp(rng));
        const auto u2 = testing_support::random_field(prob.grid, rng, amp(rng));
        const auto v2 = testing_support::random_field(prob.grid, rng, amp(rng));
        const auto [a1, b1] = principal_gradient(u1.span(), v1.span(), prob);
        const auto [a2, b2] = principal_gradient(u2.span(), v2.span(), prob);
        double s = 0.0;
        for (std::size_t k = 0; k < prob.grid.size(); ++k)
            s += (a1[k] - a2[k]) * (u1[k] - u2[k]) + (b1[k] - b2[k]) * (v1[k] - v2[k]);
        EXPECT_GT(s, 0.0);
    }
}

TEST(Coercivity, SmallNormsKeepAQuarterOfThePrincipalPart) {
    std::mt19937_64 rng(18);
    const ProblemSpec prob = default_problem();
    const EnergyFunctional F(prob);
    std::uniform_real_distribution<double> logn(-3, -2);
    for (int i = 0; i < 200; ++i) {
        auto u = testing_support::random_field(prob.grid, rng), v = testing_support::random_field(prob.grid, rng);
        u = u * (std::pow(10.0, logn(rng)) / sobolev_norm(u, prob.p));
        v = v * (std::pow(10.0, logn(rng)) / sobolev_norm(v, prob.q));
        const EnergyParts e = F.parts(u.span(), v.span());
        EXPECT_GE(e.total(), 0.25 * e.principal());
    }
}
