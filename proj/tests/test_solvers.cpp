#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "vexp/solvers.hpp"

using namespace vexp;

namespace {

void expect_inventory_invariants(const SolutionInventory& inv, const ProblemSpec& prob, const SolverConfig& cfg) {
    EXPECT_EQ(inv.distinct_count, inv.points.size());
    for (std::size_t i = 0; i < inv.points.size(); ++i) {
        const auto& p = inv.points[i];
        EXPECT_LE(p.residual, cfg.gradient_stop) << "point " << i;
        EXPECT_EQ(p.residual, weak_residual(p.u, p.v, prob)) << "point " << i;
        EXPECT_EQ(p.quadrant, classify_quadrant(p.u, p.v)) << "point " << i;
        for (std::size_t j = i + 1; j < inv.points.size(); ++j)
            EXPECT_GE(sup_distance(p, inv.points[j]), cfg.deflation_distance) << i << "," << j;
    }
}

ProblemSpec with_lambda(double lambda) {
    ProblemSpec prob = default_problem();
    prob.lambda = lambda;
    return prob;
}

ProblemSpec poisson_problem(const Grid& g) {
    return ProblemSpec{g,
                       ExponentField::constant(g, 2.0, "p"),
                       ExponentField::constant(g, 2.0, "q"),
                       ExponentField::constant(g, 1.2, "alpha"),
                       ExponentField::constant(g, 1.2, "beta"),
                       0.0,
                       NonlinearitySpec::linear_source(Expression::parse("1 + x"), Expression::parse("-3*x"))};
}

std::pair<GridFunction, GridFunction> mp_endpoint(const ProblemSpec& prob, const SolverConfig& cfg, double sign) {
    const auto [h1, h2] = detail::endpoint_tents(prob, cfg);
    const ScanResult scan = divergence_scan(prob, h1, h2, cfg.scan_values());
    const double t = scan.first_negative_t.value();
    return {h1 * (sign * t), h2 * (sign * t)};
}

} // namespace

TEST(ProjectQuadrant, ClampsAndIsIdempotent) {
    const Grid g = make_grid_1d(9);
    std::mt19937_64 rng(1);
    const auto u = testing_support::random_field(g, rng), v = testing_support::random_field(g, rng);
    for (Quadrant q : {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4}) {
        const auto [a, b] = project_quadrant(u, v, q);
        const auto [a2, b2] = project_quadrant(a, b, q);
        EXPECT_EQ(a.values(), a2.values());
        EXPECT_EQ(b.values(), b2.values());
        EXPECT_EQ(classify_quadrant(a, b) == "mixed", false);
        const auto [su, sv] = quadrant_signs(q);
        for (std::size_t k = 0; k < g.size(); ++k) {
            EXPECT_EQ(a[k], su * u[k] >= 0 ? u[k] : 0.0);
            EXPECT_EQ(b[k], sv * v[k] >= 0 ? v[k] : 0.0);
        }
    }
    // one negative node in u is zeroed by Q1, the rest is untouched
    std::vector<double> w(g.size(), 0.0);
    w[3] = -0.5;
    w[4] = 0.25;
    const auto [p1, p2] = project_quadrant(GridFunction(g, w), GridFunction::zero(g), Quadrant::Q1);
    EXPECT_EQ(p1[3], 0.0);
    EXPECT_EQ(p1[4], 0.25);
    // Q3 of (u, v) is the negation of Q1 of (-u, -v)
    const auto [q3u, q3v] = project_quadrant(u, v, Quadrant::Q3);
    const auto [q1u, q1v] = project_quadrant(-u, -v, Quadrant::Q1);
    EXPECT_EQ(q3u.values(), (-q1u).values());
    EXPECT_EQ(q3v.values(), (-q1v).values());
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.step_rule.shrink = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SolverConfig{};
    c.step_rule.armijo = 0.6;
    EXPECT_THROW(c.validate(), ConfigError);
    c = SolverConfig{};
    c.path_points = 4;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Descend, OriginIsStationary) {
    const ProblemSpec prob = default_problem();
    const auto z = GridFunction::zero(prob.grid);
    const CriticalPoint cp = descend(prob, z, z, std::nullopt, SolverConfig{});
    EXPECT_TRUE(cp.converged);
    EXPECT_EQ(cp.residual, 0.0);
    EXPECT_TRUE(cp.u.is_zero());
    EXPECT_TRUE(cp.v.is_zero());
}

TEST(Descend, MatchesLinearSolve) {
    for (const Grid& g : {make_grid_1d(129), make_grid_2d(17, 17)}) {
        const ProblemSpec prob = poisson_problem(g);
        const auto w = trapezoid_weights(g);
        std::vector<double> fu(g.size()), fv(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Point x = g.coordinates(k);
            fu[k] = w[k] * (1 + x[0]);
            fv[k] = w[k] * (-3 * x[0]);
        }
        const auto u = oracles::dense_stiffness_solve(g, fu), v = oracles::dense_stiffness_solve(g, fv);
        const auto z = GridFunction::zero(g);
        const CriticalPoint cp = descend(prob, z, z, std::nullopt, SolverConfig{});
        ASSERT_TRUE(cp.converged) << cp.note;
        EXPECT_LE(cp.residual, 1e-8);
        for (std::size_t k = 0; k < g.size(); ++k) {
            EXPECT_NEAR(cp.u[k], u[k], 1e-6);
            EXPECT_NEAR(cp.v[k], v[k], 1e-6);
        }
    }
}

TEST(Descend, TruncatedDescentStaysInTheConeAndDecreases) {
    const ProblemSpec prob = default_problem();
    const GridFunction bump = smooth_bump({0.5, 0.0}, 0.25, prob.grid);
    double t = 1.0;
    while (t > 1e-30 && !(truncated_energy(bump * t, bump * t, prob, Quadrant::Q1) < 0.0)) t *= 0.5;
    const GridFunction u0 = bump * t, v0 = bump * t;
    ASSERT_LT(truncated_energy(u0, v0, prob, Quadrant::Q1), 0.0);
    std::vector<double> trace;
    const CriticalPoint cp = descend(prob, u0, v0, Quadrant::Q1, SolverConfig{}, &trace);
    EXPECT_TRUE(cp.converged) << cp.note;
    EXPECT_LT(cp.energy, 0.0);
    EXPECT_LE(cp.residual, 1e-8);
    for (std::size_t k = 0; k < prob.grid.size(); ++k) {
        EXPECT_GE(cp.u[k], -1e-12);
        EXPECT_GE(cp.v[k], -1e-12);
    }
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1]) << "step " << i;
}

TEST(Descend, NegatedStartGivesNegatedResult) {
    const ProblemSpec prob = with_lambda(1.0);
    const GridFunction bump = smooth_bump({0.5, 0.0}, 0.25, prob.grid);
    const CriticalPoint a = descend(prob, bump * 0.01, bump * 0.02, Quadrant::Q1, SolverConfig{});
    const CriticalPoint b = descend(prob, bump * -0.01, bump * -0.02, Quadrant::Q3, SolverConfig{});
    EXPECT_EQ(a.u.values(), (-b.u).values());
    EXPECT_EQ(a.v.values(), (-b.v).values());
    EXPECT_EQ(a.energy, b.energy);
    EXPECT_EQ(b.quadrant, "Q3");
}

TEST(MountainPass, FirstQuadrantSaddle) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const auto z = GridFunction::zero(prob.grid);
    const auto [eu, ev] = mp_endpoint(prob, cfg, 1.0);
    const CriticalPoint cp = mountain_pass(prob, z, z, eu, ev, Quadrant::Q1, cfg);
    ASSERT_TRUE(cp.converged) << cp.note;
    EXPECT_GT(cp.energy, 0.0);
    EXPECT_GT(cp.energy, phi_energy(eu, ev, prob));
    EXPECT_LE(cp.residual, cfg.gradient_stop);
    EXPECT_EQ(cp.residual, weak_residual(cp.u, cp.v, prob));
    EXPECT_EQ(cp.quadrant, "Q1");
    EXPECT_EQ(cp.method, Method::mountain_pass);

    const auto [nu, nv] = mp_endpoint(prob, cfg, -1.0);
    const CriticalPoint neg = mountain_pass(prob, z, z, nu, nv, Quadrant::Q3, cfg);
    EXPECT_EQ(neg.u.values(), (-cp.u).values());
    EXPECT_EQ(neg.v.values(), (-cp.v).values());
    EXPECT_EQ(neg.quadrant, "Q3");
}

TEST(MountainPass, RejectsBadEndpoints) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const auto z = GridFunction::zero(prob.grid);
    const auto [h1, h2] = detail::endpoint_tents(prob, cfg);
    EXPECT_THROW(mountain_pass(prob, z, z, h1, h2, Quadrant::Q1, cfg), ConfigError);  // positive energy at t = 1
    EXPECT_THROW(mountain_pass(prob, z, z, z, z, Quadrant::Q1, cfg), ConfigError);
}

TEST(DivergenceScan, Examples) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const auto [h1, h2] = detail::endpoint_tents(prob, cfg);
    const ScanResult zero = divergence_scan(prob, h1, h2, {0.0});
    ASSERT_EQ(zero.rows.size(), 1u);
    EXPECT_EQ(zero.rows[0].second, 0.0);
    EXPECT_FALSE(zero.first_negative_t);

    const ScanResult r = divergence_scan(prob, h1, h2, cfg.scan_values());
    ASSERT_EQ(r.rows.size(), 21u);
    EXPECT_LT(r.rows.back().second, -100.0);
    ASSERT_TRUE(r.first_negative_t);
    // strictly decreasing from some index on
    std::size_t from = r.rows.size() - 1;
    while (from > 0 && r.rows[from].second < r.rows[from - 1].second) --from;
    EXPECT_LT(from, r.rows.size() - 3);
    EXPECT_LE(r.rows[from].first, *r.first_negative_t);

    ProblemSpec free = prob;
    free.lambda = 0.0;
    free.nonlinearity = NonlinearitySpec::from_expression("0");
    for (const auto& [t, e] : divergence_scan(free, h1, h2, cfg.scan_values()).rows) EXPECT_GE(e, 0.0) << t;

    EXPECT_THROW(divergence_scan(prob, h1, h2, {}), ConfigError);
}

// The four-solution search at the shipped lambda = 1e-3.
TEST(ConstantSignSolutions, DefaultSpecFindsFourPoints) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const SolutionInventory inv = find_constant_sign_solutions(prob, cfg);
    expect_inventory_invariants(inv, prob, cfg);
    ASSERT_EQ(inv.runs.size(), 4u);
    for (const auto& r : inv.runs) {
        EXPECT_TRUE(r.point.converged) << r.label << ": " << r.point.note;
        EXPECT_LT(r.point.energy, 0.0) << r.label;
        EXPECT_TRUE(r.admitted) << r.label << ": " << r.reason;
    }
    EXPECT_EQ(inv.distinct_count, 4u);
}

TEST(ConstantSignSolutions, LargeLambdaIsFlagged) {
    const SolutionInventory inv = find_constant_sign_solutions(with_lambda(1e3), SolverConfig{}, {Quadrant::Q1});
    bool flagged = false;
    for (const auto& n : inv.notes) flagged = flagged || n.find("lambda") != std::string::npos;
    EXPECT_TRUE(flagged);
}

TEST(ConstantSignSolutions, FourPointsAtUnitLambda) {
    const ProblemSpec prob = with_lambda(1.0);
    const SolverConfig cfg;
    const SolutionInventory inv = find_constant_sign_solutions(prob, cfg);
    expect_inventory_invariants(inv, prob, cfg);
    ASSERT_EQ(inv.distinct_count, 4u);
    for (const auto& p : inv.points) {
        EXPECT_LT(p.energy, 0.0);
        EXPECT_LE(p.residual, 1e-6);
        EXPECT_GT(p.u.sup_norm(), 1e-4);
        EXPECT_GT(p.v.sup_norm(), 1e-4);
    }
    EXPECT_EQ(inv.points[0].quadrant, "Q1");
    EXPECT_EQ(inv.points[2].quadrant, "Q3");
    for (std::size_t k = 0; k < prob.grid.size(); ++k) {
        EXPECT_NEAR(inv.points[2].u[k], -inv.points[0].u[k], 1e-12);
        EXPECT_NEAR(inv.points[2].v[k], -inv.points[0].v[k], 1e-12);
    }
}

TEST(SixSolutions, DefaultSpecFindsSixPoints) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const SolutionInventory inv = find_six_solutions(prob, cfg);
    expect_inventory_invariants(inv, prob, cfg);
    EXPECT_EQ(inv.distinct_count, 6u);
    std::size_t positive = 0;
    for (const auto& p : inv.points) positive += p.energy > 0.0;
    EXPECT_EQ(positive, 2u);
}

TEST(SixSolutions, MountainPassPointsClearTheRingLevel) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const SolutionInventory inv = find_six_solutions(prob, cfg, {});
    ASSERT_TRUE(inv.ring_level);
    EXPECT_GT(*inv.ring_level, 0.0);
    ASSERT_EQ(inv.runs.size(), 2u);
    for (const auto& r : inv.runs) {
        EXPECT_TRUE(r.admitted) << r.label << ": " << r.reason;
        EXPECT_GE(r.point.energy, *inv.ring_level);
        EXPECT_LE(r.point.residual, 1e-6);
    }
    EXPECT_EQ(inv.distinct_count, 2u);
    expect_inventory_invariants(inv, prob, cfg);
}

TEST(SixSolutions, SixPointsAtUnitLambda) {
    const ProblemSpec prob = with_lambda(1.0);
    const SolverConfig cfg;
    const SolutionInventory inv = find_six_solutions(prob, cfg);
    expect_inventory_invariants(inv, prob, cfg);
    EXPECT_EQ(inv.distinct_count, 6u);
    std::size_t positive = 0;
    for (const auto& p : inv.points) positive += p.energy > 0.0;
    EXPECT_EQ(positive, 2u);
}

TEST(SixSolutions, WithoutMountainPassMatchesConstantSignSearch) {
    const ProblemSpec prob = with_lambda(1.0);
    SolverConfig cfg;
    cfg.mountain_pass_quadrants.clear();
    const SolutionInventory six = find_six_solutions(prob, cfg);
    const SolutionInventory four = find_constant_sign_solutions(prob, cfg);
    ASSERT_EQ(six.points.size(), four.points.size());
    for (std::size_t i = 0; i < four.points.size(); ++i) {
        EXPECT_EQ(six.points[i].u.values(), four.points[i].u.values());
        EXPECT_EQ(six.points[i].v.values(), four.points[i].v.values());
        EXPECT_EQ(six.points[i].energy, four.points[i].energy);
    }
}

TEST(SymmetricPairs, ThreeSites) {
    const ProblemSpec prob = default_problem();
    const SolverConfig cfg;
    const SolutionInventory inv = symmetric_pairs(prob, 3, cfg);
    ASSERT_EQ(inv.runs.size(), 3u);
    std::string energies;
    for (const auto& r : inv.runs) {
        EXPECT_TRUE(r.point.converged) << r.label << ": " << r.point.note;
        EXPECT_TRUE(r.admitted) << r.label;
        ASSERT_TRUE(r.negation_residual);
        EXPECT_NEAR(*r.negation_residual, r.point.residual, 1e-10);
        energies += detail::fmt_g(r.point.energy) + " ";
    }
    ASSERT_EQ(inv.pair_energies.size(), 3u);
    bool nondecreasing = true;
    for (std::size_t i = 1; i < inv.pair_energies.size(); ++i)
        nondecreasing = nondecreasing && inv.pair_energies[i] >= inv.pair_energies[i - 1];
    RecordProperty("pair_energies", energies);
    RecordProperty("energy_sequence_nondecreasing", nondecreasing ? "yes" : "no");
    expect_inventory_invariants(inv, prob, cfg);
}

TEST(SymmetricPairs, TooManySites) {
    EXPECT_THROW(symmetric_pairs(default_problem(), 4, SolverConfig{}), GeometryError);
    SolverConfig crowded;
    crowded.pair_sites = {{0.3, 0.5}, {0.4, 0.5}};
    EXPECT_THROW(symmetric_pairs(default_problem(), 2, crowded), GeometryError);
}
