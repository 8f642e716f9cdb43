#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "vexp/exponent_spaces.hpp"

using namespace vexp;

namespace {

// Random smooth exponent with values in [lo, hi].
ExponentField random_exponent(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double mid = 0.5 * (lo + hi), amp = 0.5 * (hi - lo) * unif(rng);
    const double k = 1 + 3 * unif(rng), phase = 6.28 * unif(rng);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g + %.17g*sin(%.17g*x + %.17g)", mid, amp, k, phase);
    return ExponentField(g, Expression::parse(buf));
}

std::vector<double> constant_span(const Grid& g, double c) { return std::vector<double>(g.size(), c); }

} // namespace

TEST(ExponentField, Validation) {
    const Grid g = make_grid_1d(11);
    EXPECT_THROW(ExponentField(g, "1"), DomainError);
    EXPECT_THROW(ExponentField(g, "0.5 + x"), DomainError);
    EXPECT_THROW(ExponentField(g, "2 + u"), ConfigError);
    EXPECT_THROW(ExponentField(g, "1/(x - x)"), DataError);
    const ExponentField p(g, "3 + x/2");
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(p.at(g.coordinates(k)), p[k], 1e-12);
}

TEST(ExponentField, Extrema) {
    const Grid g = make_grid_1d(101);
    EXPECT_EQ(field_extrema(ExponentField::constant(g, 2.0)), std::make_pair(2.0, 2.0));
    const auto [lo, hi] = field_extrema(ExponentField(g, "2 + x"));
    EXPECT_DOUBLE_EQ(lo, 2.0);
    EXPECT_DOUBLE_EQ(hi, 3.0);
    const Grid fine = make_grid_1d(4001);
    const auto [slo, shi] = field_extrema(ExponentField(fine, "3 + sin(2*pi*x)/2"));
    EXPECT_NEAR(slo, 2.5, 1e-6);
    EXPECT_NEAR(shi, 3.5, 1e-6);
}

TEST(ConjugateExponent, ExamplesAndInvolution) {
    const Grid g = make_grid_1d(21);
    const auto c2 = conjugate_exponent(ExponentField::constant(g, 2.0));
    EXPECT_DOUBLE_EQ(c2.min(), 2.0);
    EXPECT_DOUBLE_EQ(c2.max(), 2.0);
    EXPECT_NEAR(conjugate_exponent(ExponentField::constant(g, 3.0)).min(), 1.5, 1e-15);
    const ExponentField p(g, "2 + x");
    const auto pc = conjugate_exponent(p);
    EXPECT_NEAR(pc[20], 1.5, 1e-15);
    const auto back = conjugate_exponent(pc);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(back[k], p[k], 1e-12);
}

TEST(Modular, Examples) {
    const Grid g = make_grid_1d(2001);
    EXPECT_EQ(modular(GridFunction::zero(g), ExponentField(g, "2 + x")), 0.0);
    EXPECT_NEAR(modular(constant_span(g, 1.0), ExponentField::constant(g, 2.0), g), 1.0, 1e-12);
    // int_0^1 2^{2+x} dx = 4 / ln 2; trapezoid error is O(h^2)
    EXPECT_NEAR(modular(constant_span(g, 2.0), ExponentField(g, "2 + x"), g), 4.0 / std::log(2.0), 1e-6);
    EXPECT_THROW(modular(constant_span(make_grid_1d(11), 1.0), ExponentField(g, "2"), g), ShapeError);
}

TEST(LuxemburgNorm, Examples) {
    const Grid g = make_grid_1d(4097);
    EXPECT_NEAR(luxemburg_norm(constant_span(g, 3.0), ExponentField::constant(g, 2.0), g), 3.0, 1e-12);
    EXPECT_NEAR(luxemburg_norm(constant_span(g, 1.0), ExponentField(g, "2 + x"), g), 1.0, 1e-12);
    std::vector<double> x(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) x[k] = g.coordinates(k)[0];
    EXPECT_NEAR(luxemburg_norm(x, ExponentField::constant(g, 4.0), g), std::pow(5.0, -0.25), 1e-7);
    EXPECT_EQ(luxemburg_norm(GridFunction::zero(g), ExponentField::constant(g, 4.0)), 0.0);
    x[3] = NAN;
    EXPECT_THROW(luxemburg_norm(x, ExponentField::constant(g, 4.0), g), DataError);
}

// c x^a (1-x)^b has L^p norm c B(ap+1, bp+1)^{1/p}; the tensor product squares the Beta factor.
TEST(LuxemburgNorm, ConstantExponentMatchesClosedFormOnPolynomials) {
    struct Fixture { int a, b; double p, c; };
    const Fixture one_d[] = {{1, 1, 2.0, 1.0}, {1, 1, 3.0, 1.0}, {2, 1, 2.0, 1.0}, {1, 2, 4.0, 1.0},
                             {2, 2, 2.5, 3.0}, {3, 1, 6.0, 1.0}, {1, 3, 3.0, 10.0}, {2, 3, 2.0, 0.01}};
    const Grid g = make_grid_1d(2049);
    for (const auto& f : one_d) {
        const auto u = GridFunction::sample(g, [&](const Point& x) {
            return f.c * std::pow(x[0], f.a) * std::pow(1 - x[0], f.b);
        });
        const double exact = f.c * std::pow(std::beta(f.a * f.p + 1, f.b * f.p + 1), 1.0 / f.p);
        EXPECT_NEAR(luxemburg_norm(u, ExponentField::constant(g, f.p)) / exact, 1.0, 1e-8)
            << "a=" << f.a << " b=" << f.b << " p=" << f.p;
    }
    const Grid g2 = make_grid_2d(257, 257);
    for (double p : {2.0, 3.0}) {
        const auto u = GridFunction::sample(g2, [](const Point& x) { return x[0] * (1 - x[0]) * x[1] * (1 - x[1]); });
        const double exact = std::pow(std::beta(p + 1, p + 1), 2.0 / p);
        EXPECT_NEAR(luxemburg_norm(u, ExponentField::constant(g2, p)) / exact, 1.0, 1e-8) << "2D p=" << p;
    }
}

TEST(LuxemburgNorm, Homogeneity) {
    std::mt19937_64 rng(1);
    const Grid g = make_grid_1d(65);
    std::uniform_real_distribution<double> cdist(-100, 100);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_exponent(g, rng, 1.5, 4.0);
        const auto u = testing_support::random_field(g, rng);
        const double c = cdist(rng);
        const double n = luxemburg_norm(u, p);
        EXPECT_NEAR(luxemburg_norm(u * c, p), std::fabs(c) * n, 1e-8 * std::fabs(c) * n);
    }
}

TEST(LuxemburgNorm, UnitModularAtTheNorm) {
    std::mt19937_64 rng(2);
    const Grid g = make_grid_1d(65);
    for (int i = 0; i < 50; ++i) {
        const auto p = random_exponent(g, rng, 1.5, 4.0);
        const auto u = testing_support::random_field(g, rng, std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(rng)));
        const double n = luxemburg_norm(u, p);
        EXPECT_NEAR(modular(u * (1.0 / n), p), 1.0, 1e-10);
        const auto rep = norm_modular_relation_check(u * (1.0 / n), p);
        EXPECT_NEAR(rep.modular_value, 1.0, 1e-8);
    }
}

TEST(Modular, StrictlyDecreasingInScale) {
    std::mt19937_64 rng(4);
    const Grid g = make_grid_1d(65);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_exponent(g, rng, 1.2, 5.0);
        const auto u = testing_support::random_field(g, rng);
        double prev = INFINITY;
        for (double mu = 0.01; mu < 100; mu *= 1.3) {
            const double m = modular(u * (1.0 / mu), p);
            EXPECT_LT(m, prev);
            prev = m;
        }
    }
}

// Norm to zero iff modular to zero, along geometric scalings (also applied to u_k - u).
TEST(Modular, NormAndModularVanishTogether) {
    std::mt19937_64 rng(6);
    const Grid g = make_grid_1d(65);
    const auto p = random_exponent(g, rng, 1.5, 4.0);
    const auto u = testing_support::random_field(g, rng);
    const auto w = testing_support::random_field(g, rng);
    double prev_norm = INFINITY, prev_mod = INFINITY;
    for (int k = 0; k < 30; ++k) {
        const double s = std::pow(0.5, k);
        const auto uk = w + u * s;  // uk - w -> 0
        const auto d = uk - w;
        const double n = luxemburg_norm(d, p), m = modular(d, p);
        EXPECT_LT(n, prev_norm);
        EXPECT_LT(m, prev_mod);
        prev_norm = n;
        prev_mod = m;
    }
    EXPECT_LT(prev_norm, 1e-7);
    EXPECT_LT(prev_mod, 1e-10);
}

TEST(NormModularRelation, Examples) {
    const Grid g = make_grid_1d(101);
    const auto rep = norm_modular_relation_check(constant_span(g, 3.0), ExponentField::constant(g, 2.0), g);
    EXPECT_NEAR(rep.norm_value, 3.0, 1e-12);
    EXPECT_NEAR(rep.modular_value, 9.0, 1e-12);
    EXPECT_NEAR(rep.relation_band.first, 9.0, 1e-10);
    EXPECT_NEAR(rep.relation_band.second, 9.0, 1e-10);
    EXPECT_TRUE(rep.band_holds);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_exponent(g, rng, 1.5, 3.0);
        auto u = testing_support::random_field(g, rng);
        u = u * (2.0 / luxemburg_norm(u, p));
        const auto r = norm_modular_relation_check(u, p);
        EXPECT_GE(r.modular_value, std::pow(2.0, 1.5) * (1 - 1e-9));
        EXPECT_LE(r.modular_value, 8.0 * (1 + 1e-9));
        EXPECT_TRUE(r.band_holds);
    }
}

TEST(Holder, Examples) {
    const Grid g = make_grid_1d(101);
    const auto p2 = ExponentField::constant(g, 2.0);
    std::mt19937_64 rng(1);
    const auto zero = holder_check(GridFunction::zero(g), testing_support::random_field(g, rng), p2);
    EXPECT_EQ(zero.lhs, 0.0);
    EXPECT_TRUE(zero.holds);

    // u = v = 1 on (0,1), p = 2: both norms are 1 and the factor is 1/2 + 1/2.
    const auto ones = constant_span(g, 1.0);
    const auto h = holder_check(ones, ones, p2, g);
    EXPECT_NEAR(h.lhs, 1.0, 1e-14);
    EXPECT_NEAR(h.rhs, 1.0, 1e-10);
    EXPECT_TRUE(h.holds);
}
