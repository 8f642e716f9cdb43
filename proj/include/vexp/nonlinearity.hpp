#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vexp/exponent_field.hpp"
#include "vexp/expression.hpp"

namespace vexp {

enum class NonlinearityKind { paper_example, separable_power, linear_source, custom };

inline const char* to_string(NonlinearityKind k) {
    switch (k) {
        case NonlinearityKind::paper_example: return "paper_example";
        case NonlinearityKind::separable_power: return "separable_power";
        case NonlinearityKind::linear_source: return "linear_source";
        case NonlinearityKind::custom: return "custom";
    }
    return "?";
}

/**
 * The potential F(x, u, v) of the system.
 *
 *  paper_example    |u|^p ln(1+|u|)^a + |v|^q ln(1+|v|)^b + |u|^t1 |v|^t2 ln(1+|u|) ln(1+|v|)
 *  separable_power  cu |u|^ru + cv |v|^rv
 *  linear_source    g(x) u + h(x) v
 *  custom           any expression in x, y, u, v; partials by symbolic differentiation
 */
struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::paper_example;

    std::optional<ExponentField> a, b, theta1, theta2;

    double coeff_u = 0.0, coeff_v = 0.0;
    double power_u = 2.0, power_v = 2.0;

    Expression source_u, source_v;

    Expression custom, custom_du, custom_dv;
    std::string custom_text;

    static NonlinearitySpec paper_example(ExponentField a, ExponentField b, ExponentField t1, ExponentField t2) {
        NonlinearitySpec s;
        s.kind = NonlinearityKind::paper_example;
        s.a = std::move(a);
        s.b = std::move(b);
        s.theta1 = std::move(t1);
        s.theta2 = std::move(t2);
        return s;
    }

    static NonlinearitySpec separable_power(double cu, double ru, double cv, double rv) {
        NonlinearitySpec s;
        s.kind = NonlinearityKind::separable_power;
        s.coeff_u = cu;
        s.power_u = ru;
        s.coeff_v = cv;
        s.power_v = rv;
        return s;
    }

    static NonlinearitySpec linear_source(Expression g, Expression h) {
        NonlinearitySpec s;
        s.kind = NonlinearityKind::linear_source;
        s.source_u = std::move(g);
        s.source_v = std::move(h);
        return s;
    }

    static NonlinearitySpec from_expression(const std::string& text) {
        NonlinearitySpec s;
        s.kind = NonlinearityKind::custom;
        s.custom_text = text;
        s.custom = Expression::parse(text);
        s.custom_du = s.custom.derivative(Variable::u);
        s.custom_dv = s.custom.derivative(Variable::v);
        return s;
    }
};

struct FValue {
    double F = 0.0;
    double F_u = 0.0;
    double F_v = 0.0;
};

/// Pointwise exponents entering the example potential.
struct ExampleExponents {
    double p, q, a, b, theta1, theta2;
};

/// Closed-form value and partials of the example potential.
inline FValue example_F(const ExampleExponents& e, double u, double v) {
    const double au = std::fabs(u), av = std::fabs(v);
    const double su = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    const double sv = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    const double lu = std::log1p(au), lv = std::log1p(av);

    const double pu = std::pow(au, e.p), qv = std::pow(av, e.q);
    const double lua = std::pow(lu, e.a), lvb = std::pow(lv, e.b);
    const double t1 = std::pow(au, e.theta1), t2 = std::pow(av, e.theta2);

    FValue r;
    r.F = pu * lua + qv * lvb + t1 * t2 * lu * lv;
    if (au > 0.0) {
        const double d1 = e.p * std::pow(au, e.p - 1.0) * lua + pu * e.a * std::pow(lu, e.a - 1.0) / (1.0 + au);
        const double d3 = t2 * lv * (e.theta1 * std::pow(au, e.theta1 - 1.0) * lu + t1 / (1.0 + au));
        r.F_u = su * (d1 + d3);
    }
    if (av > 0.0) {
        const double d2 = e.q * std::pow(av, e.q - 1.0) * lvb + qv * e.b * std::pow(lv, e.b - 1.0) / (1.0 + av);
        const double d3 = t1 * lu * (e.theta2 * std::pow(av, e.theta2 - 1.0) * lv + t2 / (1.0 + av));
        r.F_v = sv * (d2 + d3);
    }
    return r;
}

/// Example potential at an arbitrary point, exponents taken from their formulas.
inline FValue example_F(const Point& x, double u, double v, const NonlinearitySpec& spec, const ExponentField& p,
                        const ExponentField& q) {
    if (spec.kind != NonlinearityKind::paper_example)
        throw ConfigError("example_F requires the paper_example nonlinearity");
    return example_F(ExampleExponents{p.at(x), q.at(x), spec.a->at(x), spec.b->at(x), spec.theta1->at(x),
                                      spec.theta2->at(x)},
                     u, v);
}

inline FValue separable_F(const NonlinearitySpec& s, double u, double v) {
    const double au = std::fabs(u), av = std::fabs(v);
    const double su = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    const double sv = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return {s.coeff_u * std::pow(au, s.power_u) + s.coeff_v * std::pow(av, s.power_v),
            su * s.coeff_u * s.power_u * std::pow(au, s.power_u - 1.0),
            sv * s.coeff_v * s.power_v * std::pow(av, s.power_v - 1.0)};
}

/**
 * Nonlinearity bound to the nodes of a grid: per-node exponents and source
 * values are cached once so the energy loop does no formula evaluation for
 * the built-in kinds.
 */
class NodalNonlinearity {
public:
    NodalNonlinearity(const NonlinearitySpec& spec, const ExponentField& p, const ExponentField& q)
        : spec_(&spec), grid_(p.grid()) {
        const std::size_t n = grid_.size();
        if (spec.kind == NonlinearityKind::paper_example) {
            ex_.resize(n);
            for (std::size_t k = 0; k < n; ++k)
                ex_[k] = {p[k], q[k], (*spec.a)[k], (*spec.b)[k], (*spec.theta1)[k], (*spec.theta2)[k]};
        } else if (spec.kind == NonlinearityKind::linear_source) {
            g_.resize(n);
            h_.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                const Point x = grid_.coordinates(k);
                g_[k] = spec.source_u(x[0], x[1]);
                h_[k] = spec.source_v(x[0], x[1]);
            }
        }
    }

    FValue at(std::size_t k, double u, double v) const {
        switch (spec_->kind) {
            case NonlinearityKind::paper_example: return example_F(ex_[k], u, v);
            case NonlinearityKind::separable_power: return separable_F(*spec_, u, v);
            case NonlinearityKind::linear_source: return {g_[k] * u + h_[k] * v, g_[k], h_[k]};
            case NonlinearityKind::custom: {
                const Point x = grid_.coordinates(k);
                const Bindings b{x[0], x[1], u, v};
                return {spec_->custom.evaluate(b), spec_->custom_du.evaluate(b), spec_->custom_dv.evaluate(b)};
            }
        }
        return {};
    }

private:
    const NonlinearitySpec* spec_;
    Grid grid_;
    std::vector<ExampleExponents> ex_;
    std::vector<double> g_, h_;
};

/// Value and partials of F at an arbitrary point; exponents through their formulas.
inline FValue evaluate_F(const NonlinearitySpec& spec, const ExponentField& p, const ExponentField& q,
                         const Point& x, double u, double v) {
    switch (spec.kind) {
        case NonlinearityKind::paper_example: return example_F(x, u, v, spec, p, q);
        case NonlinearityKind::separable_power: return separable_F(spec, u, v);
        case NonlinearityKind::linear_source: {
            const double g = spec.source_u(x[0], x[1]), h = spec.source_v(x[0], x[1]);
            return {g * u + h * v, g, h};
        }
        case NonlinearityKind::custom: {
            const Bindings b{x[0], x[1], u, v};
            return {spec.custom.evaluate(b), spec.custom_du.evaluate(b), spec.custom_dv.evaluate(b)};
        }
    }
    return {};
}

} // namespace vexp
