#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vexp/problem.hpp"

namespace vexp {

struct HypothesisVerdict {
    std::string name;
    bool passed = false;
    std::size_t samples = 0;
    double worst_margin = 0.0;             // smallest relative slack observed; negative means violated
    std::optional<double> decay_exponent;  // only for H2
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisVerdict> verdicts;

    bool all_passed() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.passed; });
    }

    const HypothesisVerdict& get(const std::string& name) const {
        for (const auto& v : verdicts)
            if (v.name == name) return v;
        throw ConfigError("no hypothesis named " + name);
    }
};

namespace detail {

struct HypothesisSampler {
    const ProblemSpec& prob;
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> unif{0.0, 1.0};

    std::size_t node() {
        const auto inner = prob.grid.interior_nodes();
        return inner[std::uniform_int_distribution<std::size_t>(0, inner.size() - 1)(rng)];
    }
    double sign() { return unif(rng) < 0.5 ? -1.0 : 1.0; }
    double log_uniform(double lo, double hi) { return lo * std::pow(hi / lo, unif(rng)); }
    FValue F(const Point& x, double u, double v) const {
        return evaluate_F(prob.nonlinearity, prob.p, prob.q, x, u, v);
    }
};

inline double rel_margin(double big, double small) {
    // relative amount by which big exceeds small
    const double scale = std::max({std::fabs(big), std::fabs(small), std::numeric_limits<double>::min()});
    return (big - small) / scale;
}

} // namespace detail

inline HypothesisVerdict check_alpha_beta(const ProblemSpec& prob) {
    HypothesisVerdict v;
    v.name = "H_alpha_beta";
    double worst = -INFINITY;
    std::size_t at = 0;
    for (std::size_t k = 0; k < prob.grid.size(); ++k) {
        const double s = prob.alpha[k] / prob.p[k] + prob.beta[k] / prob.q[k];
        if (s > worst) { worst = s; at = k; }
    }
    v.samples = prob.grid.size();
    v.worst_margin = 1.0 - worst;
    v.passed = worst < 1.0;
    v.detail = "max alpha/p + beta/q = " + std::to_string(worst) + " at node " + std::to_string(at);
    return v;
}

inline HypothesisVerdict check_growth(const ProblemSpec& prob, std::size_t budget, std::uint64_t seed) {
    const auto& c = prob.constants;
    if (!c.C || !c.gamma || !c.delta)
        throw ConfigError("H0 check needs constants C, gamma, delta (hypothesis_constants.C/gamma/delta)");
    HypothesisVerdict v;
    v.name = "H0";
    detail::HypothesisSampler s{prob, std::mt19937_64(seed)};
    const int N = prob.grid.dimension();
    // exponent window p < gamma < p*, with p* infinite once p >= N
    for (std::size_t k = 0; k < prob.grid.size(); ++k) {
        const Point x = prob.grid.coordinates(k);
        const double pk = prob.p[k], qk = prob.q[k];
        const double gk = (*c.gamma)(x[0], x[1]), dk = (*c.delta)(x[0], x[1]);
        const double ps = pk < N ? N * pk / (N - pk) : INFINITY;
        const double qs = qk < N ? N * qk / (N - qk) : INFINITY;
        if (!(pk < gk && gk < ps && qk < dk && dk < qs)) {
            v.detail = "growth exponents outside (p, p*) / (q, q*) at node " + std::to_string(k);
            v.worst_margin = -1.0;
            return v;
        }
    }
    double worst = INFINITY;
    for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t k = s.node();
        const Point x = prob.grid.coordinates(k);
        const double u = s.sign() * s.log_uniform(1e-3, 1e4), w = s.sign() * s.log_uniform(1e-3, 1e4);
        const FValue f = s.F(x, u, w);
        const double lhs = std::fabs(f.F_u * u) + std::fabs(f.F_v * w);
        const double rhs = *c.C * (1.0 + std::pow(std::fabs(u), (*c.gamma)(x[0], x[1])) +
                                   std::pow(std::fabs(w), (*c.delta)(x[0], x[1])));
        worst = std::min(worst, detail::rel_margin(rhs, lhs));
    }
    v.samples = budget;
    v.worst_margin = worst;
    v.passed = worst >= -prob.tolerances.inequality_slack;
    v.detail = "|F_u u| + |F_v v| <= C (1 + |u|^gamma + |v|^delta) sampled for |u|, |v| in [1e-3, 1e4]";
    return v;
}

inline HypothesisVerdict check_far_field(const ProblemSpec& prob, std::size_t budget, std::uint64_t seed) {
    const auto& c = prob.constants;
    if (!c.M || !c.C1 || !c.C2)
        throw ConfigError("H1 check needs constants M, C1, C2 (hypothesis_constants.M/C1/C2)");
    const auto& nl = prob.nonlinearity;
    HypothesisVerdict v;
    v.name = "H1";
    if (nl.kind != NonlinearityKind::paper_example) {
        v.detail = "H1 is stated with the log exponents a, b; only the paper_example kind carries them";
        v.worst_margin = -1.0;
        return v;
    }
    detail::HypothesisSampler s{prob, std::mt19937_64(seed)};
    double worst = INFINITY;
    for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t k = s.node();
        const Point x = prob.grid.coordinates(k);
        const double total = s.log_uniform(*c.M, 1e3 * *c.M), r = s.unif(s.rng);
        const double u = s.sign() * total * r, w = s.sign() * total * (1.0 - r);
        const double au = std::fabs(u), aw = std::fabs(w);
        const double pk = prob.p[k], qk = prob.q[k], ak = (*nl.a)[k], bk = (*nl.b)[k];
        const double leu = std::log(std::numbers::e + au), lew = std::log(std::numbers::e + aw);
        const FValue f = s.F(x, u, w);
        const double left = *c.C1 * (std::pow(au, pk) * std::pow(leu, ak - 1.0) + std::pow(aw, qk) * std::pow(lew, bk - 1.0));
        const double mid = *c.C2 * (f.F_u * u / leu + f.F_v * w / lew);
        const double right = f.F_u * u / pk + f.F_v * w / qk - f.F;
        worst = std::min({worst, detail::rel_margin(mid, left), detail::rel_margin(right, mid)});
    }
    v.samples = budget;
    v.worst_margin = worst;
    v.passed = worst >= -prob.tolerances.inequality_slack;
    v.detail = "C1-bound <= C2-bound <= F_u u/p + F_v v/q - F sampled on |u|+|v| in [M, 1e3 M]";
    return v;
}

/**
 * Little-o at the origin: along (s u0, s v0), s = 2^-j, the ratio
 * F / (|u|^p + |v|^q) must decrease to zero. A finite sequence cannot prove
 * a limit, so the verdict is "decreasing with positive fitted exponent" and
 * the smallest fitted exponent is reported.
 */
inline HypothesisVerdict check_small_scale(const ProblemSpec& prob, std::size_t budget, std::uint64_t seed) {
    HypothesisVerdict v;
    v.name = "H2";
    detail::HypothesisSampler s{prob, std::mt19937_64(seed)};
    const std::size_t n = std::min<std::size_t>(budget, 64);
    constexpr int levels = 40, fit = 10;
    double min_exp = INFINITY, worst = INFINITY;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = s.node();
        const Point x = prob.grid.coordinates(k);
        const double u0 = 2.0 * s.unif(s.rng) - 1.0, w0 = 2.0 * s.unif(s.rng) - 1.0;
        std::vector<double> ratio(levels + 1);
        for (int j = 0; j <= levels; ++j) {
            const double sc = std::ldexp(1.0, -j);
            const double u = sc * u0, w = sc * w0;
            const double den = std::pow(std::fabs(u), prob.p[k]) + std::pow(std::fabs(w), prob.q[k]);
            ratio[j] = den > 0.0 ? s.F(x, u, w).F / den : 0.0;
        }
        if (std::fabs(ratio[levels]) >= std::fabs(ratio[0]) && ratio[0] != 0.0) ok = false;
        worst = std::min(worst, 1.0 - std::fabs(ratio[levels]) / std::max(std::fabs(ratio[0]), 1e-300));
        if (ratio[levels] == 0.0) continue;  // identically zero along this ray
        // least-squares slope of log|ratio| against log s over the last levels
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int j = levels - fit + 1; j <= levels; ++j) {
            const double lx = -j * std::numbers::ln2, ly = std::log(std::fabs(ratio[j]));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        const double slope = (fit * sxy - sx * sy) / (fit * sxx - sx * sx);
        min_exp = std::min(min_exp, slope);
    }
    v.samples = n;
    v.worst_margin = worst;
    if (std::isfinite(min_exp)) v.decay_exponent = min_exp;
    v.passed = ok && (!v.decay_exponent || *v.decay_exponent > 0.0);
    v.detail = "ratio F/(|u|^p+|v|^q) along s = 2^-j, j <= 40; observed decay exponent reported, the limit itself is not decidable from samples";
    return v;
}

inline HypothesisVerdict check_partials_vanish(const ProblemSpec& prob, std::size_t budget, std::uint64_t seed) {
    HypothesisVerdict v;
    v.name = "H3";
    detail::HypothesisSampler s{prob, std::mt19937_64(seed)};
    double worst = 0.0;
    for (std::size_t i = 0; i < budget; ++i) {
        const Point x = prob.grid.coordinates(s.node());
        const double u = s.sign() * s.log_uniform(1e-3, 1e3), w = s.sign() * s.log_uniform(1e-3, 1e3);
        const FValue a = s.F(x, 0.0, w), b = s.F(x, u, 0.0);
        worst = std::max({worst, std::fabs(a.F_u) / (1.0 + std::fabs(a.F)), std::fabs(b.F_v) / (1.0 + std::fabs(b.F))});
    }
    v.samples = budget;
    v.worst_margin = prob.tolerances.identity - worst;
    v.passed = worst <= prob.tolerances.identity;
    v.detail = "max |F_u(x,0,v)|, |F_v(x,u,0)| relative to 1+|F|: " + std::to_string(worst);
    return v;
}

inline HypothesisVerdict check_evenness(const ProblemSpec& prob, std::size_t budget, std::uint64_t seed) {
    HypothesisVerdict v;
    v.name = "H4";
    detail::HypothesisSampler s{prob, std::mt19937_64(seed)};
    double worst = 0.0;
    for (std::size_t i = 0; i < budget; ++i) {
        const Point x = prob.grid.coordinates(s.node());
        const double u = s.sign() * s.log_uniform(1e-3, 1e3), w = s.sign() * s.log_uniform(1e-3, 1e3);
        const double f = s.F(x, u, w).F, g = s.F(x, -u, -w).F;
        worst = std::max(worst, std::fabs(f - g) / std::max(1.0, std::fabs(f)));
    }
    v.samples = budget;
    v.worst_margin = prob.tolerances.identity - worst;
    v.passed = worst <= prob.tolerances.identity;
    v.detail = "max |F(x,-u,-v) - F(x,u,v)| relative: " + std::to_string(worst);
    return v;
}

/// Directional monotonicity of p and q along some coordinate axis (non-strict).
inline HypothesisVerdict check_exponent_monotonicity(const ProblemSpec& prob) {
    HypothesisVerdict v;
    v.name = "H_pq";
    std::string axes_p, axes_q;
    for (int a = 0; a < prob.grid.dimension(); ++a) {
        if (prob.p.monotone_along(a)) axes_p += (axes_p.empty() ? "" : ",") + std::to_string(a);
        if (prob.q.monotone_along(a)) axes_q += (axes_q.empty() ? "" : ",") + std::to_string(a);
    }
    v.samples = prob.grid.size() * 4;
    v.passed = !axes_p.empty() && !axes_q.empty();
    v.worst_margin = v.passed ? 0.0 : -1.0;
    v.detail = "p monotone along axes {" + axes_p + "}, q monotone along axes {" + axes_q + "}";
    return v;
}

/// All seven checks in a fixed order.
inline HypothesisReport check_hypotheses(const ProblemSpec& prob, std::size_t sample_budget, std::uint64_t seed = 0) {
    HypothesisReport r;
    r.verdicts.push_back(check_alpha_beta(prob));
    r.verdicts.push_back(check_growth(prob, sample_budget, seed + 1));
    r.verdicts.push_back(check_far_field(prob, sample_budget, seed + 2));
    r.verdicts.push_back(check_small_scale(prob, sample_budget, seed + 3));
    r.verdicts.push_back(check_partials_vanish(prob, sample_budget, seed + 4));
    r.verdicts.push_back(check_evenness(prob, sample_budget, seed + 5));
    r.verdicts.push_back(check_exponent_monotonicity(prob));
    return r;
}

} // namespace vexp
