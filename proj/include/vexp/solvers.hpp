#pragma once

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vexp/discretization.hpp"
#include "vexp/energy.hpp"
#include "vexp/exponent_spaces.hpp"
#include "vexp/hypotheses.hpp"
#include "vexp/metric.hpp"

namespace vexp {

struct StepRule {
    double initial_step = 1.0;
    double shrink = 0.5;
    double armijo = 1e-4;
};

struct SolverConfig {
    std::size_t max_iterations = 2000;
    double gradient_stop = 1e-8;
    StepRule step_rule{};
    std::size_t path_points = 21;
    std::size_t path_relocations = 400;
    double deflation_distance = 1e-4;
    std::uint64_t seed = 0;

    double lambda_threshold = 1.0;         // "lambda small enough" for the four-solution search
    std::size_t hypothesis_samples = 200;  // sample budget of the precondition checks

    double bump_radius = 0.25;              // start bumps for the descent searches
    double start_shrink = 0.1;              // geometric factor on t until the start has negative energy

    std::vector<Point> tent_centers{{0.25, 0.5}, {0.7, 0.5}};  // mountain-pass endpoint tents (u, v)
    double tent_radius = 0.2;
    std::vector<double> scan_t;             // t grid for the endpoint scan; empty means 2^0..2^20
    std::vector<Quadrant> mountain_pass_quadrants{Quadrant::Q1, Quadrant::Q3};

    std::vector<Point> pair_sites{{0.2, 0.5}, {0.5, 0.5}, {0.8, 0.5}};
    double pair_radius = 0.08;

    double ring_radius = 0.1;               // sphere on which the mountain-pass level is sampled
    std::size_t ring_samples = 200;

    void validate() const {
        if (!(step_rule.shrink > 0.0 && step_rule.shrink < 1.0))
            throw ConfigError("step_rule.shrink must lie in (0, 1)");
        if (!(step_rule.armijo > 0.0 && step_rule.armijo <= 0.5))
            throw ConfigError("step_rule.armijo must lie in (0, 0.5]");
        if (!(step_rule.initial_step > 0.0)) throw ConfigError("step_rule.initial_step must be positive");
        if (path_points < 5) throw ConfigError("path_points must be at least 5");
        if (!(gradient_stop >= 0.0)) throw ConfigError("gradient_stop must be nonnegative");
        if (!(deflation_distance >= 0.0)) throw ConfigError("deflation_distance must be nonnegative");
        if (tent_centers.size() != 2) throw ConfigError("tent_centers needs exactly two points");
        if (!(start_shrink > 0.0 && start_shrink < 1.0)) throw ConfigError("start_shrink must lie in (0, 1)");
    }

    std::vector<double> scan_values() const {
        if (!scan_t.empty()) return scan_t;
        std::vector<double> t;
        for (int k = 0; k <= 20; ++k) t.push_back(std::ldexp(1.0, k));
        return t;
    }
};

enum class Method { descent, mountain_pass };

inline const char* to_string(Method m) { return m == Method::descent ? "descent" : "mountain_pass"; }

struct CriticalPoint {
    GridFunction u, v;
    double energy = 0.0;
    double residual = 0.0;
    std::string quadrant = "mixed";  // Q1..Q4 or mixed
    Method method = Method::descent;
    std::size_t iterations = 0;
    bool converged = false;
    std::string note;
};

/// Sign-pattern tag of a pair, first matching cone in Q1..Q4 order.
inline std::string classify_quadrant(const GridFunction& u, const GridFunction& v, double tol = 1e-12) {
    auto sign_ok = [&](const GridFunction& f, double s) {
        for (double x : f.values())
            if (s * x < -tol) return false;
        return true;
    };
    for (Quadrant q : {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4}) {
        const auto [su, sv] = quadrant_signs(q);
        if (sign_ok(u, su) && sign_ok(v, sv)) return to_string(q);
    }
    return "mixed";
}

inline double sup_distance(const CriticalPoint& a, const CriticalPoint& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k)
        d = std::max({d, std::fabs(a.u[k] - b.u[k]), std::fabs(a.v[k] - b.v[k])});
    return d;
}

/// Nodewise clamp onto the quadrant's sign cone. Idempotent.
inline void project_quadrant(std::vector<double>& u, std::vector<double>& v, Quadrant q) {
    const auto [su, sv] = quadrant_signs(q);
    for (double& x : u)
        if (su * x < 0.0) x = 0.0;
    for (double& x : v)
        if (sv * x < 0.0) x = 0.0;
}

inline std::pair<GridFunction, GridFunction> project_quadrant(const GridFunction& u, const GridFunction& v,
                                                              Quadrant q) {
    std::vector<double> a = u.values(), b = v.values();
    project_quadrant(a, b, q);
    return {GridFunction(u.grid(), std::move(a)), GridFunction(v.grid(), std::move(b))};
}

namespace detail {

inline std::string fmt_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

inline bool in_cone(const std::vector<double>& u, const std::vector<double>& v, Quadrant q) {
    const auto [su, sv] = quadrant_signs(q);
    for (double x : u)
        if (su * x < 0.0) return false;
    for (double x : v)
        if (sv * x < 0.0) return false;
    return true;
}

inline CriticalPoint finish(const ProblemSpec& prob, std::vector<double> u, std::vector<double> v, Method m,
                            std::size_t iterations, bool converged, std::string note) {
    CriticalPoint cp{GridFunction(prob.grid, std::move(u)), GridFunction(prob.grid, std::move(v)), 0.0, 0.0, "mixed",
                     m, iterations, converged, std::move(note)};
    cp.energy = phi_energy(cp.u, cp.v, prob);
    cp.residual = weak_residual(cp.u, cp.v, prob);
    cp.quadrant = classify_quadrant(cp.u, cp.v);
    return cp;
}

/**
 * One metric-preconditioned projected step from w with energy e and
 * gradient (gu, gv). Returns false if no step is acceptable.
 *
 * Acceptance is Armijo on the realized displacement. When the predicted
 * decrease is below what double precision can resolve in e, a step is
 * accepted only if the energy does not increase and the residual drops,
 * which keeps the energy sequence nonincreasing near convergence.
 */
struct StepState {
    std::vector<double> u, v, gu, gv;
    double energy = 0.0;
    double residual = 0.0;
    double step = 1.0;
};

inline bool projected_step(const EnergyFunctional& F, const PrincipalMetric& metric, StepState& s,
                           const StepRule& rule, double max_displacement = INFINITY) {
    std::vector<double> du, dv;
    metric.solve(s.gu, s.gv, du, dv);
    const std::size_t n = s.u.size();
    std::vector<double> tu(n), tv(n), tgu, tgv;
    const auto quadrant = F.quadrant();
    double t = std::min(rule.initial_step, 2.0 * s.step);
    if (std::isfinite(max_displacement)) {
        const auto& w = F.weights();
        double len = 0.0;
        for (std::size_t k = 0; k < n; ++k) len += w[k] * (du[k] * du[k] + dv[k] * dv[k]);
        len = std::sqrt(len);
        if (len > 0.0) t = std::min(t, max_displacement / len);
    }
    for (int bt = 0; bt < 60; ++bt, t *= rule.shrink) {
        for (std::size_t k = 0; k < n; ++k) {
            tu[k] = s.u[k] - t * du[k];
            tv[k] = s.v[k] - t * dv[k];
        }
        if (quadrant) project_quadrant(tu, tv, *quadrant);
        double pred = 0.0;
        for (std::size_t k = 0; k < n; ++k) pred += s.gu[k] * (tu[k] - s.u[k]) + s.gv[k] * (tv[k] - s.v[k]);
        if (!(pred < 0.0)) continue;
        const double et = F.value(tu, tv);
        if (!std::isfinite(et)) continue;
        const bool resolvable = -pred > 1e-13 * std::max(std::fabs(s.energy), std::numeric_limits<double>::min());
        if (resolvable) {
            if (!(et <= s.energy + rule.armijo * pred)) continue;
            F.value_and_gradient(tu, tv, tgu, tgv);
        } else {
            if (!(et <= s.energy)) continue;
            F.value_and_gradient(tu, tv, tgu, tgv);
            if (!(F.residual(tgu, tgv) < s.residual)) continue;
        }
        s.u.swap(tu);
        s.v.swap(tv);
        s.gu.swap(tgu);
        s.gv.swap(tgv);
        s.energy = et;
        s.residual = F.residual(s.gu, s.gv);
        s.step = t;
        return true;
    }
    return false;
}

} // namespace detail

/**
 * Projected, metric-preconditioned gradient descent on phi or on its
 * quadrant truncation. Stops when the residual of the functional being
 * minimized drops to gradient_stop; the returned point carries the residual
 * of the untruncated system. Hitting the iteration cap or a line-search
 * failure returns the point flagged non-converged.
 */
inline CriticalPoint descend(const ProblemSpec& prob, const GridFunction& u0, const GridFunction& v0,
                             std::optional<Quadrant> quadrant, const SolverConfig& cfg,
                             std::vector<double>* energy_trace = nullptr) {
    const EnergyFunctional F(prob, quadrant);
    detail::StepState s;
    s.u = u0.values();
    s.v = v0.values();
    if (quadrant) project_quadrant(s.u, s.v, *quadrant);
    s.energy = F.value_and_gradient(s.u, s.v, s.gu, s.gv);
    s.residual = F.residual(s.gu, s.gv);
    s.step = cfg.step_rule.initial_step;
    if (energy_trace) energy_trace->push_back(s.energy);

    // The residual test is absolute, so a start of tiny amplitude can pass it
    // immediately; also require a relative reduction of the start residual.
    const double target = std::min(cfg.gradient_stop, 1e-8 * s.residual);
    std::size_t it = 0;
    bool converged = false;
    std::string note;
    for (;; ++it) {
        if (s.residual <= target) { converged = true; break; }
        if (it >= cfg.max_iterations) { note = "iteration cap reached"; break; }
        const PrincipalMetric metric(prob, s.u, s.v);
        if (!detail::projected_step(F, metric, s, cfg.step_rule)) { note = "line search stalled"; break; }
        if (quadrant && !detail::in_cone(s.u, s.v, *quadrant))
            throw std::logic_error("descend left the quadrant cone");
        if (energy_trace) energy_trace->push_back(s.energy);
    }
    if (!converged && s.residual <= cfg.gradient_stop) {
        converged = true;
        note.clear();
    }
    auto cp = detail::finish(prob, std::move(s.u), std::move(s.v), Method::descent, it, converged, note);
    if (converged && cp.residual > cfg.gradient_stop) {
        cp.converged = false;
        cp.note = "truncated problem converged but the untruncated residual is larger";
    }
    return cp;
}

namespace detail {

/**
 * Maximizer of t -> E(a + t (w - a)) by bisection on the directional
 * derivative, started from t = 1. Empty if the bracket search finds no
 * sign change of the slope.
 */
inline std::optional<double> ray_maximum(const EnergyFunctional& F, const std::vector<double>& au, const std::vector<double>& av,
                          const std::vector<double>& wu, const std::vector<double>& wv) {
    const std::size_t n = wu.size();
    std::vector<double> zu(n), zv(n), gu, gv;
    auto slope = [&](double t) {
        for (std::size_t k = 0; k < n; ++k) {
            zu[k] = au[k] + t * (wu[k] - au[k]);
            zv[k] = av[k] + t * (wv[k] - av[k]);
        }
        F.value_and_gradient(zu, zv, gu, gv);
        double d = 0.0;
        for (std::size_t k = 0; k < n; ++k) d += gu[k] * (wu[k] - au[k]) + gv[k] * (wv[k] - av[k]);
        return d;
    };
    double lo = 1.0, hi = 1.0;
    if (slope(1.0) > 0.0) {
        for (int i = 0; i < 80 && slope(hi) > 0.0; ++i) { lo = hi; hi *= 2.0; }
    } else {
        for (int i = 0; i < 80 && !(slope(lo) > 0.0); ++i) { hi = lo; lo *= 0.5; }
    }
    if (!(slope(lo) > 0.0) || slope(hi) > 0.0) return std::nullopt;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (slope(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Weighted L2 distance between path states.
inline double state_distance(const std::vector<double>& w, const std::vector<double>& au,
                             const std::vector<double>& av, const std::vector<double>& bu,
                             const std::vector<double>& bv) {
    double s = 0.0;
    for (std::size_t k = 0; k < au.size(); ++k) {
        const double du = au[k] - bu[k], dv = av[k] - bv[k];
        s += w[k] * (du * du + dv * dv);
    }
    return std::sqrt(s);
}

struct Path {
    std::vector<std::vector<double>> u, v;
    std::vector<double> energy;
};

// Re-samples the polyline at equal arclength, endpoints fixed.
inline void respace(Path& path, const EnergyFunctional& F) {
    const std::size_t m = path.u.size();
    const auto& w = F.weights();
    std::vector<double> s(m, 0.0);
    for (std::size_t i = 1; i < m; ++i)
        s[i] = s[i - 1] + state_distance(w, path.u[i], path.v[i], path.u[i - 1], path.v[i - 1]);
    if (!(s.back() > 0.0)) return;
    Path out = path;
    std::size_t seg = 0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double target = s.back() * static_cast<double>(i) / static_cast<double>(m - 1);
        while (seg + 1 < m - 1 && s[seg + 1] < target) ++seg;
        const double len = s[seg + 1] - s[seg];
        const double th = len > 0.0 ? (target - s[seg]) / len : 0.0;
        for (std::size_t k = 0; k < path.u[i].size(); ++k) {
            out.u[i][k] = (1.0 - th) * path.u[seg][k] + th * path.u[seg + 1][k];
            out.v[i][k] = (1.0 - th) * path.v[seg][k] + th * path.v[seg + 1][k];
        }
        out.energy[i] = F.value(out.u[i], out.v[i]);
    }
    path = std::move(out);
}

} // namespace detail

/**
 * Numerical mountain pass between two states of nonpositive energy.
 *
 * Path stage: a polyline of path_points states; the highest interior state
 * (lowest index on ties) is pushed down along the preconditioned negative
 * gradient with backtracking, and the path is re-spaced to equal arclength
 * every 10 relocations.
 *
 * Refinement stage: the path maximizer is moved to the energy maximum on
 * the ray from endpoint a through it, then alternates a preconditioned
 * descent step with a new ray maximization until the residual reaches
 * gradient_stop. This is the local min-max characterization of the pass
 * level; it converges where plain path relocation only creeps.
 */
inline CriticalPoint mountain_pass(const ProblemSpec& prob, const GridFunction& ua, const GridFunction& va,
                                   const GridFunction& ub, const GridFunction& vb, std::optional<Quadrant> quadrant,
                                   const SolverConfig& cfg) {
    const EnergyFunctional F(prob, quadrant);
    const double ea = F.value(ua.span(), va.span()), eb = F.value(ub.span(), vb.span());
    if (ea > 0.0 || eb > 0.0) throw ConfigError("mountain_pass: endpoint energies must be nonpositive");
    {
        double d = 0.0;
        for (std::size_t k = 0; k < ua.size(); ++k)
            d = std::max({d, std::fabs(ua[k] - ub[k]), std::fabs(va[k] - vb[k])});
        if (d == 0.0) throw ConfigError("mountain_pass: endpoints coincide");
    }

    const std::size_t m = cfg.path_points;
    detail::Path path;
    for (std::size_t i = 0; i < m; ++i) {
        const double th = static_cast<double>(i) / static_cast<double>(m - 1);
        std::vector<double> pu(ua.size()), pv(ua.size());
        for (std::size_t k = 0; k < ua.size(); ++k) {
            pu[k] = (1.0 - th) * ua[k] + th * ub[k];
            pv[k] = (1.0 - th) * va[k] + th * vb[k];
        }
        path.energy.push_back(i == 0 ? ea : (i + 1 == m ? eb : F.value(pu, pv)));
        path.u.push_back(std::move(pu));
        path.v.push_back(std::move(pv));
    }
    auto argmax = [&] {
        std::size_t best = 1;
        for (std::size_t i = 2; i + 1 < m; ++i)
            if (path.energy[i] > path.energy[best]) best = i;
        return best;
    };

    std::size_t relocations = 0;
    double last_max = path.energy[argmax()];
    for (; relocations < cfg.path_relocations; ++relocations) {
        const std::size_t i = argmax();
        detail::StepState s;
        s.u = path.u[i];
        s.v = path.v[i];
        s.energy = F.value_and_gradient(s.u, s.v, s.gu, s.gv);
        s.residual = F.residual(s.gu, s.gv);
        s.step = cfg.step_rule.initial_step;
        if (s.residual <= cfg.gradient_stop) break;
        const auto& w = F.weights();
        const double cap = 0.5 * std::min(detail::state_distance(w, path.u[i], path.v[i], path.u[i - 1], path.v[i - 1]),
                                          detail::state_distance(w, path.u[i], path.v[i], path.u[i + 1], path.v[i + 1]));
        const PrincipalMetric metric(prob, s.u, s.v);
        if (!detail::projected_step(F, metric, s, cfg.step_rule, cap)) break;
        // a relocation that drops the path below its endpoints has crossed the ridge between states
        const double old_energy = path.energy[i];
        path.energy[i] = s.energy;
        if (!(path.energy[argmax()] > std::max(ea, eb))) {
            path.energy[i] = old_energy;
            break;
        }
        path.u[i] = std::move(s.u);
        path.v[i] = std::move(s.v);
        if ((relocations + 1) % 10 == 0) {
            detail::respace(path, F);
            const double mx = path.energy[argmax()];
            if (std::fabs(last_max - mx) <= 1e-6 * std::fabs(mx)) break;
            last_max = mx;
        }
    }

    // refinement on the ray from endpoint a
    const std::vector<double>& au = ua.values();
    const std::vector<double>& av = va.values();
    const std::size_t n = au.size();
    detail::StepState s;
    s.u = path.u[argmax()];
    s.v = path.v[argmax()];
    auto to_ray_max = [&](std::vector<double>& wu, std::vector<double>& wv) {
        const auto t = detail::ray_maximum(F, au, av, wu, wv);
        if (!t) return false;
        for (std::size_t k = 0; k < n; ++k) {
            wu[k] = au[k] + *t * (wu[k] - au[k]);
            wv[k] = av[k] + *t * (wv[k] - av[k]);
        }
        return true;
    };
    if (!to_ray_max(s.u, s.v)) throw ConvergenceError("mountain_pass: no energy maximum on the ray through the path maximizer");
    s.energy = F.value_and_gradient(s.u, s.v, s.gu, s.gv);
    s.residual = F.residual(s.gu, s.gv);
    s.step = cfg.step_rule.initial_step;

    std::size_t it = 0;
    bool converged = false;
    std::string note;
    std::vector<double> du, dv, tu(n), tv(n), tgu, tgv;
    for (;; ++it) {
        if (s.residual <= cfg.gradient_stop) { converged = true; break; }
        if (it >= cfg.max_iterations) { note = "iteration cap reached"; break; }
        const PrincipalMetric metric(prob, s.u, s.v);
        metric.solve(s.gu, s.gv, du, dv);
        bool accepted = false;
        double t = std::min(cfg.step_rule.initial_step, 2.0 * s.step);
        for (int bt = 0; bt < 60 && !accepted; ++bt, t *= cfg.step_rule.shrink) {
            for (std::size_t k = 0; k < n; ++k) {
                tu[k] = s.u[k] - t * du[k];
                tv[k] = s.v[k] - t * dv[k];
            }
            if (quadrant) project_quadrant(tu, tv, *quadrant);
            double pred = 0.0;
            for (std::size_t k = 0; k < n; ++k) pred += s.gu[k] * (tu[k] - s.u[k]) + s.gv[k] * (tv[k] - s.v[k]);
            if (!(pred < 0.0)) continue;
            if (!to_ray_max(tu, tv)) continue;
            const double et = F.value_and_gradient(tu, tv, tgu, tgv);
            if (!std::isfinite(et)) continue;
            const double rt = F.residual(tgu, tgv);
            const bool resolvable = -pred > 1e-12 * std::max(std::fabs(s.energy), 1e-300);
            if (resolvable ? et <= s.energy + cfg.step_rule.armijo * pred : rt < s.residual) {
                s.u.swap(tu);
                s.v.swap(tv);
                s.gu.swap(tgu);
                s.gv.swap(tgv);
                s.energy = et;
                s.residual = rt;
                s.step = t;
                accepted = true;
            }
        }
        if (!accepted) { note = "refinement stalled"; break; }
    }

    auto cp = detail::finish(prob, std::move(s.u), std::move(s.v), Method::mountain_pass, relocations + it,
                             converged, note);
    if (converged && cp.residual > cfg.gradient_stop) {
        cp.converged = false;
        cp.note = "truncated problem converged but the untruncated residual is larger";
    }
    if (cp.converged && !(cp.energy > std::max(ea, eb))) {
        cp.converged = false;
        cp.note = "limit point does not exceed the endpoint energies";
    }
    return cp;
}

struct ScanResult {
    std::vector<std::pair<double, double>> rows;  // (t, energy), ascending t
    std::optional<double> first_negative_t;
};

/// Energies phi(t h1, t h2) over ascending t.
inline ScanResult divergence_scan(const ProblemSpec& prob, const GridFunction& h1, const GridFunction& h2,
                                  std::vector<double> t_values) {
    if (t_values.empty()) throw ConfigError("divergence_scan: empty t list");
    std::sort(t_values.begin(), t_values.end());
    const EnergyFunctional F(prob);
    ScanResult r;
    std::vector<double> u(h1.size()), v(h2.size());
    for (double t : t_values) {
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = t * h1[k];
            v[k] = t * h2[k];
        }
        const double e = F.value(u, v);
        r.rows.emplace_back(t, e);
        if (!r.first_negative_t && e < 0.0) r.first_negative_t = t;
    }
    return r;
}

enum class TheoremTarget { four, six, pairs };

inline const char* to_string(TheoremTarget t) {
    switch (t) {
        case TheoremTarget::four: return "four";
        case TheoremTarget::six: return "six";
        case TheoremTarget::pairs: return "pairs";
    }
    return "?";
}

/// One solver invocation inside a search, admitted to the inventory or not.
struct SearchRun {
    SearchRun(std::string label_, const Grid& g)
        : label(std::move(label_)),
          point{GridFunction::zero(g), GridFunction::zero(g), 0.0, 0.0, "mixed", Method::descent, 0, false, {}} {}

    std::string label;
    CriticalPoint point;
    bool admitted = false;
    std::string reason;  // why it was not admitted, or merge information
    double start_scale = 0.0;
    std::optional<double> negation_residual;
};

struct SolutionInventory {
    std::vector<CriticalPoint> points;
    std::size_t distinct_count = 0;
    TheoremTarget theorem_target = TheoremTarget::four;
    std::vector<SearchRun> runs;
    std::vector<std::string> notes;
    std::optional<double> ring_level;  // sampled min of phi on the ring, mountain-pass searches only
    std::vector<double> pair_energies;

    /**
     * Adds a point unless one within `distance` (sup norm over both
     * components) is already stored; on a merge the lower residual wins.
     * Returns the index of the stored point.
     */
    std::size_t add(const CriticalPoint& cp, double distance) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sup_distance(points[i], cp) < distance) {
                if (cp.residual < points[i].residual) points[i] = cp;
                return i;
            }
        }
        points.push_back(cp);
        distinct_count = points.size();
        return points.size() - 1;
    }
};

namespace detail {

inline double min_over_ball(const ExponentField& p, const Point& c, double r) {
    const Grid& g = p.grid();
    double m = INFINITY;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (distance(g.coordinates(k), c, g.dimension()) <= r) m = std::min(m, p[k]);
    return std::isfinite(m) ? m : p.min();
}

inline Point domain_center(const Grid& g) {
    return {0.5 * (g.lower(0) + g.upper(0)), g.dimension() == 2 ? 0.5 * (g.lower(1) + g.upper(1)) : 0.0};
}

inline Point to_domain(const Point& x, const Grid& g) {
    return g.dimension() == 2 ? x : Point{x[0], 0.0};
}

inline void note_preconditions(const ProblemSpec& prob, const SolverConfig& cfg, SolutionInventory& inv,
                               std::initializer_list<const char*> names) {
    try {
        const auto rep = check_hypotheses(prob, cfg.hypothesis_samples, cfg.seed);
        for (const char* nm : names)
            if (!rep.get(nm).passed) inv.notes.push_back(std::string("precondition ") + nm + " not verified");
    } catch (const ConfigError& e) {
        inv.notes.push_back(std::string("preconditions not checked: ") + e.what());
    }
}

} // namespace detail

/**
 * Four constant-sign states of negative energy: projected descent on the
 * truncated functional of each quadrant from a scaled bump pair
 * (t^{1/p-} u0, t^{1/q-} v0), t shrunk geometrically until the truncated
 * energy is negative. Admission requires convergence, negative energy, the
 * quadrant's sign pattern and both components above deflation_distance in
 * sup norm; rejected runs stay in `runs` with the reason.
 */
inline SolutionInventory find_constant_sign_solutions(const ProblemSpec& prob, const SolverConfig& cfg,
                                                      const std::vector<Quadrant>& quadrants = {Quadrant::Q1, Quadrant::Q2,
                                                                                                Quadrant::Q3, Quadrant::Q4}) {
    cfg.validate();
    SolutionInventory inv;
    inv.theorem_target = TheoremTarget::four;
    detail::note_preconditions(prob, cfg, inv, {"H_alpha_beta", "H0", "H2", "H3", "H_pq"});
    if (prob.lambda > cfg.lambda_threshold)
        inv.notes.push_back("precondition lambda <= " + detail::fmt_g(cfg.lambda_threshold) + " violated (lambda = " +
                            detail::fmt_g(prob.lambda) + ")");

    const Grid& g = prob.grid;
    const Point c = detail::domain_center(g);
    double extent = g.upper(0) - g.lower(0);
    if (g.dimension() == 2) extent = std::min(extent, g.upper(1) - g.lower(1));
    const double radius = cfg.bump_radius * extent;
    const GridFunction bump = smooth_bump(c, radius, g);
    const double pmin = detail::min_over_ball(prob.p, c, radius), qmin = detail::min_over_ball(prob.q, c, radius);

    for (Quadrant q : quadrants) {
        const auto [su, sv] = quadrant_signs(q);
        const EnergyFunctional F(prob, q);
        SearchRun run(std::string("descent ") + to_string(q), g);
        double t = 1.0;
        std::optional<std::pair<GridFunction, GridFunction>> start;
        for (int i = 0; i < 400; ++i, t *= cfg.start_shrink) {
            GridFunction u0 = bump * (su * std::pow(t, 1.0 / pmin));
            GridFunction v0 = bump * (sv * std::pow(t, 1.0 / qmin));
            if (F.value(u0.span(), v0.span()) < 0.0) {
                start.emplace(std::move(u0), std::move(v0));
                break;
            }
        }
        if (!start) {
            run.point = detail::finish(prob, std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0),
                                       Method::descent, 0, false, "no start of negative truncated energy");
            run.reason = run.point.note;
            inv.runs.push_back(std::move(run));
            continue;
        }
        run.start_scale = t;
        run.point = descend(prob, start->first, start->second, q, cfg);
        const CriticalPoint& cp = run.point;
        if (!cp.converged) run.reason = "not converged: " + cp.note;
        else if (!(cp.energy < 0.0)) run.reason = "energy not negative";
        else if (cp.quadrant != to_string(q)) run.reason = "sign pattern " + cp.quadrant;
        else if (!(cp.u.sup_norm() > cfg.deflation_distance && cp.v.sup_norm() > cfg.deflation_distance))
            run.reason = "component below nontriviality threshold " + detail::fmt_g(cfg.deflation_distance) +
                         " (sup |u| = " + detail::fmt_g(cp.u.sup_norm()) + ", sup |v| = " + detail::fmt_g(cp.v.sup_norm()) +
                         ")";
        else {
            run.admitted = true;
            const std::size_t before = inv.points.size();
            const std::size_t at = inv.add(cp, cfg.deflation_distance);
            if (inv.points.size() == before) run.reason = "merged with point " + std::to_string(at);
        }
        inv.runs.push_back(std::move(run));
    }
    inv.distinct_count = inv.points.size();
    return inv;
}

/**
 * Smallest sampled energy on the sphere |grad u|_p + |grad v|_q = r, over
 * random smooth pairs in the given quadrant (or any sign if none).
 */
inline double ring_minimum(const ProblemSpec& prob, double r, std::size_t samples, std::uint64_t seed,
                           std::optional<Quadrant> quadrant = std::nullopt) {
    const Grid& g = prob.grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const EnergyFunctional F(prob);
    double best = INFINITY;
    for (std::size_t s = 0; s < samples; ++s) {
        auto random_field = [&](double sign) {
            double a[2][4];
            for (auto& row : a)
                for (double& x : row) x = unif(rng);
            return GridFunction::sample(g, [&](const Point& x) {
                double val = 1.0;
                for (int d = 0; d < g.dimension(); ++d) {
                    const double t = (x[d] - g.lower(d)) / (g.upper(d) - g.lower(d));
                    double sum = 0.0;
                    for (int m = 0; m < 4; ++m) sum += a[d][m] * std::sin((m + 1) * 3.141592653589793 * t);
                    val *= sum;
                }
                return sign == 0.0 ? val : sign * std::fabs(val);
            });
        };
        double su = 0.0, sv = 0.0;
        if (quadrant) std::tie(su, sv) = quadrant_signs(*quadrant);
        GridFunction u = random_field(su), v = random_field(sv);
        const double nu = sobolev_norm(u, prob.p), nv = sobolev_norm(v, prob.q);
        if (!(nu > 0.0 && nv > 0.0)) continue;
        const double share = 0.5 * (unif(rng) + 1.0);
        u = u * (r * share / nu);
        v = v * (r * (1.0 - share) / nv);
        best = std::min(best, F.value(u.span(), v.span()));
    }
    return best;
}

namespace detail {

inline std::pair<GridFunction, GridFunction> endpoint_tents(const ProblemSpec& prob, const SolverConfig& cfg) {
    const Grid& g = prob.grid;
    return {tent_function(to_domain(cfg.tent_centers[0], g), cfg.tent_radius, g),
            tent_function(to_domain(cfg.tent_centers[1], g), cfg.tent_radius, g)};
}

} // namespace detail

/**
 * Descent points plus mountain-pass points between (0, 0) and
 * t*(h1, h2) in each requested quadrant, where h1, h2 are disjoint tents
 * and t* is the first scan value with negative energy.
 */
inline SolutionInventory find_six_solutions(const ProblemSpec& prob, const SolverConfig& cfg,
                                            const std::vector<Quadrant>& descent_quadrants = {Quadrant::Q1, Quadrant::Q2,
                                                                                              Quadrant::Q3, Quadrant::Q4}) {
    SolutionInventory inv = find_constant_sign_solutions(prob, cfg, descent_quadrants);
    inv.theorem_target = TheoremTarget::six;
    {
        SolutionInventory tmp;
        detail::note_preconditions(prob, cfg, tmp, {"H1"});
        inv.notes.insert(inv.notes.end(), tmp.notes.begin(), tmp.notes.end());
    }
    const Grid& g = prob.grid;
    inv.ring_level = ring_minimum(prob, cfg.ring_radius, cfg.ring_samples, cfg.seed + 11);
    if (!(*inv.ring_level > 0.0)) inv.notes.push_back("sampled ring level is not positive");

    const auto [h1, h2] = detail::endpoint_tents(prob, cfg);
    const ScanResult scan = divergence_scan(prob, h1, h2, cfg.scan_values());
    const GridFunction zero = GridFunction::zero(g);
    std::vector<CriticalPoint> minimizers = inv.points;

    for (Quadrant q : cfg.mountain_pass_quadrants) {
        SearchRun run(std::string("mountain_pass ") + to_string(q), g);
        if (!scan.first_negative_t) {
            run.point = detail::finish(prob, zero.values(), zero.values(), Method::mountain_pass, 0, false,
                                       "no negative-energy endpoint in the scan");
            run.reason = run.point.note;
            inv.runs.push_back(std::move(run));
            continue;
        }
        const auto [su, sv] = quadrant_signs(q);
        const double t = *scan.first_negative_t;
        run.start_scale = t;
        run.point = mountain_pass(prob, zero, zero, h1 * (su * t), h2 * (sv * t), q, cfg);
        const CriticalPoint& cp = run.point;
        bool distinct = true;
        for (const auto& m : minimizers)
            if (sup_distance(m, cp) < cfg.deflation_distance) distinct = false;
        if (!cp.converged) run.reason = "not converged: " + cp.note;
        else if (!(cp.energy > 0.0)) run.reason = "energy not positive";
        else if (inv.ring_level && !(cp.energy >= *inv.ring_level)) run.reason = "energy below the ring level";
        else if (cp.quadrant != to_string(q)) run.reason = "sign pattern " + cp.quadrant;
        else if (!distinct) run.reason = "coincides with a descent point";
        else if (!(cp.u.sup_norm() > cfg.deflation_distance && cp.v.sup_norm() > cfg.deflation_distance))
            run.reason = "component below nontriviality threshold";
        else {
            run.admitted = true;
            const std::size_t before = inv.points.size();
            const std::size_t at = inv.add(cp, cfg.deflation_distance);
            if (inv.points.size() == before) run.reason = "merged with point " + std::to_string(at);
        }
        inv.runs.push_back(std::move(run));
    }
    inv.distinct_count = inv.points.size();
    return inv;
}

/**
 * Finite stand-in for the infinite family of symmetric pairs. Site i
 * carries a u-tent left of it and a v-tent right of it with disjoint
 * supports; for n = 1..k the mountain pass runs between (0, 0) and the
 * scaled sum of the first n tent pairs on the untruncated functional. Each
 * limit is stored together with its negation, and the residual of the
 * negation is recorded. The offsets are unequal so no configuration is
 * mirror symmetric under (u, v)(x) -> (v, u)(1 - x).
 */
inline SolutionInventory symmetric_pairs(const ProblemSpec& prob, std::size_t k, const SolverConfig& cfg) {
    cfg.validate();
    SolutionInventory inv;
    inv.theorem_target = TheoremTarget::pairs;
    inv.notes.push_back("finite surrogate: " + std::to_string(k) +
                        " multi-bump mountain-pass runs; the infinite family itself is not computed");
    detail::note_preconditions(prob, cfg, inv, {"H4"});
    if (k > cfg.pair_sites.size())
        throw GeometryError("symmetric_pairs: " + std::to_string(k) + " sites requested, " +
                            std::to_string(cfg.pair_sites.size()) + " configured");
    const Grid& g = prob.grid;
    const double eps = cfg.pair_radius;
    std::vector<GridFunction> hu, hv;
    for (std::size_t i = 0; i < k; ++i) {
        Point s = detail::to_domain(cfg.pair_sites[i], g);
        Point a = s, b = s;
        a[0] -= 1.05 * eps;
        b[0] += 1.25 * eps;
        hu.push_back(tent_function(a, eps, g));
        hv.push_back(tent_function(b, eps, g));
    }
    auto overlap = [](const GridFunction& x, const GridFunction& y) { return !(x * y).is_zero(); };
    for (std::size_t i = 0; i < k; ++i) {
        if (overlap(hu[i], hv[i])) throw GeometryError("symmetric_pairs: tents of site " + std::to_string(i) + " overlap");
        for (std::size_t j = i + 1; j < k; ++j)
            if (overlap(hu[i], hu[j]) || overlap(hv[i], hv[j]))
                throw GeometryError("symmetric_pairs: sites " + std::to_string(i) + " and " + std::to_string(j) +
                                    " overlap");
    }

    const GridFunction zero = GridFunction::zero(g);
    GridFunction su = zero, sv = zero;
    for (std::size_t n = 1; n <= k; ++n) {
        su = su + hu[n - 1];
        sv = sv + hv[n - 1];
        SearchRun run("pair n=" + std::to_string(n), g);
        const ScanResult scan = divergence_scan(prob, su, sv, cfg.scan_values());
        if (!scan.first_negative_t) {
            run.point = detail::finish(prob, zero.values(), zero.values(), Method::mountain_pass, 0, false,
                                       "no negative-energy endpoint in the scan");
            run.reason = run.point.note;
            inv.runs.push_back(std::move(run));
            continue;
        }
        run.start_scale = *scan.first_negative_t;
        run.point = mountain_pass(prob, zero, zero, su * run.start_scale, sv * run.start_scale, std::nullopt, cfg);
        const CriticalPoint& cp = run.point;
        run.negation_residual = weak_residual(-cp.u, -cp.v, prob);
        inv.pair_energies.push_back(cp.energy);
        if (!cp.converged) run.reason = "not converged: " + cp.note;
        else {
            run.admitted = true;
            inv.add(cp, cfg.deflation_distance);
            CriticalPoint neg = cp;
            neg.u = -cp.u;
            neg.v = -cp.v;
            neg.residual = *run.negation_residual;
            neg.energy = phi_energy(neg.u, neg.v, prob);
            neg.quadrant = classify_quadrant(neg.u, neg.v);
            neg.note = "negation of " + run.label;
            inv.add(neg, cfg.deflation_distance);
        }
        inv.runs.push_back(std::move(run));
    }
    inv.distinct_count = inv.points.size();
    return inv;
}

} // namespace vexp
