#pragma once

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vexp/problem.hpp"
#include "vexp/solvers.hpp"

namespace vexp {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

/// Everything a config file describes, plus notices raised while reading it.
struct Config {
    explicit Config(ProblemSpec p = default_problem()) : problem(std::move(p)) {}

    ProblemSpec problem;
    SolverConfig solver;
    std::size_t eigen_restarts = 4;
    std::size_t pair_count = 3;
    std::vector<std::string> notices;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') { ++line; col = 1; }
        else ++col;
    }
    return {line, col};
}

/**
 * Finds the line of a key path by walking the raw text: each key is
 * searched after the position of its parent. Good enough for diagnostics
 * on hand-written files; returns 0 if a key is not found.
 */
inline std::size_t locate(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    for (const auto& key : path) {
        const auto at = text.find("\"" + key + "\"", pos);
        if (at == std::string::npos) return 0;
        pos = at + 1;
    }
    return path.empty() ? 0 : line_column(text, pos - 1).first;
}

class Reader {
public:
    Reader(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
        std::string where = source_;
        if (const auto line = locate(text_, path)) where += ":" + std::to_string(line);
        std::string dotted;
        for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
        throw ConfigError(where + ": " + (dotted.empty() ? "" : dotted + ": ") + what);
    }

    void allow(const Json& obj, const std::vector<std::string>& path, std::initializer_list<const char*> keys) const {
        if (!obj.is_object()) fail(path, "expected an object");
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, _] : obj.items()) {
            if (!ok.count(k)) {
                auto p = path;
                p.push_back(k);
                fail(p, "unknown key");
            }
        }
    }

    double number(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    std::size_t count(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_number_unsigned()) fail(path, "expected a nonnegative integer");
        return v.get<std::size_t>();
    }

    // Numbers and formula strings are both accepted for expressions.
    Expression expression(const Json& v, const std::vector<std::string>& path) const {
        if (v.is_number()) return Expression::constant(v.get<double>());
        if (!v.is_string()) fail(path, "expected a number or a formula string");
        try {
            return Expression::parse(v.get<std::string>());
        } catch (const Error& e) {
            fail(path, e.what());
        }
    }

    ExponentField field(const Grid& g, const Json& v, const std::vector<std::string>& path,
                        const std::string& name) const {
        Expression e0 = expression(v, path);
        try {
            return ExponentField(g, std::move(e0), name);
        } catch (const Error& e) {
            fail(path, e.what());
        }
    }

    std::vector<Point> points(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_array()) fail(path, "expected an array of points");
        std::vector<Point> out;
        for (const auto& e : v) {
            if (e.is_number()) out.push_back({e.get<double>(), 0.0});
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                out.push_back({e[0].get<double>(), e[1].get<double>()});
            else fail(path, "a point is a number (1D) or a pair [x, y]");
        }
        return out;
    }

    const std::string& text() const { return text_; }
    const std::string& source() const { return source_; }

private:
    std::string text_, source_;
};

// Key path in the config file that carries the data a constraint is about.
inline std::vector<std::string> constraint_path(const std::string& c) {
    if (c == "H_alpha_beta") return {"exponents", "alpha"};
    if (c == "a>p") return {"nonlinearity", "a"};
    if (c == "b>q") return {"nonlinearity", "b"};
    if (c == "theta1<p" || c == "theta1/p+theta2/q=1") return {"nonlinearity", "theta1"};
    if (c == "theta2<q") return {"nonlinearity", "theta2"};
    if (c == "lambda") return {"lambda"};
    if (c == "regularization") return {"grad_regularization"};
    return {"nonlinearity"};
}

} // namespace detail

/**
 * Parses and validates a configuration document. `source` names the file
 * in diagnostics. Errors are ConfigError with file:line, or ValidationError
 * naming the violated hypothesis.
 */
inline Config parse_config_text(const std::string& text, const std::string& source = "<config>") {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
    const detail::Reader r(text, source);
    r.allow(j, {}, {"schema_version", "domain", "exponents", "lambda", "nonlinearity", "grad_regularization",
                    "tolerances", "hypothesis_constants", "solver", "eigen"});
    if (!j.contains("schema_version")) r.fail({}, "missing schema_version");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != schema_version)
        r.fail({"schema_version"}, "unsupported schema version, expected " + std::to_string(schema_version));

    Config cfg;
    if (!j.contains("domain")) r.fail({}, "missing domain");
    {
        const Json& d = j["domain"];
        r.allow(d, {"domain"}, {"dimension", "lower", "upper", "nodes"});
        DomainSpec spec;
        if (d.contains("dimension")) spec.dimension = static_cast<int>(r.count(d["dimension"], {"domain", "dimension"}));
        if (spec.dimension == 2) spec.nodes[1] = spec.nodes[0];
        auto axes = [&](const char* key, auto put) {
            if (!d.contains(key)) return;
            const Json& a = d[key];
            if (a.is_number())
                for (int i = 0; i < spec.dimension; ++i) put(i, a);
            else if (a.is_array() && static_cast<int>(a.size()) == spec.dimension)
                for (int i = 0; i < spec.dimension; ++i) put(i, a[static_cast<std::size_t>(i)]);
            else r.fail({"domain", key}, "expected a number or one entry per axis");
        };
        axes("lower", [&](int i, const Json& v) { spec.lower[i] = r.number(v, {"domain", "lower"}); });
        axes("upper", [&](int i, const Json& v) { spec.upper[i] = r.number(v, {"domain", "upper"}); });
        axes("nodes", [&](int i, const Json& v) { spec.nodes[i] = r.count(v, {"domain", "nodes"}); });
        if (spec.dimension == 1) spec.nodes[1] = 1;
        try {
            cfg.problem.grid = make_grid(spec);
        } catch (const ConfigError& e) {
            r.fail({"domain"}, e.what());
        }
    }
    const Grid& g = cfg.problem.grid;

    if (!j.contains("exponents")) r.fail({}, "missing exponents");
    {
        const Json& e = j["exponents"];
        r.allow(e, {"exponents"}, {"p", "q", "alpha", "beta"});
        for (const char* k : {"p", "q", "alpha", "beta"})
            if (!e.contains(k)) r.fail({"exponents"}, std::string("missing ") + k);
        cfg.problem.p = r.field(g, e["p"], {"exponents", "p"}, "p");
        cfg.problem.q = r.field(g, e["q"], {"exponents", "q"}, "q");
        cfg.problem.alpha = r.field(g, e["alpha"], {"exponents", "alpha"}, "alpha");
        cfg.problem.beta = r.field(g, e["beta"], {"exponents", "beta"}, "beta");
    }

    if (j.contains("lambda")) {
        cfg.problem.lambda = r.number(j["lambda"], {"lambda"});
    } else {
        cfg.problem.lambda = 1e-3;
        cfg.notices.push_back("lambda not given, using the default 1e-3");
    }
    if (j.contains("grad_regularization"))
        cfg.problem.grad_regularization = r.number(j["grad_regularization"], {"grad_regularization"});

    if (!j.contains("nonlinearity")) r.fail({}, "missing nonlinearity");
    {
        const Json& n = j["nonlinearity"];
        const std::vector<std::string> at{"nonlinearity"};
        if (!n.is_object() || !n.contains("kind") || !n["kind"].is_string()) r.fail(at, "needs a string field kind");
        const std::string kind = n["kind"].get<std::string>();
        auto sub = [&](const char* k) { return std::vector<std::string>{"nonlinearity", k}; };
        auto need = [&](const char* k) -> const Json& {
            if (!n.contains(k)) r.fail(at, std::string("missing ") + k);
            return n[k];
        };
        if (kind == "paper_example") {
            r.allow(n, at, {"kind", "a", "b", "theta1", "theta2"});
            cfg.problem.nonlinearity = NonlinearitySpec::paper_example(
                r.field(g, need("a"), sub("a"), "a"), r.field(g, need("b"), sub("b"), "b"),
                r.field(g, need("theta1"), sub("theta1"), "theta1"), r.field(g, need("theta2"), sub("theta2"), "theta2"));
        } else if (kind == "separable_power") {
            r.allow(n, at, {"kind", "coeff_u", "power_u", "coeff_v", "power_v"});
            cfg.problem.nonlinearity = NonlinearitySpec::separable_power(
                r.number(need("coeff_u"), sub("coeff_u")), r.number(need("power_u"), sub("power_u")),
                r.number(need("coeff_v"), sub("coeff_v")), r.number(need("power_v"), sub("power_v")));
        } else if (kind == "linear_source") {
            r.allow(n, at, {"kind", "source_u", "source_v"});
            cfg.problem.nonlinearity = NonlinearitySpec::linear_source(r.expression(need("source_u"), sub("source_u")),
                                                                       r.expression(need("source_v"), sub("source_v")));
        } else if (kind == "custom") {
            r.allow(n, at, {"kind", "F"});
            const Json& f = need("F");
            if (!f.is_string()) r.fail(sub("F"), "expected a formula string");
            try {
                cfg.problem.nonlinearity = NonlinearitySpec::from_expression(f.get<std::string>());
            } catch (const Error& e) {
                r.fail(sub("F"), e.what());
            }
        } else {
            r.fail(sub("kind"), "unknown kind '" + kind + "'");
        }
    }

    if (j.contains("tolerances")) {
        const Json& t = j["tolerances"];
        r.allow(t, {"tolerances"}, {"inequality_slack", "identity", "theta_sum"});
        auto& tol = cfg.problem.tolerances;
        if (t.contains("inequality_slack")) tol.inequality_slack = r.number(t["inequality_slack"], {"tolerances", "inequality_slack"});
        if (t.contains("identity")) tol.identity = r.number(t["identity"], {"tolerances", "identity"});
        if (t.contains("theta_sum")) tol.theta_sum = r.number(t["theta_sum"], {"tolerances", "theta_sum"});
    }

    // The hypothesis constants are problem-specific; defaults apply only to the shipped problem.
    cfg.problem.constants = {};
    if (j.contains("hypothesis_constants")) {
        const Json& c = j["hypothesis_constants"];
        const std::vector<std::string> at{"hypothesis_constants"};
        r.allow(c, at, {"C", "gamma", "delta", "M", "C1", "C2"});
        auto& k = cfg.problem.constants;
        auto sub = [&](const char* s) { return std::vector<std::string>{"hypothesis_constants", s}; };
        if (c.contains("C")) k.C = r.number(c["C"], sub("C"));
        if (c.contains("gamma")) k.gamma = r.expression(c["gamma"], sub("gamma"));
        if (c.contains("delta")) k.delta = r.expression(c["delta"], sub("delta"));
        if (c.contains("M")) k.M = r.number(c["M"], sub("M"));
        if (c.contains("C1")) k.C1 = r.number(c["C1"], sub("C1"));
        if (c.contains("C2")) k.C2 = r.number(c["C2"], sub("C2"));
    }

    if (j.contains("solver")) {
        const Json& s = j["solver"];
        const std::vector<std::string> at{"solver"};
        r.allow(s, at, {"max_iterations", "gradient_stop", "step_rule", "path_points", "path_relocations",
                        "deflation_distance", "seed", "lambda_threshold", "hypothesis_samples", "bump_radius",
                        "start_shrink", "tent_centers", "tent_radius", "scan_t", "quadrants", "pair_sites",
                        "pair_radius", "pair_count", "ring_radius", "ring_samples"});
        auto sub = [&](const char* k) { return std::vector<std::string>{"solver", k}; };
        SolverConfig& sc = cfg.solver;
        if (s.contains("max_iterations")) sc.max_iterations = r.count(s["max_iterations"], sub("max_iterations"));
        if (s.contains("gradient_stop")) sc.gradient_stop = r.number(s["gradient_stop"], sub("gradient_stop"));
        if (s.contains("step_rule")) {
            const Json& st = s["step_rule"];
            r.allow(st, sub("step_rule"), {"initial_step", "shrink", "armijo"});
            auto ss = [&](const char* k) { return std::vector<std::string>{"solver", "step_rule", k}; };
            if (st.contains("initial_step")) sc.step_rule.initial_step = r.number(st["initial_step"], ss("initial_step"));
            if (st.contains("shrink")) sc.step_rule.shrink = r.number(st["shrink"], ss("shrink"));
            if (st.contains("armijo")) sc.step_rule.armijo = r.number(st["armijo"], ss("armijo"));
        }
        if (s.contains("path_points")) sc.path_points = r.count(s["path_points"], sub("path_points"));
        if (s.contains("path_relocations")) sc.path_relocations = r.count(s["path_relocations"], sub("path_relocations"));
        if (s.contains("deflation_distance"))
            sc.deflation_distance = r.number(s["deflation_distance"], sub("deflation_distance"));
        if (s.contains("seed")) sc.seed = r.count(s["seed"], sub("seed"));
        if (s.contains("lambda_threshold")) sc.lambda_threshold = r.number(s["lambda_threshold"], sub("lambda_threshold"));
        if (s.contains("hypothesis_samples"))
            sc.hypothesis_samples = r.count(s["hypothesis_samples"], sub("hypothesis_samples"));
        if (s.contains("bump_radius")) sc.bump_radius = r.number(s["bump_radius"], sub("bump_radius"));
        if (s.contains("start_shrink")) sc.start_shrink = r.number(s["start_shrink"], sub("start_shrink"));
        if (s.contains("tent_centers")) sc.tent_centers = r.points(s["tent_centers"], sub("tent_centers"));
        if (s.contains("tent_radius")) sc.tent_radius = r.number(s["tent_radius"], sub("tent_radius"));
        if (s.contains("scan_t")) {
            if (!s["scan_t"].is_array()) r.fail(sub("scan_t"), "expected an array of numbers");
            sc.scan_t.clear();
            for (const auto& t : s["scan_t"]) sc.scan_t.push_back(r.number(t, sub("scan_t")));
        }
        if (s.contains("quadrants")) {
            if (!s["quadrants"].is_array()) r.fail(sub("quadrants"), "expected an array of quadrant tags");
            sc.mountain_pass_quadrants.clear();
            for (const auto& q : s["quadrants"]) {
                if (!q.is_string()) r.fail(sub("quadrants"), "expected quadrant tags");
                try {
                    sc.mountain_pass_quadrants.push_back(parse_quadrant(q.get<std::string>()));
                } catch (const ConfigError& e) {
                    r.fail(sub("quadrants"), e.what());
                }
            }
        }
        if (s.contains("pair_sites")) sc.pair_sites = r.points(s["pair_sites"], sub("pair_sites"));
        if (s.contains("pair_radius")) sc.pair_radius = r.number(s["pair_radius"], sub("pair_radius"));
        if (s.contains("pair_count")) cfg.pair_count = r.count(s["pair_count"], sub("pair_count"));
        if (s.contains("ring_radius")) sc.ring_radius = r.number(s["ring_radius"], sub("ring_radius"));
        if (s.contains("ring_samples")) sc.ring_samples = r.count(s["ring_samples"], sub("ring_samples"));
        try {
            sc.validate();
        } catch (const ConfigError& e) {
            r.fail(at, e.what());
        }
    }

    if (j.contains("eigen")) {
        const Json& e = j["eigen"];
        r.allow(e, {"eigen"}, {"restarts"});
        if (e.contains("restarts")) cfg.eigen_restarts = r.count(e["restarts"], {"eigen", "restarts"});
    }

    try {
        validate(cfg.problem);
    } catch (const ValidationError& e) {
        std::string where = source;
        if (const auto line = detail::locate(text, detail::constraint_path(e.constraint())))
            where += ":" + std::to_string(line);
        throw ValidationError(e.constraint(), where + ": (" + e.constraint() + ") violated: " + e.what());
    }
    return cfg;
}

inline Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

namespace detail {

inline Json points_json(const std::vector<Point>& pts, int dim) {
    Json a = Json::array();
    for (const auto& p : pts) a.push_back(dim == 1 ? Json(p[0]) : Json::array({p[0], p[1]}));
    return a;
}

} // namespace detail

/// Normalized configuration; parse_config_text(config_to_json(c).dump()) rebuilds c.
inline Json config_to_json(const Config& cfg) {
    const ProblemSpec& pr = cfg.problem;
    const Grid& g = pr.grid;
    const int dim = g.dimension();
    Json j;
    j["schema_version"] = schema_version;
    Json d;
    d["dimension"] = dim;
    if (dim == 1) {
        d["lower"] = g.lower(0);
        d["upper"] = g.upper(0);
        d["nodes"] = g.nodes(0);
    } else {
        d["lower"] = Json::array({g.lower(0), g.lower(1)});
        d["upper"] = Json::array({g.upper(0), g.upper(1)});
        d["nodes"] = Json::array({g.nodes(0), g.nodes(1)});
    }
    j["domain"] = d;
    j["exponents"] = {{"p", pr.p.descriptor().to_string()},
                      {"q", pr.q.descriptor().to_string()},
                      {"alpha", pr.alpha.descriptor().to_string()},
                      {"beta", pr.beta.descriptor().to_string()}};
    j["lambda"] = pr.lambda;
    const auto& nl = pr.nonlinearity;
    Json n;
    n["kind"] = to_string(nl.kind);
    switch (nl.kind) {
        case NonlinearityKind::paper_example:
            n["a"] = nl.a->descriptor().to_string();
            n["b"] = nl.b->descriptor().to_string();
            n["theta1"] = nl.theta1->descriptor().to_string();
            n["theta2"] = nl.theta2->descriptor().to_string();
            break;
        case NonlinearityKind::separable_power:
            n["coeff_u"] = nl.coeff_u;
            n["power_u"] = nl.power_u;
            n["coeff_v"] = nl.coeff_v;
            n["power_v"] = nl.power_v;
            break;
        case NonlinearityKind::linear_source:
            n["source_u"] = nl.source_u.to_string();
            n["source_v"] = nl.source_v.to_string();
            break;
        case NonlinearityKind::custom:
            n["F"] = nl.custom_text;
            break;
    }
    j["nonlinearity"] = n;
    j["grad_regularization"] = pr.grad_regularization;
    j["tolerances"] = {{"inequality_slack", pr.tolerances.inequality_slack},
                       {"identity", pr.tolerances.identity},
                       {"theta_sum", pr.tolerances.theta_sum}};
    Json c = Json::object();
    const auto& k = pr.constants;
    if (k.C) c["C"] = *k.C;
    if (k.gamma) c["gamma"] = k.gamma->to_string();
    if (k.delta) c["delta"] = k.delta->to_string();
    if (k.M) c["M"] = *k.M;
    if (k.C1) c["C1"] = *k.C1;
    if (k.C2) c["C2"] = *k.C2;
    j["hypothesis_constants"] = c;

    const SolverConfig& s = cfg.solver;
    Json sj;
    sj["max_iterations"] = s.max_iterations;
    sj["gradient_stop"] = s.gradient_stop;
    sj["step_rule"] = {{"initial_step", s.step_rule.initial_step},
                       {"shrink", s.step_rule.shrink},
                       {"armijo", s.step_rule.armijo}};
    sj["path_points"] = s.path_points;
    sj["path_relocations"] = s.path_relocations;
    sj["deflation_distance"] = s.deflation_distance;
    sj["seed"] = s.seed;
    sj["lambda_threshold"] = s.lambda_threshold;
    sj["hypothesis_samples"] = s.hypothesis_samples;
    sj["bump_radius"] = s.bump_radius;
    sj["start_shrink"] = s.start_shrink;
    sj["tent_centers"] = detail::points_json(s.tent_centers, dim);
    sj["tent_radius"] = s.tent_radius;
    sj["scan_t"] = s.scan_values();
    Json qs = Json::array();
    for (Quadrant q : s.mountain_pass_quadrants) qs.push_back(to_string(q));
    sj["quadrants"] = qs;
    sj["pair_sites"] = detail::points_json(s.pair_sites, dim);
    sj["pair_radius"] = s.pair_radius;
    sj["pair_count"] = cfg.pair_count;
    sj["ring_radius"] = s.ring_radius;
    sj["ring_samples"] = s.ring_samples;
    j["solver"] = sj;
    j["eigen"] = {{"restarts", cfg.eigen_restarts}};
    return j;
}

} // namespace vexp
