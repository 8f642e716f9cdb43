#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vexp/config.hpp"
#include "vexp/hypotheses.hpp"
#include "vexp/rayleigh.hpp"
#include "vexp/solvers.hpp"

namespace vexp {

struct EigenEstimate {
    std::string exponent;  // "p" or "q"
    RayleighEstimate estimate;
};

struct ScanTrace {
    std::string label;
    ScanResult result;
};

/**
 * Everything one CLI run produced. Wall times are kept out of the JSON in
 * deterministic mode so two runs can be compared byte for byte.
 */
struct RunReport {
    std::string subcommand;
    std::uint64_t seed = 0;
    bool deterministic = false;
    Json config_echo;
    std::vector<std::string> notices;
    std::optional<HypothesisReport> hypotheses;
    std::vector<EigenEstimate> eigen_estimates;
    std::optional<SolutionInventory> inventory;
    std::vector<std::string> solution_files;  // parallel to inventory->points
    std::vector<ScanTrace> scans;
    Json extra = Json::object();              // subcommand-specific results
    std::vector<std::pair<std::string, double>> timings;
    int exit_status = 0;
};

namespace detail {

// Non-finite numbers have no JSON form; they become null.
inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json point_json(const CriticalPoint& cp) {
    Json j;
    j["quadrant"] = cp.quadrant;
    j["method"] = to_string(cp.method);
    j["energy"] = num(cp.energy);
    j["residual"] = num(cp.residual);
    j["iterations"] = cp.iterations;
    j["converged"] = cp.converged;
    j["sup_u"] = num(cp.u.sup_norm());
    j["sup_v"] = num(cp.v.sup_norm());
    j["note"] = cp.note;
    return j;
}

} // namespace detail

inline Json to_json(const HypothesisVerdict& v) {
    Json j;
    j["name"] = v.name;
    j["passed"] = v.passed;
    j["samples"] = v.samples;
    j["worst_margin"] = detail::num(v.worst_margin);
    j["decay_exponent"] = v.decay_exponent ? detail::num(*v.decay_exponent) : Json(nullptr);
    j["detail"] = v.detail;
    return j;
}

inline Json to_json(const SolutionInventory& inv, const std::vector<std::string>& files = {}) {
    Json j;
    j["theorem_target"] = to_string(inv.theorem_target);
    j["distinct_count"] = inv.distinct_count;
    Json pts = Json::array();
    for (std::size_t i = 0; i < inv.points.size(); ++i) {
        Json p;
        p["index"] = i;
        const Json body = detail::point_json(inv.points[i]);
        for (const auto& [k, v] : body.items()) p[k] = v;
        p["csv"] = i < files.size() ? Json(files[i]) : Json(nullptr);
        pts.push_back(p);
    }
    j["points"] = pts;
    Json runs = Json::array();
    for (const auto& r : inv.runs) {
        Json x;
        x["label"] = r.label;
        x["admitted"] = r.admitted;
        x["reason"] = r.reason;
        x["start_scale"] = detail::num(r.start_scale);
        x["negation_residual"] = r.negation_residual ? detail::num(*r.negation_residual) : Json(nullptr);
        x["point"] = detail::point_json(r.point);
        runs.push_back(x);
    }
    j["runs"] = runs;
    j["notes"] = inv.notes;
    j["ring_level"] = inv.ring_level ? detail::num(*inv.ring_level) : Json(nullptr);
    Json pe = Json::array();
    for (double e : inv.pair_energies) pe.push_back(detail::num(e));
    j["pair_energies"] = pe;
    return j;
}

inline Json to_json(const RunReport& r) {
    Json j;
    j["schema_version"] = schema_version;
    j["subcommand"] = r.subcommand;
    j["seed"] = r.seed;
    j["deterministic"] = r.deterministic;
    j["exit_status"] = r.exit_status;
    j["config_echo"] = r.config_echo;
    j["notices"] = r.notices;
    if (r.hypotheses) {
        Json h = Json::array();
        for (const auto& v : r.hypotheses->verdicts) h.push_back(to_json(v));
        j["hypothesis_results"] = h;
    } else {
        j["hypothesis_results"] = nullptr;
    }
    if (r.eigen_estimates.empty()) {
        j["eigen_estimates"] = nullptr;
    } else {
        Json e = Json::array();
        for (const auto& x : r.eigen_estimates) {
            Json o;
            o["exponent"] = x.exponent;
            o["value"] = detail::num(x.estimate.value);
            Json vals = Json::array();
            for (double v : x.estimate.restart_values) vals.push_back(detail::num(v));
            o["restart_values"] = vals;
            o["restart_iterations"] = x.estimate.restart_iterations;
            e.push_back(o);
        }
        j["eigen_estimates"] = e;
    }
    j["inventory"] = r.inventory ? to_json(*r.inventory, r.solution_files) : Json(nullptr);
    Json scans = Json::array();
    for (const auto& s : r.scans) {
        Json o;
        o["label"] = s.label;
        Json rows = Json::array();
        for (const auto& [t, e] : s.result.rows) rows.push_back(Json::array({detail::num(t), detail::num(e)}));
        o["rows"] = rows;
        o["first_negative_t"] = s.result.first_negative_t ? detail::num(*s.result.first_negative_t) : Json(nullptr);
        scans.push_back(o);
    }
    j["scans"] = scans;
    j["results"] = r.extra;
    if (r.deterministic) {
        j["timings"] = nullptr;
    } else {
        Json t = Json::object();
        for (const auto& [k, v] : r.timings) t[k] = v;
        j["timings"] = t;
    }
    return j;
}

inline std::string dump_report(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
    if (!out) throw ConfigError("write failed for " + path);
}

/// Tidy CSV of a solution pair: index,x[,y],u,v with round-trip precision.
inline std::string solution_csv(const GridFunction& u, const GridFunction& v) {
    const Grid& g = u.grid();
    std::string s = g.dimension() == 1 ? "index,x,u,v\n" : "index,x,y,u,v\n";
    char buf[160];
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.coordinates(k);
        if (g.dimension() == 1)
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, x[0], u[k], v[k]);
        else
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", k, x[0], x[1], u[k], v[k]);
        s += buf;
    }
    return s;
}

/// Reads a solution CSV back onto `g`; coordinates must match the grid.
inline std::pair<GridFunction, GridFunction> read_solution_csv(const std::string& path, const Grid& g) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    const std::string expect = g.dimension() == 1 ? "index,x,u,v" : "index,x,y,u,v";
    if (line != expect) throw DataError(path + ": header '" + line + "' does not match '" + expect + "'");
    std::vector<double> u(g.size(), 0.0), v(g.size(), 0.0);
    std::vector<bool> seen(g.size(), false);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(row) + ": bad number '" + cell + "'");
            }
        }
        if (vals.size() != static_cast<std::size_t>(g.dimension()) + 3)
            throw DataError(path + ":" + std::to_string(row) + ": wrong column count");
        const auto k = static_cast<std::size_t>(vals[0]);
        if (k >= g.size() || seen[k]) throw DataError(path + ":" + std::to_string(row) + ": bad node index");
        const Point x = g.coordinates(k);
        for (int a = 0; a < g.dimension(); ++a)
            if (std::fabs(vals[1 + a] - x[a]) > 1e-12 * (1.0 + std::fabs(x[a])))
                throw DataError(path + ":" + std::to_string(row) + ": coordinates do not match the grid");
        seen[k] = true;
        u[k] = vals[vals.size() - 2];
        v[k] = vals[vals.size() - 1];
    }
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!seen[k]) throw DataError(path + ": node " + std::to_string(k) + " missing");
    return {GridFunction(g, std::move(u)), GridFunction(g, std::move(v))};
}

} // namespace vexp
