// Command-line driver: check, norm, eigen, solve, scan, pairs.
#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vexp/config.hpp"
#include "vexp/exponent_spaces.hpp"
#include "vexp/report.hpp"

namespace fs = std::filesystem;
using namespace vexp;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool deterministic = false;
    std::string out = ".";
    int theorem = 0;
    std::string quadrants;
    std::string t_list;
    std::optional<std::size_t> pairs_k;
    std::string u_formula = "x*(1-x)";
    std::string v_formula = "sin(pi*x)";
};

class Stopwatch {
public:
    explicit Stopwatch(RunReport& r) : report_(r) {}
    template <class F>
    auto stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto result = f();
        report_.timings.emplace_back(name,
                                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return result;
    }

private:
    RunReport& report_;
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<Quadrant> parse_quadrants(const std::string& s) {
    std::vector<Quadrant> q;
    for (const auto& t : split(s)) q.push_back(parse_quadrant(t));
    if (q.empty()) throw ConfigError("--quadrants needs at least one quadrant");
    return q;
}

std::vector<double> parse_t_list(const std::string& s) {
    std::vector<double> t;
    for (const auto& x : split(s)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(x, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != x.size()) throw ConfigError("--t-list: bad number '" + x + "'");
        t.push_back(v);
    }
    return t;
}

bool all_admitted(const SolutionInventory& inv) {
    for (const auto& r : inv.runs)
        if (!r.admitted) return false;
    return true;
}

void write_solutions(const SolutionInventory& inv, const fs::path& dir, RunReport& report) {
    for (std::size_t i = 0; i < inv.points.size(); ++i) {
        const auto& cp = inv.points[i];
        const std::string name = "solution_" + std::to_string(i) + "_" + cp.quadrant + ".csv";
        write_text((dir / name).string(), solution_csv(cp.u, cp.v));
        report.solution_files.push_back(name);
    }
}

int run(const std::string& sub, const Options& opt) {
    Config cfg;
    if (!opt.config_path.empty()) cfg = parse_config(opt.config_path);
    if (opt.seed) cfg.solver.seed = *opt.seed;
    const ProblemSpec& prob = cfg.problem;
    const SolverConfig& sc = cfg.solver;

    RunReport report;
    report.subcommand = sub == "solve" ? "solve --theorem " + std::to_string(opt.theorem) : sub;
    report.seed = sc.seed;
    report.deterministic = opt.deterministic;
    report.config_echo = config_to_json(cfg);
    report.notices = cfg.notices;
    Stopwatch clock(report);
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    if (sub == "check") {
        report.hypotheses = clock.stage("hypotheses", [&] { return check_hypotheses(prob, sc.hypothesis_samples, sc.seed); });
        report.exit_status = report.hypotheses->all_passed() ? 0 : 2;
    } else if (sub == "norm") {
        const Grid& g = prob.grid;
        const auto u = GridFunction::sample(g, [&, e = Expression::parse(opt.u_formula)](const Point& x) { return e(x[0], x[1]); });
        const auto v = GridFunction::sample(g, [&, e = Expression::parse(opt.v_formula)](const Point& x) { return e(x[0], x[1]); });
        auto describe = [](const GridFunction& f, const ExponentField& p, const std::string& formula) {
            const ModularReport m = norm_modular_relation_check(f, p);
            Json j;
            j["formula"] = formula;
            j["exponent"] = p.name();
            j["modular"] = m.modular_value;
            j["luxemburg_norm"] = m.norm_value;
            j["band"] = Json::array({m.relation_band.first, m.relation_band.second});
            j["band_holds"] = m.band_holds;
            j["sobolev_norm"] = sobolev_norm(f, p);
            return j;
        };
        const HolderCheck h = holder_check(u, v, prob.p);
        report.extra["u"] = describe(u, prob.p, opt.u_formula);
        report.extra["v"] = describe(v, prob.q, opt.v_formula);
        report.extra["holder"] = {{"lhs", h.lhs}, {"rhs", h.rhs}, {"holds", h.holds}};
        report.exit_status = 0;
    } else if (sub == "eigen") {
        for (const ExponentField* f : {&prob.p, &prob.q}) {
            auto est = clock.stage("eigen_" + f->name(),
                                   [&] { return minimize_rayleigh(*f, prob.grid, cfg.eigen_restarts, sc.seed); });
            report.eigen_estimates.push_back({f->name(), std::move(est)});
        }
        bool ok = true;
        for (const auto& e : report.eigen_estimates) ok = ok && std::isfinite(e.estimate.value) && e.estimate.value > 0.0;
        report.exit_status = ok ? 0 : 2;
    } else if (sub == "solve") {
        report.hypotheses = clock.stage("hypotheses", [&] { return check_hypotheses(prob, sc.hypothesis_samples, sc.seed); });
        SolutionInventory inv;
        if (opt.theorem == 1) {
            const auto quads = opt.quadrants.empty()
                                   ? std::vector<Quadrant>{Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4}
                                   : parse_quadrants(opt.quadrants);
            inv = clock.stage("descent", [&] { return find_constant_sign_solutions(prob, sc, quads); });
        } else {
            SolverConfig s2 = sc;
            if (!opt.quadrants.empty()) s2.mountain_pass_quadrants = parse_quadrants(opt.quadrants);
            inv = clock.stage("descent_and_mountain_pass", [&] { return find_six_solutions(prob, s2); });
            const auto [h1, h2] = detail::endpoint_tents(prob, s2);
            report.scans.push_back({"endpoint tents", divergence_scan(prob, h1, h2, s2.scan_values())});
        }
        const std::size_t target = opt.theorem == 1 ? 4 : 6;
        report.exit_status = inv.distinct_count >= target && all_admitted(inv) ? 0 : 2;
        write_solutions(inv, dir, report);
        report.inventory = std::move(inv);
    } else if (sub == "scan") {
        const auto [h1, h2] = detail::endpoint_tents(prob, sc);
        const auto t = opt.t_list.empty() ? sc.scan_values() : parse_t_list(opt.t_list);
        report.scans.push_back({"endpoint tents", clock.stage("scan", [&] { return divergence_scan(prob, h1, h2, t); })});
        std::string csv = "t,energy\n";
        char buf[80];
        for (const auto& [tt, e] : report.scans.back().result.rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tt, e);
            csv += buf;
        }
        write_text((dir / "scan.csv").string(), csv);
        report.exit_status = 0;
    } else if (sub == "pairs") {
        report.hypotheses = clock.stage("hypotheses", [&] { return check_hypotheses(prob, sc.hypothesis_samples, sc.seed); });
        const std::size_t k = opt.pairs_k.value_or(cfg.pair_count);
        auto inv = clock.stage("pairs", [&] { return symmetric_pairs(prob, k, sc); });
        report.exit_status = all_admitted(inv) ? 0 : 2;
        write_solutions(inv, dir, report);
        report.inventory = std::move(inv);
    }

    write_text((dir / "results.json").string(), dump_report(report));
    for (const auto& n : report.notices) std::cerr << "notice: " << n << "\n";
    if (report.inventory)
        for (const auto& n : report.inventory->notes) std::cerr << "note: " << n << "\n";
    std::cout << "wrote " << (dir / "results.json").string() << " (exit " << report.exit_status << ")\n";
    return report.exit_status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-exponent elliptic systems: hypothesis checks and critical-point searches"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON configuration file (built-in default problem if omitted)");
    app.add_option("--seed", opt.seed, "overrides solver.seed");
    app.add_flag("--deterministic", opt.deterministic, "omit wall times so reports compare byte for byte");
    app.add_option("--out", opt.out, "output directory")->capture_default_str();

    auto* check = app.add_subcommand("check", "evaluate the seven hypothesis checks");
    auto* norm = app.add_subcommand("norm", "modular, Luxemburg and Sobolev norms of sample fields");
    norm->add_option("--u", opt.u_formula, "formula for u in x, y")->capture_default_str();
    norm->add_option("--v", opt.v_formula, "formula for v in x, y")->capture_default_str();
    auto* eigen = app.add_subcommand("eigen", "Rayleigh quotient estimates for p and q");
    auto* solve = app.add_subcommand("solve", "critical-point search");
    solve->add_option("--theorem", opt.theorem, "1: four negative-energy states, 2: plus two mountain-pass states")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    solve->add_option("--quadrants", opt.quadrants,
                      "comma list; descent quadrants for --theorem 1, mountain-pass quadrants for --theorem 2");
    auto* scan = app.add_subcommand("scan", "energy along t (h1, h2)");
    scan->add_option("--t-list", opt.t_list, "comma list of t values (default 2^0..2^20)");
    auto* pairs = app.add_subcommand("pairs", "multi-bump mountain-pass runs and their negations");
    pairs->add_option("--k", opt.pairs_k, "number of bump sites");
    for (auto* s : {check, norm, eigen, solve, scan, pairs}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
