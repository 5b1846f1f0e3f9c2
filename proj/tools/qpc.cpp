// qpc: batch runner over the library.  Every subcommand writes config.echo and
// report.json into --out; exit 0 when its verdicts pass, 1 when one fails,
// 2 on a bad config, 3 on any other error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qpc/lyapunov.hpp"
#include "qpc/properties.hpp"
#include "qpc/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpc;

namespace {

constexpr int report_version = 1;

struct Options {
    std::string config, out = "qpc-out", snapshot;
    int threads = -1, stages = -1, G = -1, stage = -1, pairs = 50;
    std::int64_t T = -1, qmax = 1000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double lambda = 0;
    std::size_t cases = 10000;
};

ExperimentConfig effective_config(const Options& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.lambda > 0) c.lambda = o.lambda;
    if (o.stages > 0) c.stages = o.stages;
    if (o.T > 0) c.T = o.T;
    if (o.G > 0) c.G = o.G;
    if (o.threads >= 0) c.threads = o.threads;
    if (o.seed_set) c.seed = o.seed;
    c.validate();
    return c;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

json suite_json(const SuiteResult& r) {
    return {{"name", r.name},
            {"cases", r.cases},
            {"violations", r.violations},
            {"rejected", r.rejected},
            {"worst_margin", std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr)},
            {"pass", r.pass()}};
}

json le_json(const LEEstimate& e) {
    json j{{"T", e.T}, {"G", e.G}, {"mean", e.mean}, {"min", e.min}, {"max", e.max}, {"stddev", e.stddev}};
    if (e.nonresonant_count) {
        j["nonresonant_mean"] = e.nonresonant_mean;
        j["nonresonant_count"] = e.nonresonant_count;
    }
    return j;
}

// --- cf ---------------------------------------------------------------------

bool run_cf(const ExperimentConfig& cfg, const Options& o, const fs::path& out, json& rep) {
    const Frequency f = cfg.make_frequency();
    const CriticalGeometry g = cfg.geometry();
    std::ostringstream csv;
    csv << "n,a,p,q,radius,returns,below_half_q,min_ratio,max_ratio\n";
    json rows = json::array();
    bool ok = true;
    for (int n = 1; n <= f.size() && f.q(n) <= o.qmax; ++n) {
        const double rad = g.radius(f.q(n));
        csv << n << "," << f.partial_quotients()[n - 1] << "," << f.p(n) << "," << f.q(n) << "," << num(rad);
        json row{{"n", n}, {"a", f.partial_quotients()[n - 1]}, {"p", f.p(n)}, {"q", f.q(n)}, {"radius", rad}};
        if (rad < 0.25) {
            ReturnFacts rf;
            return_facts(rf, f, g, n, 64);
            ok = ok && rf.bound.pass() && rf.min_ratio > 0 && rf.max_ratio <= 1;
            csv << "," << rf.bound.cases << "," << rf.bound.violations << "," << num(rf.min_ratio) << ","
                << num(rf.max_ratio);
            row["returns"] = suite_json(rf.bound);
            row["min_ratio"] = rf.min_ratio;
            row["max_ratio"] = rf.max_ratio;
        } else {
            csv << ",,,,";
        }
        csv << "\n";
        rows.push_back(row);
    }
    write_text(out / "cf.csv", csv.str());
    rep["rows"] = rows;
    return ok;
}

// --- bumps ------------------------------------------------------------------

bool run_bumps(const ExperimentConfig& cfg, const fs::path& out, json& rep) {
    const std::vector<double> nus{0.3, 0.5, 0.8};
    auto tables = bump_table_suite(nus, 40);
    json env = json::array();
    bool ok = tables.pass();
    for (double nu : nus) {
        auto e = bump_envelope(nu, 30, uniform_grid(0.02, 2.0, 64), uniform_grid(0.02, 2.0, 701));
        ok = ok && e.check.pass();
        env.push_back({{"nu", nu}, {"C", e.C}, {"check", suite_json(e.check)}});
    }
    rep["coefficient_bound"] = suite_json(tables);
    rep["envelope"] = env;

    FlatBump b(cfg.nu, 3);
    std::ostringstream bc;
    bc << "x,f,d1,d2,d3\n";
    for (double x : uniform_grid(0.02, 2.0, 100)) {
        bc << num(x) << "," << num(b.eval(x));
        for (int n = 1; n <= 3; ++n) bc << "," << num(b.derivative(x, n));
        bc << "\n";
    }
    write_text(out / "bump.csv", bc.str());

    const Frequency f = cfg.make_frequency();
    const CriticalGeometry g = cfg.geometry();
    const std::int64_t q = f.q(cfg.N);
    auto pl = plateau(q, g, cfg.plateau_width());
    const double r = g.radius(q);
    std::ostringstream pc;
    pc << "x,plateau\n";
    std::size_t off_one = 0, off_zero = 0;
    for (double x : uniform_grid(g.c1 - 1.5 * r, g.c1 + 1.5 * r, 301)) {
        const double v = pl(x);
        pc << num(x) << "," << num(v) << "\n";
        const double d = std::fabs(x - g.c1);
        if (d <= r / 10 && v != 1.0) off_one++;
        if (d >= r && v != 0.0) off_zero++;
    }
    write_text(out / "plateau.csv", pc.str());
    rep["plateau"] = {{"q", q}, {"radius", r}, {"not_one_inside", off_one}, {"not_zero_outside", off_zero}};
    return ok && off_one == 0 && off_zero == 0;
}

// --- construct --------------------------------------------------------------

bool run_construct(const ExperimentConfig& cfg, const fs::path& out, json& rep) {
    auto run = construct(cfg);
    fs::create_directories(out / "stages");
    bool ok = run.initial_audit.pass();
    rep["initial_audit"] = to_json(run.initial_audit);
    json stages = json::array();
    const CocycleStage* prev = &run.initial;
    for (std::size_t k = 0; k < run.corrected.size(); ++k) {
        const auto& c = run.corrected[k];
        auto conj = verify_conjugation(*prev, c.stage);
        auto al = verify_alignment(c.stage);
        auto dal = verify_alignment(run.degenerate[k]);
        auto col = verify_collapse(c.stage, run.degenerate[k]);
        const bool stage_ok = c.audit.pass() && conj.max_deviation <= cfg.conj_tol && al.inner_ok && al.annulus_ok &&
                              dal.inner_ok && col.holds_misaligned;
        ok = ok && stage_ok;
        json s{{"n", c.stage.n()},
               {"audit", to_json(c.audit)},
               {"residual", c.residual},
               {"max_abs_h", c.max_abs_h},
               {"sup_increment", c.sup_increment},
               {"conjugation", to_json(conj)},
               {"alignment", to_json(al)},
               {"degenerate_alignment", to_json(dal)},
               {"collapse", to_json(col)},
               {"pass", stage_ok}};
        stages.push_back(s);
        const std::string n = std::to_string(c.stage.n());
        write_text(out / "stages" / ("corrected_" + n + ".json"), snapshot(c.stage, {s}).dump(1) + "\n");
        write_text(out / "stages" / ("degenerate_" + n + ".json"), snapshot(run.degenerate[k]).dump(1) + "\n");
        prev = &c.stage;
    }
    rep["stages"] = stages;
    return ok;
}

// --- le ---------------------------------------------------------------------

bool run_le(const ExperimentConfig& cfg, const Options& o, const fs::path& out, json& rep) {
    std::vector<std::pair<std::string, CocycleStage>> todo;
    if (!o.snapshot.empty()) {
        std::ifstream f(o.snapshot);
        if (!f) throw ConfigError("cannot open snapshot '" + o.snapshot + "'");
        json j;
        try {
            j = json::parse(f);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("snapshot: ") + e.what());
        }
        CocycleStage st = restore_stage(j);
        todo.emplace_back(st.degenerate() ? "degenerate" : st.corrected() ? "corrected" : "initial", std::move(st));
    } else {
        auto run = construct(cfg);
        const int n = o.stage >= 0 ? o.stage : cfg.N;
        if (n < cfg.N || n >= cfg.N + cfg.stages)
            throw ConfigError("invalid config:\n  stage: must lie in [" + std::to_string(cfg.N) + ", " +
                              std::to_string(cfg.N + cfg.stages - 1) + "]");
        const auto k = static_cast<std::size_t>(n - cfg.N);
        todo.emplace_back("corrected", run.corrected[k].stage);
        todo.emplace_back("degenerate", run.degenerate[k]);
    }
    json res = json::array();
    std::ostringstream csv;
    csv << "kind,stage,phase,x,le\n";
    bool ok = true;
    for (const auto& [kind, st] : todo) {
        auto e = finite_le(st, cfg.T, cfg.G, 0.0, kind == "corrected");
        ok = ok && std::isfinite(e.mean);
        json j = le_json(e);
        j["kind"] = kind;
        j["stage"] = st.n();
        j["ratio"] = e.mean / st.log_lambda();
        res.push_back(j);
        for (std::size_t k = 0; k < e.values.size(); ++k)
            csv << kind << "," << st.n() << "," << k << "," << num(two_pi * k / cfg.G) << "," << num(e.values[k])
                << "\n";
    }
    write_text(out / "le.csv", csv.str());
    rep["estimates"] = res;
    return ok;
}

// --- gap --------------------------------------------------------------------

std::string gap_svg(const GapReport& g) {
    const double W = 640, H = 400, l = 60, r = 20, t = 30, b = 50;
    std::vector<int> stages;
    for (const auto& row : g.rows)
        if (stages.empty() || stages.back() != row.stage) stages.push_back(row.stage);
    double lo = 1, hi = 0;
    for (const auto& row : g.rows) {
        lo = std::min({lo, row.corrected_ratio, row.degenerate_ratio});
        hi = std::max({hi, row.corrected_ratio, row.degenerate_ratio});
    }
    lo = std::floor(lo * 20 - 1) / 20;
    hi = std::ceil(hi * 20 + 1e-9) / 20;
    auto X = [&](std::size_t i) {
        return stages.size() < 2 ? l + (W - l - r) / 2 : l + (W - l - r) * static_cast<double>(i) / (stages.size() - 1);
    };
    auto Y = [&](double v) { return t + (H - t - b) * (hi - v) / (hi - lo); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << l << "\" y1=\"" << H - b << "\" x2=\"" << W - r << "\" y2=\"" << H - b << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << H - b << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double v = lo + (hi - lo) * k / 4;
        s << "<text x=\"" << l - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << num(std::round(v * 1000) / 1000)
          << "</text>\n";
    }
    for (std::size_t i = 0; i < stages.size(); ++i)
        s << "<text x=\"" << X(i) << "\" y=\"" << H - b + 18 << "\" text-anchor=\"middle\">" << stages[i] << "</text>\n";
    s << "<text x=\"" << (l + W - r) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">stage n</text>\n";
    s << "<text x=\"14\" y=\"" << (t + H - b) / 2 << "\" transform=\"rotate(-90 14 " << (t + H - b) / 2
      << ")\" text-anchor=\"middle\">L_T / ln lambda</text>\n";
    struct Series {
        bool corrected;
        bool doubled;
        const char* colour;
        const char* dash;
    };
    const std::int64_t T = g.rows.empty() ? 0 : g.rows.front().T;
    for (Series se : {Series{true, false, "#1f77b4", ""}, Series{true, true, "#1f77b4", "6,4"},
                      Series{false, false, "#d62728", ""}, Series{false, true, "#d62728", "6,4"}}) {
        s << "<polyline fill=\"none\" stroke=\"" << se.colour << "\" stroke-width=\"2\"";
        if (*se.dash) s << " stroke-dasharray=\"" << se.dash << "\"";
        s << " points=\"";
        std::size_t i = 0;
        for (const auto& row : g.rows) {
            if ((row.T != T) != se.doubled) continue;
            s << X(i++) << "," << Y(se.corrected ? row.corrected_ratio : row.degenerate_ratio) << " ";
        }
        s << "\"/>\n";
    }
    s << "<text x=\"" << W - r << "\" y=\"" << t - 10 << "\" text-anchor=\"end\"><tspan fill=\"#1f77b4\">corrected</tspan>"
      << " / <tspan fill=\"#d62728\">degenerate</tspan>; dashed: 2T</text>\n";
    s << "</svg>\n";
    return s.str();
}

bool run_gap(const ExperimentConfig& cfg, const fs::path& out, json& rep) {
    auto run = construct(cfg);
    auto g = le_gap_experiment(run, cfg.T, cfg.G, 0.95, cfg.delta);
    std::ostringstream csv;
    csv << "stage,T,G,le_corrected,le_degenerate,gap,ratio\n";
    json rows = json::array();
    std::size_t increases = 0;
    for (const auto& r : g.rows) {
        csv << r.stage << "," << r.T << "," << r.G << "," << num(r.le_corrected) << "," << num(r.le_degenerate) << ","
            << num(r.gap) << "," << num(r.ratio) << "\n";
        increases += r.pointwise_increases;
        rows.push_back({{"stage", r.stage},
                        {"T", r.T},
                        {"G", r.G},
                        {"le_corrected", r.le_corrected},
                        {"le_degenerate", r.le_degenerate},
                        {"gap", r.gap},
                        {"ratio", r.ratio},
                        {"corrected_ratio", r.corrected_ratio},
                        {"degenerate_ratio", r.degenerate_ratio},
                        {"nonresonant_corrected", r.nonresonant_corrected},
                        {"pointwise_increases", r.pointwise_increases}});
    }
    write_text(out / "gap.csv", csv.str());
    write_text(out / "gap.svg", gap_svg(g));
    rep["log_lambda"] = g.log_lambda;
    rep["rows"] = rows;
    const bool verdict = g.gap_positive && g.gap_stable && increases == 0;
    rep["verdict_checks"] = {{"gap_positive", g.gap_positive},
                             {"gap_stable", g.gap_stable},
                             {"worst_relative_change_on_doubling", g.worst_stability},
                             {"pointwise_increases", increases}};
    // reported, not part of the exit status
    rep["thresholds"] = {{"floor", g.floor},
                         {"corrected_at_floor", g.corrected_high},
                         {"min_gap", g.min_gap},
                         {"gap_at_min", g.gap_large}};
    return verdict;
}

// --- props ------------------------------------------------------------------

bool run_props(const ExperimentConfig& cfg, const Options& o, json& rep) {
    std::mt19937_64 rng(cfg.seed);
    std::vector<SuiteResult> suites;
    suites.push_back(young_suite(rng, o.cases));
    suites.push_back(cancellation_suite(rng, o.cases));
    suites.push_back(faa_di_bruno_suite(rng, std::min<std::size_t>(o.cases, 1000)));
    suites.push_back(partition_suite());
    suites.push_back(bump_table_suite({0.3, 0.5, 0.8}, 40));
    auto alg = algebra_battery(rng, o.pairs, {2.2, 2.5, 3.0});
    suites.push_back(alg.stated);
    ReturnFacts rf;
    const CriticalGeometry g = cfg.geometry();
    const Frequency f = cfg.make_frequency();
    for (int n = 1; n <= f.size() && f.q(n) <= o.qmax; ++n)
        if (g.radius(f.q(n)) < 0.25) return_facts(rf, f, g, n, 64);
    suites.push_back(rf.bound);

    json js = json::array();
    bool ok = true;
    for (const auto& s : suites) {
        js.push_back(suite_json(s));
        ok = ok && s.pass();
    }
    rep["suites"] = js;
    rep["companion"] = suite_json(alg.companion);
    rep["algebra_failing"] = alg.failing;
    rep["return_ratio"] = {{"min", rf.min_ratio}, {"max", rf.max_ratio}};
    return ok && rf.min_ratio > 0 && rf.max_ratio <= 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-periodic cocycle experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "key = value config file");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--threads", o.threads, "thread cap (0 = hardware)");
    app.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { o.seed = s, o.seed_set = true; }, "seed for randomized suites");
    app.add_option("--lambda", o.lambda, "coupling lambda");
    app.add_option("--stages", o.stages, "number of corrected stages");
    app.add_option("--T", o.T, "orbit length for Lyapunov estimates");
    app.add_option("--G", o.G, "phase grid size");

    auto* cf = app.add_subcommand("cf", "convergents and return-time tables");
    cf->add_option("--qmax", o.qmax, "largest q_n tabulated");
    app.add_subcommand("bumps", "bump and plateau tables, derivative bounds");
    app.add_subcommand("construct", "build stages, write audits and snapshots");
    auto* le = app.add_subcommand("le", "finite Lyapunov exponent of a stage");
    le->add_option("--stage", o.stage, "stage n (default N)");
    le->add_option("--snapshot", o.snapshot, "stage snapshot written by construct");
    app.add_subcommand("gap", "corrected vs degenerate Lyapunov gap, CSV and SVG");
    auto* props = app.add_subcommand("props", "randomized property suites");
    props->add_option("--cases", o.cases, "cases per randomized suite");
    props->add_option("--pairs", o.pairs, "function pairs in the algebra battery");
    props->add_option("--qmax", o.qmax, "largest q_n for return checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        cfg = effective_config(o);
    } catch (const ConfigError& e) {
        std::cerr << "qpc: " << e.what() << "\n";
        return 2;
    }

    try {
        const fs::path out(o.out);
        fs::create_directories(out);
        write_text(out / "config.echo", config_echo(cfg));
        json rep{{"schema", "qpc-report"}, {"version", report_version}, {"command", cmd}};
        bool ok = false;
        if (cmd == "cf") ok = run_cf(cfg, o, out, rep);
        else if (cmd == "bumps") ok = run_bumps(cfg, out, rep);
        else if (cmd == "construct") ok = run_construct(cfg, out, rep);
        else if (cmd == "le") ok = run_le(cfg, o, out, rep);
        else if (cmd == "gap") ok = run_gap(cfg, out, rep);
        else ok = run_props(cfg, o, rep);
        rep["verdict"] = ok;
        write_text(out / "report.json", rep.dump(1) + "\n");
        std::cout << cmd << ": " << (ok ? "pass" : "FAIL") << " (" << (out / "report.json").string() << ")\n";
        return ok ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "qpc: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qpc: " << e.what() << "\n";
        return 3;
    }
}
