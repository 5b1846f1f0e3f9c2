#pragma once

// Experiment parameters.  Plain key = value text, '#' starts a comment,
// every key has a default.  Validation reports every bad field at once.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "arithmetic.hpp"
#include "errors.hpp"

namespace qpc {

struct ExperimentConfig {
    // cocycle
    double lambda = 1e6;
    double c = 9e-4;         // amplitude of the sample angle, 0 < c < 1/1000
    double c1 = 0.5;
    double nu = 0.5;
    double beta = 1.2;
    std::string frequency = "golden";  // golden | silver | comma separated partial quotients
    int frequency_terms = 60;

    // proof parameters at desk scale
    double epsilon = 0.45;   // hyperbolicity slack for the stage audits
    double delta = 0.03;     // required normalized gap
    int M = 2;
    double coeff = 0.1;      // schedule increment coefficient
    double plateau_delta = 0;  // 0 -> (1/nu - beta)/2

    // stages
    int N = 6;
    int stages = 3;

    // grids and caps
    int cheb_nodes = 65;
    int verify_grid = 64;
    int ratio_grid = 64;
    std::int64_t return_cap = 0;  // 0 -> q^4

    // tolerances
    double interp_tol = 1e-8;
    double conj_tol = 1e-8;
    double align_tol = 1e-6;

    // Lyapunov runs
    std::int64_t T = 10000;
    int G = 512;

    std::uint64_t seed = 42;
    int threads = 1;

    double log_lambda() const { return std::log(lambda); }
    double gamma() const { return nu * beta; }
    double plateau_width() const { return plateau_delta > 0 ? plateau_delta : 0.5 * (1.0 / nu - beta); }
    CriticalGeometry geometry() const { return CriticalGeometry{c1, beta}; }

    Frequency make_frequency() const {
        if (frequency == "golden") return Frequency::golden(frequency_terms);
        if (frequency == "silver") return Frequency::silver(frequency_terms);
        std::vector<int> a;
        std::stringstream ss(frequency);
        std::string tok;
        while (std::getline(ss, tok, ',')) a.push_back(std::stoi(tok));
        return Frequency(a);
    }

    // Throws ConfigError listing every offending field.
    void validate() const {
        std::vector<std::string> bad;
        auto need = [&](bool ok, const std::string& msg) {
            if (!ok) bad.push_back(msg);
        };
        need(lambda > 1.0 && std::isfinite(lambda), "lambda: must be a finite number > 1");
        need(c > 0.0 && c < 1e-3, "c: must lie in (0, 1/1000)");
        need(c1 >= 0.0 && c1 < pi, "c1: must lie in [0, pi)");
        need(nu > 0.0 && nu < 1.0, "nu: must lie in (0, 1)");
        need(beta > 1.0, "beta: must be > 1");
        need(nu > 0.0 && beta < 1.0 / nu, "beta: must be < 1/nu");
        need(epsilon > 0.0 && epsilon < 1.0, "epsilon: must lie in (0, 1)");
        need(delta > 0.0 && delta < 1.0, "delta: must lie in (0, 1)");
        need(M >= 2, "M: must be >= 2");
        need(coeff >= 0.0, "coeff: must be >= 0");
        need(plateau_delta >= 0.0, "plateau_delta: must be >= 0 (0 selects the default)");
        need(stages >= 1, "stages: must be >= 1");
        need(cheb_nodes >= 4 && cheb_nodes <= 1025, "cheb_nodes: must lie in [4, 1025]");
        need(verify_grid >= 1, "verify_grid: must be >= 1");
        need(ratio_grid >= 64, "ratio_grid: must be >= 64");
        need(return_cap >= 0, "return_cap: must be >= 0");
        need(interp_tol > 0 && conj_tol > 0 && align_tol > 0, "tolerances: must be positive");
        need(T >= 1, "T: must be >= 1");
        need(G >= 1, "G: must be >= 1");
        need(threads >= 0, "threads: must be >= 0");
        need(frequency_terms >= 2 && frequency_terms <= 80, "frequency_terms: must lie in [2, 80]");
        try {
            Frequency f = make_frequency();
            need(N >= 1 && N + stages <= f.size(), "N: stages N..N+stages-1 must be within the frequency expansion");
            if (N >= 1 && N <= f.size()) need(geometry().radius(f.q(N)) < 0.25, "N: q_N^-beta must be < 1/4");
        } catch (const std::exception& e) {
            bad.push_back(std::string("frequency: ") + e.what());
        }
        if (!bad.empty()) {
            std::string msg = "invalid config:";
            for (auto& b : bad) msg += "\n  " + b;
            throw ConfigError(msg);
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (is.fail() || !is.eof()) throw ConfigError("invalid config:\n  " + key + ": cannot parse '" + v + "'");
    return out;
}

}  // namespace detail

// Applies one key = value pair.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_number;
    const std::map<std::string, double*> reals{
        {"lambda", &c.lambda},       {"c", &c.c},
        {"c1", &c.c1},               {"nu", &c.nu},
        {"beta", &c.beta},           {"epsilon", &c.epsilon},
        {"delta", &c.delta},         {"coeff", &c.coeff},
        {"plateau_delta", &c.plateau_delta}, {"interp_tol", &c.interp_tol},
        {"conj_tol", &c.conj_tol},   {"align_tol", &c.align_tol}};
    const std::map<std::string, int*> ints{{"M", &c.M},
                                           {"N", &c.N},
                                           {"stages", &c.stages},
                                           {"cheb_nodes", &c.cheb_nodes},
                                           {"verify_grid", &c.verify_grid},
                                           {"ratio_grid", &c.ratio_grid},
                                           {"G", &c.G},
                                           {"threads", &c.threads},
                                           {"frequency_terms", &c.frequency_terms}};
    if (auto it = reals.find(key); it != reals.end()) {
        *it->second = parse_number<double>(key, value);
    } else if (auto jt = ints.find(key); jt != ints.end()) {
        *jt->second = parse_number<int>(key, value);
    } else if (key == "T") {
        c.T = parse_number<std::int64_t>(key, value);
    } else if (key == "return_cap") {
        c.return_cap = parse_number<std::int64_t>(key, value);
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "frequency") {
        c.frequency = value;
    } else {
        throw ConfigError("invalid config:\n  " + key + ": unknown key");
    }
}

inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("invalid config:\n  line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

// Effective configuration, one key per line, round-trips through parse_config.
inline std::string config_echo(const ExperimentConfig& c) {
    std::ostringstream o;
    o << std::setprecision(17);
    o << "lambda = " << c.lambda << "\n"
      << "c = " << c.c << "\n"
      << "c1 = " << c.c1 << "\n"
      << "nu = " << c.nu << "\n"
      << "beta = " << c.beta << "\n"
      << "frequency = " << c.frequency << "\n"
      << "frequency_terms = " << c.frequency_terms << "\n"
      << "epsilon = " << c.epsilon << "\n"
      << "delta = " << c.delta << "\n"
      << "M = " << c.M << "\n"
      << "coeff = " << c.coeff << "\n"
      << "plateau_delta = " << c.plateau_delta << "\n"
      << "N = " << c.N << "\n"
      << "stages = " << c.stages << "\n"
      << "cheb_nodes = " << c.cheb_nodes << "\n"
      << "verify_grid = " << c.verify_grid << "\n"
      << "ratio_grid = " << c.ratio_grid << "\n"
      << "return_cap = " << c.return_cap << "\n"
      << "interp_tol = " << c.interp_tol << "\n"
      << "conj_tol = " << c.conj_tol << "\n"
      << "align_tol = " << c.align_tol << "\n"
      << "T = " << c.T << "\n"
      << "G = " << c.G << "\n"
      << "seed = " << c.seed << "\n"
      << "threads = " << c.threads << "\n";
    return o.str();
}

}  // namespace qpc
