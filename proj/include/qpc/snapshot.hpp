#pragma once

// JSON snapshots of built stages, enough to rebuild them without redoing the
// return-block sweeps.  Also the JSON views of the audit reports.

#include <json.hpp>

#include <string>

#include "construction.hpp"

namespace qpc {

inline constexpr int snapshot_version = 1;

inline nlohmann::json to_json(const HyperbolicityReport& h) {
    return {{"verdict", h.verdict},
            {"mu", h.mu},
            {"epsilon", h.epsilon},
            {"min_margin", h.min_margin},
            {"failing_prefix", h.failing_prefix}};
}

inline nlohmann::json to_json(const StageAudit& a) {
    return {{"n", a.n},
            {"q", a.q},
            {"points", a.points},
            {"failures", a.failures},
            {"pass", a.pass()},
            {"min_margin", a.min_margin},
            {"worst_x", a.worst_x},
            {"min_rate_ratio", a.min_rate_ratio},
            {"required_epsilon", a.required_epsilon},
            {"min_return", a.min_r},
            {"max_return", a.max_r}};
}

inline nlohmann::json to_json(const ConjugationReport& r) {
    return {{"points", r.points},
            {"max_log_sigma_dev", r.max_log_sigma_dev},
            {"max_direction_dev", r.max_direction_dev},
            {"max_deviation", r.max_deviation}};
}

inline nlohmann::json to_json(const AlignmentReport& r) {
    return {{"n", r.n},
            {"inner_points", r.inner_points},
            {"annulus_points", r.annulus_points},
            {"inner_residual", r.inner_residual},
            {"inner_relative", r.inner_relative},
            {"annulus_margin", r.annulus_margin},
            {"inner_ok", r.inner_ok},
            {"annulus_ok", r.annulus_ok}};
}

inline nlohmann::json to_json(const CollapseReport& r) {
    return {{"points", r.points},
            {"min_margin", r.min_margin},
            {"min_margin_misaligned", r.min_margin_misaligned},
            {"min_drop", r.min_drop},
            {"max_drop", r.max_drop},
            {"max_log_alignment", r.max_log_alignment},
            {"holds", r.holds},
            {"holds_misaligned", r.holds_misaligned}};
}

inline nlohmann::json to_json(const StageCorrection& c) {
    nlohmann::json rem = nlohmann::json::array();
    if (c.kind == StageCorrection::Kind::aligned)
        for (const auto& s : c.remainder) rem.push_back({{"lo", s.lo()}, {"hi", s.hi()}, {"coefficients", s.coefficients()}});
    return {{"n", c.n},
            {"q", c.q},
            {"kind", c.kind == StageCorrection::Kind::aligned ? "aligned" : "degenerate"},
            {"radius", c.radius},
            {"plateau_delta", c.plateau_delta},
            {"residual", c.residual},
            {"remainder", rem}};
}

// Stage snapshot: the effective config plus the ordered corrections.
inline nlohmann::json snapshot(const CocycleStage& st, const std::vector<nlohmann::json>& audits = {}) {
    nlohmann::json corr = nlohmann::json::array();
    for (const auto& c : st.phi().corrections()) corr.push_back(to_json(c));
    nlohmann::json j{{"format", "qpc-stage"},
                     {"version", snapshot_version},
                     {"stage", st.n()},
                     {"config", config_echo(st.context().config)},
                     {"corrections", corr}};
    if (!audits.empty()) j["audits"] = audits;
    return j;
}

inline CocycleStage restore_stage(const nlohmann::json& j) {
    if (j.value("format", "") != "qpc-stage") throw ConfigError("snapshot: not a stage snapshot");
    if (j.value("version", -1) != snapshot_version)
        throw ConfigError("snapshot: unsupported version " + std::to_string(j.value("version", -1)));
    ExperimentConfig cfg = parse_config(j.at("config").get<std::string>());
    cfg.validate();
    auto ctx = std::make_shared<const ConstructionContext>(cfg);
    AngleFunction phi(ctx->phi0);
    for (const auto& e : j.at("corrections")) {
        StageCorrection c;
        c.kind = e.at("kind") == "aligned" ? StageCorrection::Kind::aligned : StageCorrection::Kind::degenerate;
        c.n = e.at("n");
        c.q = e.at("q");
        c.geom = ctx->geom;
        c.radius = e.at("radius");
        c.plateau_delta = e.at("plateau_delta");
        c.plateau = plateau(c.q, ctx->geom, c.plateau_delta);
        c.residual = e.at("residual");
        if (c.kind == StageCorrection::Kind::aligned) {
            const auto& rem = e.at("remainder");
            if (rem.size() != 2) throw ConfigError("snapshot: aligned correction needs two remainder series");
            for (int i = 0; i < 2; ++i)
                c.remainder[i] = ChebyshevSeries(rem[i].at("lo"), rem[i].at("hi"),
                                                 rem[i].at("coefficients").get<std::vector<double>>());
        }
        phi = phi.with(std::move(c));
    }
    return CocycleStage(ctx, j.at("stage").get<int>(), std::move(phi));
}

}  // namespace qpc
