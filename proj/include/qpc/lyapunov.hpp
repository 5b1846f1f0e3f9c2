#pragma once

// Finite Lyapunov exponents (1/T) ln|A_T(x)| averaged over a uniform phase
// grid, and the corrected-versus-degenerate gap experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "arithmetic.hpp"
#include "construction.hpp"
#include "parallel.hpp"
#include "sl2.hpp"

namespace qpc {

struct LEEstimate {
    std::int64_t T = 0;
    int G = 0;
    double offset = 0;
    double mean = 0;
    double min = 0, max = 0, stddev = 0;
    double nonresonant_mean = std::numeric_limits<double>::quiet_NaN();
    std::size_t nonresonant_count = 0;
    std::vector<double> values;  // per phase, grid order
};

using CocycleFn = std::function<LogPolarSL2(double)>;

// (1/T) ln|A(T^{T-1} x) ... A(x)|
inline double pointwise_le(const CocycleFn& A, const Frequency& f, double x, std::int64_t T) {
    if (T < 1) throw PreconditionFailed("pointwise_le: T must be >= 1");
    LogPolarSL2 acc;
    OrbitWalker w(x, f);
    for (std::int64_t i = 0; i < T; ++i, w.forward()) acc = compose(A(w.point()), acc);
    return acc.log_sigma / static_cast<double>(T);
}

// Phases x_k = offset + 2 pi k / G.  `keep`, when given, selects the phases of the
// restricted mean (nonresonant ones in the experiments).
inline LEEstimate finite_le(const CocycleFn& A, const Frequency& f, std::int64_t T, int G, int threads = 1,
                            double offset = 0.0, const std::function<bool(double)>& keep = {}) {
    if (T < 1 || G < 1) throw PreconditionFailed("finite_le: need T >= 1 and G >= 1");
    LEEstimate e;
    e.T = T;
    e.G = G;
    e.offset = offset;
    auto phase = [&](std::size_t k) { return wrap_2pi(offset + two_pi * static_cast<double>(k) / G); };
    e.values = parallel_map(static_cast<std::size_t>(G), threads,
                            [&](std::size_t k) { return pointwise_le(A, f, phase(k), T); });
    e.mean = pairwise_sum(e.values) / G;
    e.min = *std::min_element(e.values.begin(), e.values.end());
    e.max = *std::max_element(e.values.begin(), e.values.end());
    std::vector<double> sq(e.values.size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = (e.values[k] - e.mean) * (e.values[k] - e.mean);
    e.stddev = std::sqrt(pairwise_sum(sq) / G);
    if (keep) {
        std::vector<double> kept;
        for (std::size_t k = 0; k < e.values.size(); ++k)
            if (keep(phase(k))) kept.push_back(e.values[k]);
        e.nonresonant_count = kept.size();
        if (!kept.empty()) e.nonresonant_mean = pairwise_sum(kept) / static_cast<double>(kept.size());
    }
    return e;
}

inline CocycleFn cocycle_of(const CocycleStage& st) {
    return [&st](double x) { return st.factor(x); };
}

inline LEEstimate finite_le(const CocycleStage& st, std::int64_t T, int G, double offset = 0.0, bool restrict = false) {
    const auto& ctx = st.context();
    std::function<bool(double)> keep;
    if (restrict) keep = [&](double x) { return is_nonresonant(x, st.n(), ctx.config.N, ctx.freq, ctx.geom); };
    return finite_le(cocycle_of(st), ctx.freq, T, G, ctx.config.threads, offset, keep);
}

// Doubling check: mean_{2T} <= mean_T + tol for T = T0, 2 T0, ...
struct SubadditivityReport {
    std::vector<std::int64_t> Ts;
    std::vector<double> means;
    double worst_excess = -std::numeric_limits<double>::infinity();  // max(mean_{2T} - mean_T)
    bool holds = true;
};

inline SubadditivityReport subadditivity_check(const CocycleFn& A, const Frequency& f, std::int64_t T0, int doublings,
                                               int G, int threads = 1, double tol = 1e-9) {
    SubadditivityReport r;
    std::int64_t T = T0;
    for (int k = 0; k <= doublings; ++k, T *= 2) {
        r.Ts.push_back(T);
        r.means.push_back(finite_le(A, f, T, G, threads).mean);
    }
    for (std::size_t k = 1; k < r.means.size(); ++k) {
        double ex = r.means[k] - r.means[k - 1];
        r.worst_excess = std::max(r.worst_excess, ex);
        if (ex > tol) r.holds = false;
    }
    return r;
}

struct GapRow {
    int stage = 0;
    std::int64_t T = 0;
    int G = 0;
    double le_corrected = 0;
    double le_degenerate = 0;
    double gap = 0;
    double ratio = 0;              // gap / ln lambda
    double corrected_ratio = 0;    // le_corrected / ln lambda
    double degenerate_ratio = 0;   // le_degenerate / ln lambda
    double nonresonant_corrected = 0;
    std::size_t pointwise_increases = 0;  // phases with L(A~) > L(A) + 1e-12
};

struct GapReport {
    double log_lambda = 0;
    double floor = 0.95;
    double min_gap = 0.03;
    double stability = 0.2;
    std::vector<GapRow> rows;       // stage-major, T then 2T
    bool corrected_high = true;     // every L_T(A_n)/ln lambda >= floor
    bool gap_positive = true;       // every gap > 0
    bool gap_large = true;          // every degenerate ratio <= corrected ratio - min_gap
    bool gap_stable = true;         // |gap_2T - gap_T| <= stability |gap_T|
    double worst_stability = 0;
    bool verdict() const { return corrected_high && gap_large && gap_stable; }
};

inline GapRow gap_row(const CocycleStage& corr, const CocycleStage& deg, std::int64_t T, int G) {
    const auto& ctx = corr.context();
    GapRow r;
    r.stage = corr.n();
    r.T = T;
    r.G = G;
    auto a = finite_le(corr, T, G, 0.0, true);
    auto b = finite_le(deg, T, G);
    r.le_corrected = a.mean;
    r.le_degenerate = b.mean;
    r.gap = a.mean - b.mean;
    const double ll = ctx.config.log_lambda();
    r.ratio = r.gap / ll;
    r.corrected_ratio = a.mean / ll;
    r.degenerate_ratio = b.mean / ll;
    r.nonresonant_corrected = a.nonresonant_mean;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        if (b.values[k] > a.values[k] + 1e-12) r.pointwise_increases++;
    return r;
}

inline GapReport le_gap_experiment(const Construction& run, std::int64_t T, int G, double floor = 0.95,
                                   double min_gap = 0.03, double stability = 0.2) {
    GapReport rep;
    rep.log_lambda = run.initial.log_lambda();
    rep.floor = floor;
    rep.min_gap = min_gap;
    rep.stability = stability;
    for (std::size_t k = 0; k < run.corrected.size(); ++k) {
        const auto& corr = run.corrected[k].stage;
        const auto& deg = run.degenerate[k];
        GapRow r1 = gap_row(corr, deg, T, G);
        GapRow r2 = gap_row(corr, deg, 2 * T, G);
        for (const auto& r : {r1, r2}) {
            if (r.corrected_ratio < floor) rep.corrected_high = false;
            if (!(r.gap > 0)) rep.gap_positive = false;
            if (r.degenerate_ratio > r.corrected_ratio - min_gap) rep.gap_large = false;
            rep.rows.push_back(r);
        }
        double rel = r1.gap != 0 ? std::fabs(r2.gap - r1.gap) / std::fabs(r1.gap) : INFINITY;
        rep.worst_stability = std::max(rep.worst_stability, rel);
        if (!(rel <= stability)) rep.gap_stable = false;
    }
    return rep;
}

// Gap among phases whose first `window` orbit points avoid I_n/10, and among the rest.
struct LocalizedGap {
    std::int64_t window = 0;
    std::size_t avoiding = 0, visiting = 0;
    double gap_avoiding = 0, gap_visiting = 0;
};

inline LocalizedGap localized_gap(const CocycleStage& corr, const CocycleStage& deg, std::int64_t window, int G) {
    const auto& ctx = corr.context();
    const double r10 = ctx.geom.radius(ctx.freq.q(corr.n()), 10.0);
    struct Row {
        bool visits;
        double gap;
    };
    auto rows = parallel_map(static_cast<std::size_t>(G), ctx.config.threads, [&](std::size_t k) {
        double x = two_pi * static_cast<double>(k) / G;
        bool v = false;
        OrbitWalker w(x, ctx.freq);
        for (std::int64_t i = 0; i < window && !v; ++i, w.forward()) v = ctx.geom.dist(w.point()) <= r10;
        double g = pointwise_le(cocycle_of(corr), ctx.freq, x, window) - pointwise_le(cocycle_of(deg), ctx.freq, x, window);
        return Row{v, g};
    });
    LocalizedGap out;
    out.window = window;
    std::vector<double> av, vi;
    for (const auto& r : rows) (r.visits ? vi : av).push_back(r.gap);
    out.avoiding = av.size();
    out.visiting = vi.size();
    out.gap_avoiding = av.empty() ? 0.0 : pairwise_sum(av) / static_cast<double>(av.size());
    out.gap_visiting = vi.empty() ? 0.0 : pairwise_sum(vi) / static_cast<double>(vi.size());
    return out;
}

// Growth along the ladder of visits to I_N of a nonresonant orbit.
struct GrowthReport {
    std::vector<std::int64_t> ladder;      // j_0 < j_1 < ...
    std::vector<double> angles;            // angle between u(A^{j_i}(x)) and s of the next block
    std::vector<double> margins;           // ln|A^{j_i}(x)| - (1 - 2 eps) j_i ln lambda
    double min_margin = std::numeric_limits<double>::infinity();
    double final_margin = 0;
    std::int64_t j0 = 0, js = 0;
};

inline GrowthReport nonresonant_growth_check(const CocycleStage& st, double x, std::int64_t T) {
    const auto& ctx = st.context();
    const int N = ctx.config.N;
    if (!is_nonresonant(x, st.n(), N, ctx.freq, ctx.geom))
        throw PreconditionFailed("nonresonant_growth_check: x is resonant");
    const double rI = ctx.geom.radius(ctx.freq.q(N));
    const double rate = (1.0 - 2.0 * ctx.config.epsilon) * st.log_lambda();
    GrowthReport g;
    LogPolarSL2 acc;
    std::vector<LogPolarSL2> prefix;
    OrbitWalker w(x, ctx.freq);
    std::int64_t last = 0;
    LogPolarSL2 at_last;
    for (std::int64_t j = 0; j <= T; ++j, w.forward()) {
        bool in = ctx.geom.dist(w.point()) <= rI;
        if (j > 0 && (in || j == T)) {
            if (!g.ladder.empty()) {
                // block from the previous visit to this one
                LogPolarSL2 blk = st.product(orbit_point(x, ctx.freq, last), j - last);
                g.angles.push_back(proj_dist(at_last.u, blk.s));
            }
            g.ladder.push_back(j);
            double m = acc.log_sigma - rate * static_cast<double>(j);
            g.margins.push_back(m);
            g.min_margin = std::min(g.min_margin, m);
            last = j;
            at_last = acc;
        }
        if (j < T) acc = compose(st.factor(w.point()), acc);
    }
    g.j0 = g.ladder.empty() ? 0 : g.ladder.front();
    g.js = g.ladder.empty() ? 0 : g.ladder.back();
    g.final_margin = g.margins.empty() ? 0.0 : g.margins.back();
    return g;
}

// ln|A~^{n_j}(x)| <= (1 - rho) ln|A^{n_j}(x)| along returns n_j of x to I_n/10.
struct UpperReport {
    double rho = 0;
    std::vector<std::int64_t> ladder;
    std::vector<double> log_degenerate, log_reference, margins;
    double min_margin = std::numeric_limits<double>::infinity();
    bool holds = true;
};

inline UpperReport degenerate_upper_check(const CocycleStage& deg, const CocycleStage& reference, double x, int k,
                                          double rho) {
    const auto& ctx = deg.context();
    const std::int64_t q = ctx.freq.q(deg.n());
    if (!ctx.geom.contains(x, q, 10.0)) throw PreconditionFailed("degenerate_upper_check: x is not in I_n/10");
    UpperReport u;
    u.rho = rho;
    std::int64_t t = 0;
    double y = x;
    for (int j = 0; j < k; ++j) {
        t += first_return(y, ctx.freq, ctx.geom, q, Dir::forward, ctx.cap(q), 10.0);
        y = orbit_point(x, ctx.freq, t);
        u.ladder.push_back(t);
    }
    // one extra factor so the junction at the last return is included
    for (std::int64_t n : u.ladder) {
        double ld = deg.product(x, n + 1).log_sigma;
        double lr = reference.product(x, n + 1).log_sigma;
        double m = (1.0 - rho) * lr - ld;
        u.log_degenerate.push_back(ld);
        u.log_reference.push_back(lr);
        u.margins.push_back(m);
        u.min_margin = std::min(u.min_margin, m);
    }
    u.holds = !(u.min_margin < 0.0);
    return u;
}

}  // namespace qpc
