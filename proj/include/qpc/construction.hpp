#pragma once

// Stage-by-stage construction of the cocycle angles.
//
//   A_n(x) = Lambda R_{pi/2 - phi_n(x)},  phi_n = phi_{n-1} + e^_n,  e^_n = e_n f_n
//
// At x in I_n the forward return block P+ = A^{r+}(x) and the backward block
// P- = A^{-r-}(x) have contracted directions s_n, s'_n.  Right-multiplying
// the first factor by R_{-e^} moves s_n by +e^ and leaves s'_n alone, so
// e_n = phi_0 - (s_n - s'_n) of the previous stage aligns s_n - s'_n with
// phi_0.  Only the smooth remainder h = s_n - s'_n - phi_{n-1} is
// interpolated; e_n = phi_0 - phi_{n-1} - h is assembled pointwise.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "angles.hpp"
#include "arithmetic.hpp"
#include "chebyshev.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "gevrey.hpp"
#include "parallel.hpp"
#include "sl2.hpp"
#include "smooth_function.hpp"

namespace qpc {

struct StageCorrection {
    enum class Kind { aligned, degenerate };

    Kind kind = Kind::aligned;
    int n = 0;
    std::int64_t q = 1;
    CriticalGeometry geom;
    double radius = 0;
    double plateau_delta = 0.4;
    SmoothFunction plateau;                      // f_n
    std::array<ChebyshevSeries, 2> remainder;    // h on each component of I_n (aligned only)
    double residual = 0;                         // relative midpoint residual of h
    double leak = 0;                             // value outside I_n; nonzero only in negative controls

    // Component of I_n containing x and x moved into [c_i - r, c_i + r]; -1 outside.
    int locate(double x, double& local) const {
        for (int i = 0; i < 2; ++i) {
            double c = geom.center(i);
            double d = std::remainder(x - c, two_pi);
            if (std::fabs(d) <= radius) {
                local = c + d;
                return i;
            }
        }
        return -1;
    }

    // e^_n(x) given phi_0(x) and phi_{n-1}(x)
    double eval(double x, double phi0, double prev) const {
        double xl;
        int comp = locate(x, xl);
        if (comp < 0) return leak;
        double f = plateau(xl);
        if (f == 0.0) return 0.0;
        if (kind == Kind::degenerate) return -phi0 * f;
        return (phi0 - prev - remainder[comp](xl)) * f;
    }

    Jet jet(double x0, int K, Side side, const Jet& phi0, const Jet& prev) const {
        double xl;
        int comp = locate(x0, xl);
        if (comp < 0) return Jet::constant(x0, K, leak);
        Jet f = plateau.jet(xl, K, side);
        f.x0 = x0;
        if (kind == Kind::degenerate) return jet_scale(jet_mul(phi0, f), -1.0);
        Jet h = remainder[comp].jet(xl, K);
        h.x0 = x0;
        return jet_mul(jet_sub(jet_sub(phi0, prev), h), f);
    }
};

// phi_0 plus the ordered stage corrections.
class AngleFunction {
public:
    AngleFunction() = default;
    explicit AngleFunction(SmoothFunction base) : base_(std::move(base)) {}

    const SmoothFunction& base() const { return base_; }
    const std::vector<StageCorrection>& corrections() const { return corr_; }
    bool degenerate() const { return !corr_.empty() && corr_.back().kind == StageCorrection::Kind::degenerate; }

    AngleFunction with(StageCorrection c) const {
        AngleFunction out = *this;
        out.corr_.push_back(std::move(c));
        return out;
    }

    double operator()(double x) const {
        double p0 = base_(x), v = p0;
        for (const auto& c : corr_) v += c.eval(x, p0, v);
        return v;
    }

    // Value of the last correction at x.
    double last_increment(double x) const {
        if (corr_.empty()) return 0.0;
        double p0 = base_(x), v = p0, inc = 0;
        for (const auto& c : corr_) {
            inc = c.eval(x, p0, v);
            v += inc;
        }
        return inc;
    }

    Jet jet(double x0, int K, Side side = Side::none) const {
        Jet p0 = base_.jet(x0, K, side), v = p0;
        for (const auto& c : corr_) v = jet_add(v, c.jet(x0, K, side, p0, v));
        return v;
    }

    SmoothFunction as_function() const;

private:
    SmoothFunction base_;
    std::vector<StageCorrection> corr_;
};

namespace nodes {
struct Angle : FunctionNode {
    AngleFunction a;
    explicit Angle(AngleFunction f) : a(std::move(f)) {}
    double eval(double x) const override { return a(x); }
    Jet jet(double x0, int K, Side s) const override { return a.jet(x0, K, s); }
    std::string describe() const override {
        return "angle(" + a.base().describe() + " + " + std::to_string(a.corrections().size()) + " corrections)";
    }
};
}  // namespace nodes

inline SmoothFunction AngleFunction::as_function() const { return SmoothFunction(std::make_shared<nodes::Angle>(*this)); }

// Shared, immutable data of one experiment.
struct ConstructionContext {
    ExperimentConfig config;
    Frequency freq;
    CriticalGeometry geom;
    LambdaSchedule schedule;
    SmoothFunction phi0;

    explicit ConstructionContext(const ExperimentConfig& c)
        : config(c),
          freq(c.make_frequency()),
          geom(c.geometry()),
          schedule(lambda_schedule(c.log_lambda(), c.epsilon, c.gamma(), c.coeff, freq, c.N, c.stages + 1)),
          phi0(sample_angle(c.c, c.c1, c.nu)) {}

    std::int64_t cap(std::int64_t q) const { return config.return_cap > 0 ? config.return_cap : default_return_cap(q); }
    // mu for the stage-n block audit
    double log_mu(int n) const { return schedule.at(std::max(n, schedule.N)); }
};

class CocycleStage {
public:
    CocycleStage(std::shared_ptr<const ConstructionContext> ctx, int n, AngleFunction phi)
        : ctx_(std::move(ctx)), n_(n), phi_(std::move(phi)) {}

    int n() const { return n_; }
    const ConstructionContext& context() const { return *ctx_; }
    std::shared_ptr<const ConstructionContext> context_ptr() const { return ctx_; }
    const AngleFunction& phi() const { return phi_; }
    bool degenerate() const { return phi_.degenerate(); }
    bool corrected() const { return !phi_.corrections().empty(); }
    double log_lambda() const { return ctx_->config.log_lambda(); }

    LogPolarSL2 factor(double x) const { return LogPolarSL2::hyperbolic(log_lambda(), phi_(x)); }

    // A(T^{count-1} x) ... A(x)
    LogPolarSL2 product(double x, std::int64_t count) const {
        LogPolarSL2 acc;
        OrbitWalker w(x, ctx_->freq);
        for (std::int64_t i = 0; i < count; ++i, w.forward()) acc = compose(factor(w.point()), acc);
        return acc;
    }

    std::vector<LogPolarSL2> factors(double x, std::int64_t count) const {
        std::vector<LogPolarSL2> out;
        out.reserve(static_cast<std::size_t>(count));
        OrbitWalker w(x, ctx_->freq);
        for (std::int64_t i = 0; i < count; ++i, w.forward()) out.push_back(factor(w.point()));
        return out;
    }

private:
    std::shared_ptr<const ConstructionContext> ctx_;
    int n_;
    AngleFunction phi_;
};

struct ReturnBlockData {
    double x = 0;
    std::int64_t r_plus = 0, r_minus = 0;
    LogPolarSL2 forward;   // A^{r+}(x)
    LogPolarSL2 backward;  // A^{-r-}(x)
    double s = 0;          // s(forward)
    double s_prime = 0;    // s(backward) = u(A^{r-}(T^{-r-} x))
    double s_shift = 0;    // s - phi(x), kept apart so tiny shifts survive rounding
    HyperbolicityReport forward_report, backward_report;
    bool hyperbolic = true;
};

// Return blocks of `stage` at x in I_n.  The audit uses mu = lambda_n.
inline ReturnBlockData return_block(const CocycleStage& stage, double x, int n, bool audit = true) {
    const auto& ctx = stage.context();
    const std::int64_t q = ctx.freq.q(n);
    if (!ctx.geom.contains(x, q)) throw PreconditionFailed("return_block: x is not in I_n");
    ReturnBlockData d;
    d.x = x;
    d.r_plus = first_return(x, ctx.freq, ctx.geom, q, Dir::forward, ctx.cap(q));
    d.r_minus = first_return(x, ctx.freq, ctx.geom, q, Dir::backward, ctx.cap(q));
    const double start = orbit_point(x, ctx.freq, -d.r_minus);
    if (audit) {
        auto fw = stage.factors(x, d.r_plus);
        auto bw = stage.factors(start, d.r_minus);
        LogPolarSL2 rest = compose_chain(std::vector<LogPolarSL2>(fw.begin() + 1, fw.end()));
        ComposeShift sh = compose_shift(rest, fw.front());
        d.s_shift = d.r_plus > 1 ? sh.ds : 0.0;
        d.forward = d.r_plus > 1 ? compose(rest, fw.front()) : fw.front();
        LogPolarSL2 F = compose_chain(bw);
        d.backward = inverse(F);
        const double mu = std::exp(ctx.log_mu(n));
        const double lam = ctx.config.lambda;
        d.forward_report = is_mu_hyperbolic(fw, mu, ctx.config.epsilon, lam);
        d.backward_report = is_mu_hyperbolic(bw, mu, ctx.config.epsilon, lam);
        d.hyperbolic = d.forward_report.verdict && d.backward_report.verdict;
    } else {
        LogPolarSL2 first = stage.factor(x);
        if (d.r_plus > 1) {
            LogPolarSL2 rest = stage.product(orbit_point(x, ctx.freq, 1), d.r_plus - 1);
            d.s_shift = compose_shift(rest, first).ds;
            d.forward = compose(rest, first);
        } else {
            d.forward = first;
        }
        d.backward = inverse(stage.product(start, d.r_minus));
    }
    d.s = d.forward.s;
    d.s_prime = d.backward.s;
    return d;
}

// Audit of the return blocks over a grid of I_n.
struct StageAudit {
    int n = 0;
    std::int64_t q = 0;
    std::size_t points = 0;
    std::size_t failures = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_x = 0;
    std::size_t failing_prefix = 0;
    bool failing_in_inverse = false;
    double min_rate_ratio = std::numeric_limits<double>::infinity();  // min over prefixes of ln|A^i| / (i ln lambda)
    double required_epsilon = 0;  // smallest eps for which every block passes with mu = lambda^{1-eps}
    std::int64_t min_r = std::numeric_limits<std::int64_t>::max(), max_r = 0;
    bool pass() const { return failures == 0; }
};

namespace detail {

inline void absorb(StageAudit& a, const ReturnBlockData& d, double log_lambda, double eps) {
    a.points++;
    a.min_r = std::min({a.min_r, d.r_plus, d.r_minus});
    a.max_r = std::max({a.max_r, d.r_plus, d.r_minus});
    auto take = [&](const HyperbolicityReport& h, bool inv) {
        if (h.min_margin < a.min_margin) {
            a.min_margin = h.min_margin;
            a.worst_x = d.x;
            a.failing_prefix = h.failing_prefix;
            a.failing_in_inverse = inv || h.failing_in_inverse;
        }
        const double rate = (1.0 - h.epsilon) * std::log(h.mu);
        auto ratios = [&](const std::vector<double>& m) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                double ln_norm = m[i] + static_cast<double>(i + 1) * rate;
                a.min_rate_ratio = std::min(a.min_rate_ratio, ln_norm / (static_cast<double>(i + 1) * log_lambda));
            }
        };
        ratios(h.forward_margins);
        ratios(h.backward_margins);
    };
    take(d.forward_report, false);
    take(d.backward_report, true);
    if (!d.hyperbolic) a.failures++;
    (void)eps;
    a.required_epsilon = a.min_rate_ratio > 0 ? 1.0 - std::sqrt(std::min(1.0, a.min_rate_ratio)) : 1.0;
}

inline std::vector<double> component_grid(const CriticalGeometry& g, double radius, int per_component) {
    std::vector<double> xs;
    for (int i = 0; i < 2; ++i)
        for (double x : interval_grid(g.center(i), radius, per_component)) xs.push_back(x);
    return xs;
}

}  // namespace detail

inline StageAudit audit_stage(const CocycleStage& stage, int n, const std::vector<double>& xs) {
    const auto& ctx = stage.context();
    StageAudit a;
    a.n = n;
    a.q = ctx.freq.q(n);
    auto data = parallel_map(xs.size(), ctx.config.threads, [&](std::size_t i) { return return_block(stage, xs[i], n); });
    for (const auto& d : data) detail::absorb(a, d, ctx.config.log_lambda(), ctx.config.epsilon);
    return a;
}

inline StageAudit audit_stage(const CocycleStage& stage, int n) {
    const auto& ctx = stage.context();
    return audit_stage(stage, n,
                       detail::component_grid(ctx.geom, ctx.geom.radius(ctx.freq.q(n)), ctx.config.verify_grid));
}

// Stage N with phi = phi_0 and no corrections; the return blocks over I_N must pass the audit.
inline CocycleStage stage_init(const ExperimentConfig& config, StageAudit* audit_out = nullptr) {
    config.validate();
    auto ctx = std::make_shared<const ConstructionContext>(config);
    CocycleStage st(ctx, config.N, AngleFunction(ctx->phi0));
    StageAudit a = audit_stage(st, config.N);
    if (audit_out) *audit_out = a;
    if (!a.pass()) {
        throw NotHyperbolic("stage " + std::to_string(config.N) + ": return block at x = " + std::to_string(a.worst_x) +
                            " fails at prefix " + std::to_string(a.failing_prefix) +
                            (a.failing_in_inverse ? " (inverse side)" : "") + " with margin " +
                            std::to_string(a.min_margin) + "; epsilon >= " + std::to_string(a.required_epsilon) +
                            " would be needed");
    }
    return st;
}

// Same stage from an explicit angle function, without the audit (diagnostics, tests).
inline CocycleStage make_stage(const ExperimentConfig& config, const SmoothFunction& phi) {
    auto ctx = std::make_shared<const ConstructionContext>(config);
    return CocycleStage(ctx, config.N, AngleFunction(phi));
}

struct CorrectionResult {
    CocycleStage stage;
    StageAudit audit;            // blocks of the previous stage at the build nodes
    double residual = 0;         // relative midpoint residual of h
    double max_abs_h = 0;
    double sup_increment = 0;    // sup |e^_n| over build nodes and midpoints
    std::vector<double> nodes;
};

// Correction of `prev` at stage n.
inline CorrectionResult build_correction(const CocycleStage& prev, int n) {
    const auto& ctx = prev.context();
    const auto& cfg = ctx.config;
    StageCorrection c;
    c.n = n;
    c.q = ctx.freq.q(n);
    c.geom = ctx.geom;
    c.radius = ctx.geom.radius(c.q);
    c.plateau_delta = cfg.plateau_width();
    c.plateau = plateau(c.q, ctx.geom, c.plateau_delta);

    const int m = cfg.cheb_nodes;
    std::vector<double> xs, mids;
    for (int i = 0; i < 2; ++i) {
        double ci = ctx.geom.center(i);
        for (double x : chebyshev_nodes(ci - c.radius, ci + c.radius, m)) xs.push_back(x);
        for (double x : chebyshev_midpoints(ci - c.radius, ci + c.radius, m)) mids.push_back(x);
    }
    std::vector<double> all = xs;
    all.insert(all.end(), mids.begin(), mids.end());
    auto data = parallel_map(all.size(), cfg.threads, [&](std::size_t i) { return return_block(prev, all[i], n); });

    CorrectionResult res{prev, {}, 0, 0, 0, xs};
    res.audit.n = n;
    res.audit.q = c.q;
    std::vector<double> h(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& d = data[i];
        if (i < xs.size()) detail::absorb(res.audit, d, cfg.log_lambda(), cfg.epsilon);
        h[i] = wrap_pi(d.s_shift - d.s_prime);
        if (!(std::fabs(h[i]) < 0.25 * pi)) throw DomainViolation("build_correction: direction mismatch is not small");
        res.max_abs_h = std::max(res.max_abs_h, std::fabs(h[i]));
    }
    double worst = 0;
    for (int i = 0; i < 2; ++i) {
        double ci = ctx.geom.center(i);
        std::vector<double> samples(h.begin() + i * m, h.begin() + (i + 1) * m);
        c.remainder[i] = ChebyshevSeries::from_samples(ci - c.radius, ci + c.radius, samples);
        for (int j = 0; j + 1 < m; ++j) {
            std::size_t k = xs.size() + static_cast<std::size_t>(i * (m - 1) + j);
            worst = std::max(worst, std::fabs(c.remainder[i](all[k]) - h[k]));
        }
    }
    res.residual = res.max_abs_h > 0 ? worst / res.max_abs_h : 0.0;
    c.residual = res.residual;
    if (res.residual > cfg.interp_tol)
        throw InterpolationDiverged("build_correction: stage " + std::to_string(n) + " midpoint residual " +
                                    fmt_sci(res.residual) + " exceeds " + fmt_sci(cfg.interp_tol));
    AngleFunction phi = prev.phi().with(c);
    for (double x : all) res.sup_increment = std::max(res.sup_increment, std::fabs(phi.last_increment(x)));
    res.stage = CocycleStage(prev.context_ptr(), n, std::move(phi));
    return res;
}

// Stage with e~_n = -phi_0 f_n appended.
inline CocycleStage build_degenerate(const CocycleStage& st) {
    const auto& ctx = st.context();
    if (!st.corrected() || st.degenerate()) throw PreconditionFailed("build_degenerate: need a corrected stage");
    StageCorrection c;
    c.kind = StageCorrection::Kind::degenerate;
    c.n = st.n();
    c.q = ctx.freq.q(c.n);
    c.geom = ctx.geom;
    c.radius = ctx.geom.radius(c.q);
    c.plateau_delta = ctx.config.plateau_width();
    c.plateau = plateau(c.q, ctx.geom, c.plateau_delta);
    return CocycleStage(st.context_ptr(), st.n(), st.phi().with(c));
}

// Copy of a stage whose last correction is also nonzero outside I_n.
inline CocycleStage leak_support(const CocycleStage& st, double leak) {
    auto corr = st.phi().corrections();
    if (corr.empty()) throw PreconditionFailed("leak_support: stage has no correction");
    AngleFunction phi(st.phi().base());
    corr.back().leak = leak;
    for (auto& c : corr) phi = phi.with(c);
    return CocycleStage(st.context_ptr(), st.n(), phi);
}

struct ConjugationReport {
    std::size_t points = 0;
    double max_log_sigma_dev = 0;  // relative
    double max_direction_dev = 0;  // projective
    double max_deviation = 0;
};

// A_n^{r+}(x) = A_{n-1}^{r+}(x) R_{-e^_n(x)},  A_n^{-r-}(x) = R_{e^_n(T^{-r-}x)} A_{n-1}^{-r-}(x)
inline ConjugationReport verify_conjugation(const CocycleStage& prev, const CocycleStage& cur, int grid = 0) {
    const auto& ctx = cur.context();
    const int n = cur.n();
    const std::int64_t q = ctx.freq.q(n);
    if (grid <= 0) grid = ctx.config.verify_grid;
    auto xs = detail::component_grid(ctx.geom, ctx.geom.radius(q), grid);
    struct Dev {
        double ls = 0, dir = 0;
    };
    auto devs = parallel_map(xs.size(), ctx.config.threads, [&](std::size_t i) {
        double x = xs[i];
        auto a = return_block(cur, x, n, false);
        auto b = return_block(prev, x, n, false);
        double start = orbit_point(x, ctx.freq, -a.r_minus);
        LogPolarSL2 fw = rotate_right(b.forward, -cur.phi().last_increment(x));
        LogPolarSL2 bw = rotate_left(b.backward, cur.phi().last_increment(start));
        auto rel = [](double p, double r) { return std::fabs(p - r) / std::max(1.0, std::fabs(r)); };
        Dev d;
        d.ls = std::max(rel(a.forward.log_sigma, fw.log_sigma), rel(a.backward.log_sigma, bw.log_sigma));
        d.dir = std::max({proj_dist(a.forward.s, fw.s), proj_dist(a.forward.u, fw.u), proj_dist(a.backward.s, bw.s),
                          proj_dist(a.backward.u, bw.u)});
        return d;
    });
    ConjugationReport r;
    r.points = xs.size();
    for (const auto& d : devs) {
        r.max_log_sigma_dev = std::max(r.max_log_sigma_dev, d.ls);
        r.max_direction_dev = std::max(r.max_direction_dev, d.dir);
    }
    r.max_deviation = std::max(r.max_log_sigma_dev, r.max_direction_dev);
    return r;
}

struct AlignmentReport {
    int n = 0;
    std::size_t inner_points = 0, annulus_points = 0;
    double inner_residual = 0;        // max |(s_n - s'_n) - target| on I_n/10
    double inner_relative = 0;        // same divided by max |phi_0| on the grid (target phi_0 only)
    double annulus_margin = std::numeric_limits<double>::infinity();  // min |s_n - s'_n| - |phi_0|/2
    bool inner_ok = false;
    bool annulus_ok = false;
};

// (a) s_n - s'_n = target on I_n/10 and (b) |s_n - s'_n| >= |phi_0|/2 on I_n minus I_n/10.
// The target is phi_0 for corrected stages and 0 for degenerate ones.
inline AlignmentReport verify_alignment(const CocycleStage& st, int n = -1, int grid = 0) {
    const auto& ctx = st.context();
    if (n < 0) n = st.n();
    if (grid <= 0) grid = ctx.config.verify_grid;
    const std::int64_t q = ctx.freq.q(n);
    const double r = ctx.geom.radius(q);
    auto inner = detail::component_grid(ctx.geom, r / 10.0, grid);
    std::vector<double> ann;
    for (double x : detail::component_grid(ctx.geom, r, 4 * grid))
        if (ctx.geom.dist(x) > r / 10.0) ann.push_back(x);

    AlignmentReport rep;
    rep.n = n;
    rep.inner_points = inner.size();
    rep.annulus_points = ann.size();
    const bool deg = st.degenerate();
    // s - s' as phi(x) + shift - s', with phi - phi0 taken from the corrections
    auto diff = [&](double x) {
        auto d = return_block(st, x, n, false);
        double dphi = st.phi()(x) - ctx.phi0(x);
        return std::pair<double, double>{wrap_pi(d.s - d.s_prime), dphi + wrap_pi(d.s_shift - d.s_prime)};
    };
    auto a = parallel_map(inner.size(), ctx.config.threads, [&](std::size_t i) { return diff(inner[i]); });
    double phi_max = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        double p0 = ctx.phi0(inner[i]);
        phi_max = std::max(phi_max, std::fabs(p0));
        rep.inner_residual = std::max(rep.inner_residual, deg ? std::fabs(a[i].first) : std::fabs(a[i].second));
    }
    rep.inner_relative = phi_max > 0 ? rep.inner_residual / phi_max : rep.inner_residual;
    rep.inner_ok = rep.inner_residual <= ctx.config.align_tol;
    auto b = parallel_map(ann.size(), ctx.config.threads, [&](std::size_t i) { return diff(ann[i]); });
    for (std::size_t i = 0; i < ann.size(); ++i)
        rep.annulus_margin = std::min(rep.annulus_margin, std::fabs(b[i].first) - 0.5 * std::fabs(ctx.phi0(ann[i])));
    rep.annulus_ok = ann.empty() || rep.annulus_margin >= -ctx.config.align_tol;
    return rep;
}

struct CollapseReport {
    std::size_t points = 0;
    double min_margin = std::numeric_limits<double>::infinity();  // ln 2 + |L+ - L-| - ln|A~^{r+ + r-}|
    double min_margin_misaligned = std::numeric_limits<double>::infinity();
    double max_drop = 0;        // ln|A^{r+ + r-}| - ln|A~^{r+ + r-}| at the best point
    double min_drop = std::numeric_limits<double>::infinity();
    double max_log_alignment = -std::numeric_limits<double>::infinity();  // ln |s~ - s~'|
    bool holds = false;             // strict form, needs exact alignment
    bool holds_misaligned = false;  // with the residual misalignment accounted for
};

namespace detail {

// ln(a b |d| + a/b + b/a + 1/(a b)) for a = e^la, b = e^lb.
inline double log_product_bound(double la, double lb, double d) {
    double t[4] = {d > 0 ? la + lb + std::log(d) : -INFINITY, la - lb, lb - la, -la - lb};
    double m = *std::max_element(t, t + 4);
    double s = 0;
    for (double v : t) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace detail

// On I_n/10: ln|A~^{r+ + r-}(T^{-r-}x)| <= ln 2 + |ln|P+| - ln|P-||.  The strict form assumes
// s~ = s~' exactly; the second bound keeps the leftover angle.
inline CollapseReport verify_collapse(const CocycleStage& corrected, const CocycleStage& degenerate, int grid = 0) {
    const auto& ctx = degenerate.context();
    const int n = degenerate.n();
    if (grid <= 0) grid = ctx.config.verify_grid;
    auto xs = detail::component_grid(ctx.geom, ctx.geom.radius(ctx.freq.q(n)) / 10.0, grid);
    struct Row {
        double margin, margin2, drop, align;
    };
    auto rows = parallel_map(xs.size(), ctx.config.threads, [&](std::size_t i) {
        auto d = return_block(degenerate, xs[i], n, false);
        auto a = return_block(corrected, xs[i], n, false);
        LogPolarSL2 full = compose(d.forward, inverse(d.backward));
        LogPolarSL2 ref = compose(a.forward, inverse(a.backward));
        const double lp = d.forward.log_sigma, lm = d.backward.log_sigma;
        double bound = detail::ln2 + std::fabs(lp - lm);
        double al = std::fabs(degenerate.phi()(xs[i]) + wrap_pi(d.s_shift - d.s_prime));
        // rounding of the composed angles, relative to the unit circle
        double seen = std::max(al, 4 * std::numeric_limits<double>::epsilon());
        double bound2 = detail::log_product_bound(lp, lm, seen);
        return Row{bound - full.log_sigma, bound2 - full.log_sigma, ref.log_sigma - full.log_sigma,
                   al > 0 ? std::log(al) : -INFINITY};
    });
    CollapseReport r;
    r.points = xs.size();
    for (const auto& w : rows) {
        r.min_margin = std::min(r.min_margin, w.margin);
        r.min_margin_misaligned = std::min(r.min_margin_misaligned, w.margin2);
        r.max_drop = std::max(r.max_drop, w.drop);
        r.min_drop = std::min(r.min_drop, w.drop);
        r.max_log_alignment = std::max(r.max_log_alignment, w.align);
    }
    r.holds = r.min_margin >= -1e-9;
    r.holds_misaligned = r.min_margin_misaligned >= -1e-9;
    return r;
}

// The whole run: stage N, then corrections at N..N+stages-1 and their degenerate companions.
struct Construction {
    CocycleStage initial;
    StageAudit initial_audit;
    std::vector<CorrectionResult> corrected;
    std::vector<CocycleStage> degenerate;
};

inline Construction construct(const ExperimentConfig& config) {
    StageAudit a;
    CocycleStage st = stage_init(config, &a);
    Construction out{st, a, {}, {}};
    for (int k = 0; k < config.stages; ++k) {
        const CocycleStage& prev = k == 0 ? out.initial : out.corrected.back().stage;
        out.corrected.push_back(build_correction(prev, config.N + k));
        out.degenerate.push_back(build_degenerate(out.corrected.back().stage));
    }
    return out;
}

}  // namespace qpc
