#pragma once

// Gevrey toolkit: the periodic bump g, the plateau cutoffs f_n, the sample
// angle phi_0, the sampled Gevrey seminorm and the algebra checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "angles.hpp"
#include "arithmetic.hpp"
#include "bump.hpp"
#include "errors.hpp"
#include "jet.hpp"
#include "smooth_function.hpp"

namespace qpc {

// g(x) = amplitude * exp(-(t^-nu + (pi - t)^-nu)), t = x - c1 mod pi.
inline SmoothFunction periodic_bump(double c1, double nu, double amplitude = 1.0) {
    if (!(nu > 0.0 && nu < 1.0)) throw PreconditionFailed("periodic_bump: nu must lie in (0,1)");
    auto b = fn::flat_bump(nu);
    auto left = fn::compose(b, fn::affine(1.0, -c1));
    auto right = fn::compose(b, fn::affine(-1.0, c1 + pi));
    return fn::periodic(pi, c1, fn::scale(amplitude, fn::product(left, right)));
}

// Log of the envelope exp(-(1/2)(|x - c1|^-nu + |x - c1 - pi|^-nu)), distances taken in the current cell.
inline double periodic_bump_log_envelope(double x, double c1, double nu) {
    double t = x - c1;
    t -= pi * std::floor(t / pi);
    if (t <= 0.0 || t >= pi) return -std::numeric_limits<double>::infinity();
    return -0.5 * (std::pow(t, -nu) + std::pow(pi - t, -nu));
}

// phi_0 = arcsin(c g)
inline SmoothFunction sample_angle(double c, double c1, double nu) {
    if (!(c > 0.0 && c < 1e-3)) throw PreconditionFailed("sample_angle: amplitude must lie in (0, 1/1000)");
    return fn::arcsin(periodic_bump(c1, nu, c));
}

inline double default_plateau_delta(double nu, double beta) { return 0.5 * (1.0 / nu - beta); }

// w0(y) = phi(y + 2) / (phi(y + 2) + phi(-y - 1)), phi(t) = exp(-t^(-1/delta)) for t > 0.
inline SmoothFunction plateau_transition(double delta) {
    auto phi = fn::one_sided_flat(1.0 / delta);
    auto a = fn::compose(phi, fn::affine(1.0, 2.0));
    auto b = fn::compose(phi, fn::affine(-1.0, -1.0));
    auto inv = fn::recip(fn::sum(a, b));
    // a/(a+b) near y = -2 and 1 - b/(a+b) near y = -1, so each end is exactly flat
    auto left = fn::product(a, inv);
    auto right = fn::sum(fn::constant(1.0), fn::scale(-1.0, fn::product(b, inv)));
    return fn::glued({-1.5}, {left, right});
}

// w1: 1 on [-1, 1], 0 outside (-2, 2), flat transitions in between.
inline SmoothFunction plateau_profile(double delta) {
    auto w0 = plateau_transition(delta);
    auto mirrored = fn::compose(w0, fn::affine(-1.0, 0.0));
    auto zero = fn::constant(0.0), one = fn::constant(1.0);
    return fn::glued({-2.0, -1.0, 1.0, 2.0}, {zero, w0, one, mirrored, zero});
}

struct PlateauSpec {
    double q = 1;
    double beta = 1.2;
    double c1 = 0.5;
    double delta = 0.4;
    double scale() const { return 10.0 * std::pow(q, beta); }
    // break points of the profile mapped to x, around c1
    std::vector<double> breaks() const {
        double s = scale();
        return {c1 - 2.0 / s, c1 - 1.0 / s, c1 + 1.0 / s, c1 + 2.0 / s};
    }
};

// f_n(x) = w1(10 q^beta (x - c1)) on [c1 - pi/2, c1 + pi/2), pi-periodic.
inline SmoothFunction plateau(const PlateauSpec& p) {
    if (!(p.delta > 0.0)) throw PreconditionFailed("plateau: delta must be positive");
    double s = p.scale();
    return fn::periodic(pi, p.c1 - half_pi, fn::compose(plateau_profile(p.delta), fn::affine(s, -s * p.c1)));
}

inline SmoothFunction plateau(std::int64_t q, const CriticalGeometry& g, double delta) {
    return plateau(PlateauSpec{static_cast<double>(q), g.beta, g.c1, delta});
}

// ---------------------------------------------------------------------------
// Sampled seminorm
//   |f|_{s,K} = (4 pi^2 / 3) sup_k (1 + k)^2 |f^(k)| / (K^k (k!)^s)

inline std::vector<double> uniform_grid(double a, double b, int n, const std::vector<double>& extra = {}) {
    std::vector<double> x;
    x.reserve(n + extra.size());
    for (int i = 0; i < n; ++i) x.push_back(n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1));
    for (double e : extra)
        if (e >= a && e <= b) x.push_back(e);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

// Points clustered geometrically on both sides of each break, for refinement near gluing points.
inline std::vector<double> refine_near(const std::vector<double>& breaks, double width, int per_side = 24) {
    std::vector<double> out;
    for (double b : breaks) {
        for (int i = 0; i < per_side; ++i) {
            double h = width * std::pow(0.7, i);
            out.push_back(b - h);
            out.push_back(b + h);
        }
    }
    return out;
}

struct JetTable {
    std::vector<double> xs;
    std::vector<Jet> jets;
    int k_max = 0;
};

inline JetTable jet_table(const SmoothFunction& f, const std::vector<double>& xs, int k_max) {
    JetTable t;
    t.xs = xs;
    t.k_max = k_max;
    t.jets.reserve(xs.size());
    for (double x : xs) t.jets.push_back(f.jet(x, k_max));
    return t;
}

template <class Op>
JetTable map_table(const JetTable& a, Op op) {
    JetTable t;
    t.xs = a.xs;
    t.jets.reserve(a.jets.size());
    for (const auto& j : a.jets) t.jets.push_back(op(j));
    t.k_max = t.jets.empty() ? a.k_max : t.jets.front().order();
    return t;
}

template <class Op>
JetTable zip_table(const JetTable& a, const JetTable& b, Op op) {
    if (a.xs != b.xs) throw PreconditionFailed("zip_table: grids differ");
    JetTable t;
    t.xs = a.xs;
    for (std::size_t i = 0; i < a.jets.size(); ++i) t.jets.push_back(op(a.jets[i], b.jets[i]));
    t.k_max = t.jets.empty() ? std::min(a.k_max, b.k_max) : t.jets.front().order();
    return t;
}

struct GevreySeminorm {
    double s = 0, K = 0;
    double value = 0;
    double log_value = -std::numeric_limits<double>::infinity();
    int k_max = 0;
    int k_star = 0;
    double x_star = 0;
    std::size_t grid_points = 0;
    bool saturated = false;  // sup attained at k_max: a larger k_max may give more
};

inline constexpr double neg_inf_d = -std::numeric_limits<double>::infinity();
inline const double log_seminorm_prefactor = std::log(4.0 * pi * pi / 3.0);

inline GevreySeminorm seminorm_from_table(const JetTable& t, double s, double K) {
    GevreySeminorm r;
    r.s = s;
    r.K = K;
    r.k_max = t.k_max;
    r.grid_points = t.xs.size();
    const double lK = std::log(K);
    std::vector<double> kterm(t.k_max + 1);
    for (int k = 0; k <= t.k_max; ++k)
        kterm[k] = 2.0 * std::log1p(k) + (1.0 - s) * std::lgamma(k + 1.0) - k * lK;
    for (std::size_t i = 0; i < t.xs.size(); ++i) {
        const auto& c = t.jets[i].c;
        for (int k = 0; k <= t.k_max; ++k) {
            if (c[k] == 0.0) continue;
            double l = std::log(std::fabs(c[k])) + kterm[k];
            if (l > r.log_value) {
                r.log_value = l;
                r.k_star = k;
                r.x_star = t.xs[i];
            }
        }
    }
    if (r.log_value > -std::numeric_limits<double>::infinity()) r.log_value += log_seminorm_prefactor;
    r.value = std::exp(r.log_value);
    r.saturated = r.k_star == t.k_max && r.log_value > -std::numeric_limits<double>::infinity();
    return r;
}

inline GevreySeminorm seminorm_estimate(const SmoothFunction& f, double s, double K, int k_max,
                                        const std::vector<double>& xs) {
    return seminorm_from_table(jet_table(f, xs, k_max), s, K);
}

// Smallest K = 2^j for which the sampled sup of every table is attained at
// k <= k_limit, so the functions are visibly in G^{s,K}.  0 if none up to K_max.
inline double admissible_K(const std::vector<const JetTable*>& tables, double s, int k_limit, double K_max = 1e12) {
    for (double K = 1.0; K <= K_max; K *= 2.0) {
        bool ok = true;
        for (const auto* t : tables)
            if (seminorm_from_table(*t, s, K).k_star > k_limit) ok = false;
        if (ok) return K;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Algebra checks on estimated seminorms.  Items (3)-(5) are applied to
// 1 + eta f and eta f with eta chosen so the smallness hypothesis holds with
// equality on the estimate.

struct AlgebraItem {
    std::string name;
    double log_lhs = 0;
    double log_rhs = 0;
    double margin = 0;  // log_rhs - log_lhs
    bool holds = false;
    bool stated = true;  // false: companion check, not counted in violations
};

struct AlgebraReport {
    double s = 0, K = 0, eps = 0;
    std::vector<AlgebraItem> items;
    int violations = 0;
    int companion_violations = 0;
    bool all_hold() const { return violations == 0; }
};

inline AlgebraReport gevrey_algebra_suite(const SmoothFunction& f, const SmoothFunction& g, double s, double K,
                                          double eps, const std::vector<double>& xs, int k_max = 40) {
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionFailed("gevrey_algebra_suite: eps must lie in (0,1)");
    AlgebraReport rep;
    rep.s = s;
    rep.K = K;
    rep.eps = eps;
    auto push = [&](std::string name, double lhs, double rhs) {
        AlgebraItem it{std::move(name), lhs, rhs, rhs - lhs, !(lhs > rhs + 1e-12 * std::max(1.0, std::fabs(rhs)))};
        if (!it.holds) ++rep.violations;
        rep.items.push_back(it);
    };

    JetTable tf1 = jet_table(f, xs, k_max + 1);
    JetTable tf = map_table(tf1, [&](const Jet& j) { return Jet(j.x0, std::vector<double>(j.c.begin(), j.c.end() - 1)); });
    JetTable tg = jet_table(g, xs, k_max);
    const auto nf = seminorm_from_table(tf, s, K);
    const auto ng = seminorm_from_table(tg, s, K);
    if (!(nf.log_value > -std::numeric_limits<double>::infinity()))
        throw PreconditionFailed("gevrey_algebra_suite: f vanishes on the grid");

    // (1)
    auto tfg = zip_table(tf, tg, [](const Jet& a, const Jet& b) { return jet_mul(a, b); });
    push("product", seminorm_from_table(tfg, s, K).log_value, nf.log_value + ng.log_value);

    // (2)
    auto tdf = map_table(tf1, [](const Jet& j) { return jet_derivative(j); });
    double K2 = (1.0 + std::pow(eps, 1.0 / s)) * K;
    const double ld = seminorm_from_table(tdf, s, K2).log_value;
    push("derivative", ld, std::log(K / eps) + nf.log_value);
    // Termwise, |f'|_{s,K2} <= K |f|_{s,K} sup_k (k+1)^{s+2} (k+2)^{-2} (K/K2)^k.  The sup is about
    // (s/e)^s / eps, so K/eps alone is too small once s > e.  Here both sides use the same orders.
    {
        double lsup = neg_inf_d;
        for (int k = 0; k <= k_max; ++k)
            lsup = std::max(lsup, (s + 2.0) * std::log(k + 1.0) - 2.0 * std::log(k + 2.0) - k * std::log(K2 / K));
        double rhs = std::log(K) + seminorm_from_table(tf1, s, K).log_value + lsup;
        AlgebraItem c{"derivative_sharp", ld, rhs, rhs - ld, !(ld > rhs + 1e-12 * std::max(1.0, std::fabs(rhs))), false};
        if (!c.holds) ++rep.companion_violations;
        rep.items.push_back(c);
    }

    const double eta = std::exp(std::log(eps) - nf.log_value);
    const double bound = std::log(eps) / 12.0;
    const double K3 = (1.0 + std::pow(eps, 1.0 / (s + 8.0))) * K;
    const double K4 = (1.0 + std::pow(eps, 1.0 / (s + 16.0))) * K;
    auto small = map_table(tf, [&](const Jet& j) { return jet_scale(j, eta); });
    auto near_one = map_table(small, [](const Jet& j) { return jet_shift(j, 1.0); });

    // (3)
    auto rec = map_table(near_one, [](const Jet& j) { return jet_shift(jet_recip(j), -1.0); });
    push("reciprocal", seminorm_from_table(rec, s, K3).log_value, bound);
    // (4)
    auto sq = map_table(near_one, [](const Jet& j) { return jet_shift(jet_sqrt(j), -1.0); });
    push("sqrt", seminorm_from_table(sq, s, K4).log_value, bound);
    // (5)
    auto sn = map_table(small, [](const Jet& j) { return jet_sin(j); });
    push("sin", seminorm_from_table(sn, s, K3).log_value, bound);
    auto cs = map_table(small, [](const Jet& j) { return jet_shift(jet_cos(j), -1.0); });
    push("cos", seminorm_from_table(cs, s, K3).log_value, bound);
    auto as = map_table(small, [](const Jet& j) { return jet_arcsin(j); });
    double las = seminorm_from_table(as, s, 4.0 * K).log_value;
    // membership in G^{s,4K}: the estimate is finite
    AlgebraItem it{"arcsin_4K", las, std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(), !std::isnan(las) && las < 700.0};
    if (!it.holds) ++rep.violations;
    rep.items.push_back(it);
    return rep;
}

}  // namespace qpc
