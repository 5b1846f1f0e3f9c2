#pragma once

// Randomized and tabulated property suites over the library.  Each returns
// counts and worst margins; the caller decides what is a pass.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "arithmetic.hpp"
#include "bump.hpp"
#include "gevrey.hpp"
#include "jet.hpp"
#include "sl2.hpp"

namespace qpc {

struct SuiteResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t violations = 0;
    std::size_t rejected = 0;  // draws discarded by the generator's preconditions
    double worst_margin = std::numeric_limits<double>::infinity();
    bool pass() const { return violations == 0 && cases > 0; }
};

inline void record(SuiteResult& r, double margin, bool ok) {
    r.cases++;
    if (!ok) r.violations++;
    r.worst_margin = std::min(r.worst_margin, margin);
}

inline LogPolarSL2 random_log_polar(std::mt19937_64& rng, double max_log) {
    std::uniform_real_distribution<double> L(0.0, max_log), ang(-half_pi, half_pi);
    double l = L(rng), u = ang(rng), s = ang(rng);
    return {l, u, s};
}

// ln|A^n C| >= (m + n)(1 - eps) ln mu + ln theta for a mu-hyperbolic block A and theta >= min_theta.
inline SuiteResult young_suite(std::mt19937_64& rng, std::size_t count, double min_theta = 0.01) {
    SuiteResult r{"young"};
    std::uniform_real_distribution<double> logmu(std::log(10.0), std::log(1000.0)), wob(-0.3, 0.3), eps(0.05, 0.3);
    std::uniform_int_distribution<int> len(1, 6);
    while (r.cases < count) {
        double L = logmu(rng);
        double e = eps(rng);
        std::vector<LogPolarSL2> block;
        int n = len(rng);
        for (int i = 0; i < n; ++i) block.push_back(LogPolarSL2::hyperbolic(L, half_pi + wob(rng)));
        LogPolarSL2 C = random_log_polar(rng, 20.0);
        if (!is_mu_hyperbolic(block, std::exp(L), e, std::exp(L)).verdict) {
            r.rejected++;
            continue;
        }
        auto y = young_check(block, C, std::exp(L), e);
        if (y.theta < min_theta) {
            r.rejected++;
            continue;
        }
        record(r, y.margin, y.holds);
    }
    return r;
}

// |BA| <= 2 max(|A|/|B|, |B|/|A|) with s(B) = u(A).
inline SuiteResult cancellation_suite(std::mt19937_64& rng, std::size_t count) {
    SuiteResult r{"cancellation"};
    for (std::size_t t = 0; t < count; ++t) {
        LogPolarSL2 A = random_log_polar(rng, 20.0);
        LogPolarSL2 B = random_log_polar(rng, 20.0);
        B.s = A.u;
        auto c = cancellation_check(A, B);
        record(r, c.bound - c.log_norm, c.holds);
    }
    return r;
}

// Jet composition against the partition sum, orders up to n_max <= 8.
inline SuiteResult faa_di_bruno_suite(std::mt19937_64& rng, std::size_t count, int n_max = 8, double tol = 1e-9) {
    SuiteResult r{"faa_di_bruno"};
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (std::size_t t = 0; t < count; ++t) {
        std::vector<double> a(n_max + 1), b(n_max + 1);
        for (auto& v : a) v = U(rng);
        for (auto& v : b) v = U(rng);
        auto c = faa_di_bruno_check(Jet(b[0], a), Jet(0.0, b), n_max, tol);
        record(r, tol - c.max_rel_error, c.agree);
    }
    return r;
}

inline SuiteResult partition_suite(int n_max = 12, const std::vector<double>& Rs = {-0.5, 0.1, 1.0, 2.0},
                                   double tol = 1e-10) {
    SuiteResult r{"partition_identity"};
    for (int n = 1; n <= n_max; ++n)
        for (double R : Rs) {
            auto c = partition_identity_check(n, R, tol);
            record(r, tol - c.rel_error, c.holds);
        }
    return r;
}

// |a_i^n| <= (2 nu + 2)^{n+i} (nu + n)^{n-i}; the table constructor throws on a violation,
// so the count here comes from the margins.
inline SuiteResult bump_table_suite(const std::vector<double>& nus, int n_max) {
    SuiteResult r{"bump_coefficients"};
    for (double nu : nus) {
        BumpCoefficients t;
        try {
            t = bump_coefficients(nu, n_max);
        } catch (const BoundViolated&) {
            r.cases++;
            r.violations++;
            continue;
        }
        for (int n = 1; n <= n_max; ++n)
            for (int i = 1; i <= n; ++i) {
                double m = t.log_bound_margin(n, i);
                record(r, m, !(m < 0.0));
            }
    }
    return r;
}

// |f^(n)(x)| <= C^n exp(-x^-nu / 2) (n!)^{1 + 1/nu} for f = exp(-x^-nu), x > 0.
// C is fitted on `fit` and checked with C * (1 + slack) on `check`.
struct BumpEnvelope {
    double nu = 0;
    double C = 0;
    SuiteResult check{"bump_envelope"};
};

inline BumpEnvelope bump_envelope(double nu, int n_max, const std::vector<double>& fit,
                                  const std::vector<double>& check, double slack = 0.05) {
    FlatBump b(nu, n_max);
    auto excess = [&](double x, int n) {
        double d = std::fabs(b.derivative(x, n));
        if (d == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(d) + 0.5 * std::pow(x, -nu) - (1.0 + 1.0 / nu) * std::lgamma(n + 1.0);
    };
    BumpEnvelope e;
    e.nu = nu;
    double logC = 0;
    for (double x : fit)
        for (int n = 1; n <= n_max; ++n) logC = std::max(logC, excess(x, n) / n);
    e.C = std::exp(logC);
    const double lc = logC + std::log1p(slack);
    for (double x : check)
        for (int n = 1; n <= n_max; ++n) {
            double m = n * lc - excess(x, n);
            record(e.check, m, !(m < 0.0));
        }
    return e;
}

// Random pairs from the bump, plateau and sample-angle families, checked at each s.
struct AlgebraBattery {
    SuiteResult stated{"gevrey_algebra"};
    SuiteResult companion{"gevrey_algebra_sharp_derivative"};
    std::vector<std::string> failing;  // "pair/s/item" for stated violations
};

struct DrawnFunction {
    SmoothFunction f;
    std::vector<double> points;  // where the family has its structure
    std::string name;
};

inline DrawnFunction draw_family_member(std::mt19937_64& rng, int family) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double nu = 0.3 + 0.6 * U(rng), c1 = 0.2 + 2.5 * U(rng);
    DrawnFunction d;
    switch (family % 3) {
        case 0: {
            double amp = 0.5 + U(rng);
            d.f = periodic_bump(c1, nu, amp);
            d.points = refine_near({c1, c1 + pi}, 0.3);
            d.name = "bump";
            break;
        }
        case 1: {
            PlateauSpec ps{static_cast<double>(2 + static_cast<int>(20 * U(rng))), 1.2, c1, 0.1 + 0.3 * U(rng)};
            const double sc = ps.scale();
            for (double c : {c1, c1 + pi}) {
                auto u = uniform_grid(c - 2 / sc, c + 2 / sc, 65);
                d.points.insert(d.points.end(), u.begin(), u.end());
                PlateauSpec at = ps;
                at.c1 = c;
                auto e = refine_near(at.breaks(), 0.5 / sc, 12);
                d.points.insert(d.points.end(), e.begin(), e.end());
            }
            d.f = plateau(ps);
            d.name = "plateau";
            break;
        }
        default: {
            double c = 1e-4 + 8e-4 * U(rng);
            d.f = sample_angle(c, c1, nu);
            d.points = refine_near({c1, c1 + pi}, 0.3);
            d.name = "sample_angle";
        }
    }
    return d;
}

inline AlgebraBattery algebra_battery(std::mt19937_64& rng, int pairs, const std::vector<double>& ss, double eps = 1e-3,
                                      int k_max = 30) {
    AlgebraBattery out;
    for (int p = 0; p < pairs; ++p) {
        auto a = draw_family_member(rng, p % 3);
        auto b = draw_family_member(rng, (p / 3) % 3);
        std::vector<double> extra;
        for (const auto* d : {&a, &b})
            for (double x : d->points) extra.push_back(x - two_pi * std::floor(x / two_pi));
        auto xs = uniform_grid(0.0, two_pi, 257, extra);
        JetTable ta = jet_table(a.f, xs, k_max + 1), tb = jet_table(b.f, xs, k_max);
        for (double s : ss) {
            double K = admissible_K({&ta, &tb}, s, k_max - 5);
            if (K == 0.0) {
                out.stated.rejected++;
                continue;
            }
            auto rep = gevrey_algebra_suite(a.f, b.f, s, K, eps, xs, k_max);
            for (const auto& it : rep.items) {
                auto& r = it.stated ? out.stated : out.companion;
                record(r, it.margin, it.holds);
                if (!it.holds && it.stated)
                    out.failing.push_back(std::to_string(p) + "/" + a.name + "," + b.name + "/s=" +
                                          std::to_string(s).substr(0, 3) + "/" + it.name);
            }
        }
    }
    return out;
}

// r_n^+- >= q_n / 2 on grids over I_n, and the min/max return ratio.
struct ReturnFacts {
    SuiteResult bound{"return_lower_bound"};
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0;
};

inline void return_facts(ReturnFacts& out, const Frequency& f, const CriticalGeometry& g, int n, int grid) {
    const std::int64_t q = f.q(n);
    for (int comp = 0; comp < 2; ++comp)
        for (double x : interval_grid(g.center(comp), g.radius(q), grid))
            for (Dir d : {Dir::forward, Dir::backward}) {
                auto r = first_return(x, f, g, q, d);
                double m = static_cast<double>(r) - 0.5 * static_cast<double>(q);
                record(out.bound, m, !(m < 0.0));
            }
    auto rr = min_max_return(f, g, q, grid);
    out.min_ratio = std::min(out.min_ratio, rr.ratio);
    out.max_ratio = std::max(out.max_ratio, rr.ratio);
}

}  // namespace qpc
