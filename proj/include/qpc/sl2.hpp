#pragma once

// SL(2,R) matrices in projective polar form
//
//     A = R_u * diag(e^L, e^-L) * R_{pi/2 - s}
//
// s is the angle of the most contracted unit vector (|A s^| = e^-L) and u is
// the angle of the expanded image direction, u(A) = s(A^-1).  Both are lines,
// kept mod pi in [-pi/2, pi/2].  With this convention
//
//     A * R_t   has s -> s - t          R_t * A   has u -> u + t
//     A^-1      swaps u and s           Lambda R_{pi/2 - phi} = {ln lambda, 0, phi}
//
// and the identity is {0, 0, pi/2}.  The global sign is dropped.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"

namespace qpc {

struct LogPolarSL2 {
    double log_sigma = 0.0;
    double u = 0.0;
    double s = half_pi;

    static LogPolarSL2 identity() { return {}; }
    static LogPolarSL2 diag(double log_lambda) { return {log_lambda, 0.0, half_pi}; }
    // Lambda * R_{pi/2 - phi}
    static LogPolarSL2 hyperbolic(double log_lambda, double phi) { return {log_lambda, 0.0, wrap_pi(phi)}; }
    static LogPolarSL2 rotation(double phi) { return {0.0, 0.0, wrap_pi(half_pi - phi)}; }
};

struct DenseSL2 {
    double a = 1, b = 0, c = 0, d = 1;
    double det() const { return a * d - b * c; }
    DenseSL2 operator*(const DenseSL2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

inline DenseSL2 rotation_matrix(double t) {
    double c = std::cos(t), s = std::sin(t);
    return {c, -s, s, c};
}

namespace detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double ln2 = 0.693147180559945309417232121458176568;

// ln sinh(x), x >= 0
inline double log_sinh(double x) {
    if (x <= 0.0) return neg_inf;
    if (x < 0.5) return std::log(std::sinh(x));
    return x + std::log1p(-std::exp(-2.0 * x)) - ln2;
}

inline double log_2sinh(double x) { return x <= 0.0 ? neg_inf : ln2 + log_sinh(x); }

inline double lse2(double x, double y) {
    if (x == neg_inf) return y;
    if (y == neg_inf) return x;
    double m = std::max(x, y);
    return m + std::log1p(std::exp(std::min(x, y) - m));
}

// Signed number kept as sign * exp(l).
struct SignedLog {
    double l = neg_inf;
    int sign = 0;
};

inline SignedLog slog_add(SignedLog x, SignedLog y) {
    if (x.sign == 0 || x.l == neg_inf) return y;
    if (y.sign == 0 || y.l == neg_inf) return x;
    if (x.sign == y.sign) return {lse2(x.l, y.l), x.sign};
    if (x.l == y.l) return {};
    if (x.l < y.l) std::swap(x, y);
    return {x.l + std::log1p(-std::exp(y.l - x.l)), x.sign};
}

inline int sgn(double v) { return (v > 0) - (v < 0); }

// Half of atan2(Y, X) for Y, X in signed-log form; NaN when both vanish.
inline double half_atan2(SignedLog Y, SignedLog X) {
    double ly = Y.sign == 0 ? neg_inf : Y.l;
    double lx = X.sign == 0 ? neg_inf : X.l;
    double m = std::max(ly, lx);
    if (m == neg_inf) return std::numeric_limits<double>::quiet_NaN();
    double y = ly == neg_inf ? 0.0 : Y.sign * std::exp(ly - m);
    double x = lx == neg_inf ? 0.0 : X.sign * std::exp(lx - m);
    return 0.5 * std::atan2(y, x);
}

// acosh(1 + y) given ln y.
inline double acosh1p_from_log(double ly) {
    if (ly == neg_inf) return 0.0;
    if (ly < 0.0) {
        double y = std::exp(ly);
        return std::log1p(y + std::sqrt(y * (y + 2.0)));
    }
    double t = std::exp(-ly);
    return ly + std::log(1.0 + t + std::sqrt(1.0 + 2.0 * t));
}

}  // namespace detail

inline LogPolarSL2 inverse(const LogPolarSL2& A) { return {A.log_sigma, A.s, A.u}; }

inline LogPolarSL2 rotate_right(const LogPolarSL2& A, double t) { return {A.log_sigma, A.u, wrap_pi(A.s - t)}; }

inline LogPolarSL2 rotate_left(const LogPolarSL2& A, double t) { return {A.log_sigma, wrap_pi(A.u + t), A.s}; }

// theta - pi/2 for the product B*A, where theta is the angle of the middle
// rotation in diag(e2) R_theta diag(e1).
inline double alignment_offset(const LogPolarSL2& B, const LogPolarSL2& A) { return wrap_pi(A.u - B.s); }

// B * A.  With e1 = |A|, e2 = |B| and theta = pi/2 - s_B + u_A the middle
// factor is E = diag(e2, 1/e2) R_theta diag(e1, 1/e1), whose Frobenius norm
// b = e^2 + e^-2 is written as
//     b - 2 = 4 cos^2(theta) sinh^2(L1 + L2) + 4 sin^2(theta) sinh^2(L1 - L2),
// a sum of positive terms, so ln e = acosh(b / 2) / 2 never cancels.  The
// directions come from the Gram matrices E^T E and E E^T through half-angle
// atan2 of the scaled quantities U and u.
//
// compose_shift returns the norm and the two direction moves u(BA) - u(B),
// s(BA) - s(A) before they are added, so a move far below ulp(s(A)) is not lost.
struct ComposeShift {
    double log_sigma = 0.0;
    double du = 0.0;
    double ds = 0.0;
};

inline ComposeShift compose_shift(const LogPolarSL2& B, const LogPolarSL2& A) {
    using namespace detail;
    // a rotation factor only moves a direction; going through the general
    // formula would round a tiny s against pi/2
    if (A.log_sigma == 0.0) return {B.log_sigma, 0.0, wrap_pi(B.s - A.u - half_pi)};
    if (B.log_sigma == 0.0) return {A.log_sigma, wrap_pi(A.u - B.s + half_pi), 0.0};
    const double L1 = A.log_sigma, L2 = B.log_sigma;
    const double delta = wrap_pi(A.u - B.s);
    // frames line up exactly: E = +-diag, norms add without rounding
    if (std::fabs(delta) == half_pi) return {L1 + L2, 0.0, 0.0};
    const double c = -std::sin(delta);  // cos theta
    const double sn = std::cos(delta);  // sin theta, >= 0
    const double a = L1 + L2, d = L1 - L2;
    const double lc = c == 0.0 ? neg_inf : std::log(std::fabs(c));
    const double ls = sn == 0.0 ? neg_inf : std::log(sn);

    double ly = lse2(ln2 + 2.0 * lc + 2.0 * log_sinh(a), ln2 + 2.0 * ls + 2.0 * log_sinh(std::fabs(d)));
    double log_sigma = 0.5 * acosh1p_from_log(ly);

    SignedLog t1{2.0 * lc + log_2sinh(2.0 * a), c == 0.0 ? 0 : 1};
    SignedLog t2{2.0 * ls + log_2sinh(2.0 * std::fabs(d)), sn == 0.0 ? 0 : sgn(d)};
    SignedLog t2n{t2.l, -t2.sign};
    // E^T E: P - R and 2Q
    SignedLog U = slog_add(t1, t2);
    SignedLog Q2{ln2 + lc + ls + log_2sinh(2.0 * L2), -sgn(c) * (sn == 0.0 ? 0 : 1)};
    // E E^T: difference of diagonals and twice the off-diagonal
    SignedLog V = slog_add(t1, t2n);
    SignedLog W2{ln2 + lc + ls + log_2sinh(2.0 * L1), sgn(c) * (sn == 0.0 ? 0 : 1)};

    double psi = half_atan2(Q2, U);
    double uE = half_atan2(W2, V);
    if (std::isnan(psi) || std::isnan(uE)) {
        // E is a rotation R_phi: E21 / E11 = tan(theta) e^{-2 L2}
        double phi = std::atan2(sn * std::exp(-2.0 * L2), c);
        return {log_sigma, 0.0, -phi};
    }
    return {log_sigma, uE, psi};
}

inline LogPolarSL2 compose(const LogPolarSL2& B, const LogPolarSL2& A) {
    if (A.log_sigma == 0.0) return rotate_right(B, wrap_pi(A.u + half_pi - A.s));
    if (B.log_sigma == 0.0) return rotate_left(A, wrap_pi(B.u + half_pi - B.s));
    ComposeShift c = compose_shift(B, A);
    return {c.log_sigma, wrap_pi(B.u + c.du), wrap_pi(A.s + c.ds)};
}

// blocks[k-1] * ... * blocks[0]; blocks are listed in the order they act.
inline LogPolarSL2 compose_chain(const std::vector<LogPolarSL2>& blocks) {
    LogPolarSL2 acc;
    for (const auto& m : blocks) acc = compose(m, acc);
    return acc;
}

inline DenseSL2 reconstruct(const LogPolarSL2& P) {
    if (!(P.log_sigma <= 300.0)) throw Overflow("reconstruct: log_sigma exceeds 300");
    double e = std::exp(P.log_sigma), ie = std::exp(-P.log_sigma);
    double cu = std::cos(P.u), su = std::sin(P.u);
    double cs = std::cos(P.s), ss = std::sin(P.s);
    return {e * cu * ss - ie * su * cs, -e * cu * cs - ie * su * ss, e * su * ss + ie * cu * cs,
            -e * su * cs + ie * cu * ss};
}

inline LogPolarSL2 polar(const DenseSL2& A, double det_tol = 1e-12) {
    const double f2 = A.a * A.a + A.b * A.b + A.c * A.c + A.d * A.d;
    if (std::fabs(A.det() - 1.0) > det_tol * std::max(1.0, 0.5 * f2))
        throw NonUnimodular("polar: determinant differs from 1");
    // |A|_F^2 - 2 = (a - d)^2 + (b + c)^2 when det A = 1
    double y = 0.5 * ((A.a - A.d) * (A.a - A.d) + (A.b + A.c) * (A.b + A.c));
    double log_sigma = y == 0.0 ? 0.0 : 0.5 * detail::acosh1p_from_log(std::log(y));
    double p_r = (A.a * A.a + A.c * A.c) - (A.b * A.b + A.d * A.d);
    double q2 = 2.0 * (A.a * A.b + A.c * A.d);
    double v = (A.a * A.a + A.b * A.b) - (A.c * A.c + A.d * A.d);
    double w2 = 2.0 * (A.a * A.c + A.b * A.d);
    if ((p_r == 0.0 && q2 == 0.0) || (v == 0.0 && w2 == 0.0)) {
        return {log_sigma, 0.0, wrap_pi(half_pi - std::atan2(A.c, A.a))};
    }
    return {log_sigma, wrap_pi(0.5 * std::atan2(w2, v)), wrap_pi(half_pi + 0.5 * std::atan2(q2, p_r))};
}

struct HyperbolicityReport {
    std::size_t length = 0;
    double mu = 0.0;
    double epsilon = 0.0;
    double lambda_cap = 0.0;
    std::vector<double> forward_margins;   // ln|A^i| - i (1 - eps) ln mu, i = 1..n
    std::vector<double> backward_margins;  // same for A_{n-1}^-1, ..., A_0^-1
    bool factors_bounded = true;
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t failing_prefix = 0;        // 1-based; 0 when none fails
    bool failing_in_inverse = false;
    bool verdict = true;
};

inline HyperbolicityReport is_mu_hyperbolic(const std::vector<LogPolarSL2>& block, double mu, double epsilon,
                                            double lambda_cap) {
    if (!(mu > 1.0 && mu <= lambda_cap * (1.0 + 1e-12)))
        throw PreconditionFailed("is_mu_hyperbolic: need 1 < mu <= lambda");
    HyperbolicityReport r;
    r.length = block.size();
    r.mu = mu;
    r.epsilon = epsilon;
    r.lambda_cap = lambda_cap;
    const double rate = (1.0 - epsilon) * std::log(mu);
    const double cap = std::log(lambda_cap) + 1e-12;
    for (const auto& m : block)
        if (m.log_sigma > cap) r.factors_bounded = false;

    LogPolarSL2 acc;
    for (std::size_t i = 0; i < block.size(); ++i) {
        acc = compose(block[i], acc);
        r.forward_margins.push_back(acc.log_sigma - static_cast<double>(i + 1) * rate);
    }
    // prefixes of the inverse-reversed block have the norms of the suffix
    // products A_{n-1} ... A_{n-i}
    acc = LogPolarSL2{};
    for (std::size_t i = 0; i < block.size(); ++i) {
        acc = compose(acc, block[block.size() - 1 - i]);
        r.backward_margins.push_back(acc.log_sigma - static_cast<double>(i + 1) * rate);
    }
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (r.forward_margins[i] < r.min_margin) {
            r.min_margin = r.forward_margins[i];
            if (r.min_margin < 0) {
                r.failing_prefix = i + 1;
                r.failing_in_inverse = false;
            }
        }
        if (r.backward_margins[i] < r.min_margin) {
            r.min_margin = r.backward_margins[i];
            if (r.min_margin < 0) {
                r.failing_prefix = i + 1;
                r.failing_in_inverse = true;
            }
        }
    }
    r.verdict = r.factors_bounded && !(r.min_margin < 0.0);
    return r;
}

struct YoungResult {
    bool holds = false;
    bool vacuous = false;
    double margin = 0.0;   // ln|A^n C| - ((m + n)(1 - eps) ln mu + ln theta)
    double theta = 0.0;
    int m = 0;
    double log_norm = 0.0;
};

// Concatenation of a hyperbolic block with a matrix C, |C| >= mu^m.
inline YoungResult young_check(const std::vector<LogPolarSL2>& block, const LogPolarSL2& C, double mu,
                               double epsilon) {
    double cap = mu;
    for (const auto& b : block) cap = std::max(cap, std::exp(std::min(b.log_sigma, 700.0)));
    auto h = is_mu_hyperbolic(block, mu, epsilon, cap);
    if (!h.verdict) throw PreconditionFailed("young_check: block is not mu-hyperbolic");
    YoungResult r;
    LogPolarSL2 An = compose_chain(block);
    r.m = static_cast<int>(std::floor(C.log_sigma / std::log(mu)));
    r.theta = 0.5 * proj_dist(inverse(C).s, An.s);
    LogPolarSL2 prod = compose(An, C);
    r.log_norm = prod.log_sigma;
    double n = static_cast<double>(block.size());
    if (r.theta == 0.0) {
        r.vacuous = true;
        r.holds = true;
        r.margin = std::numeric_limits<double>::infinity();
        return r;
    }
    r.margin = prod.log_sigma - ((r.m + n) * (1.0 - epsilon) * std::log(mu) + std::log(r.theta));
    r.holds = r.margin >= 0.0;
    return r;
}

struct CancellationResult {
    bool holds = false;
    double log_norm = 0.0;  // ln|BA|
    double bound = 0.0;     // ln 2 + |ln|A| - ln|B||
};

// |BA| <= 2 max(|A|/|B|, |B|/|A|) when u(A) is the contracted line of B.
inline CancellationResult cancellation_check(const LogPolarSL2& A, const LogPolarSL2& B, double tol = 1e-12) {
    if (std::fabs(alignment_offset(B, A)) > tol)
        throw PreconditionFailed("cancellation_check: u(A) and s(B) are not aligned");
    CancellationResult r;
    r.log_norm = compose(B, A).log_sigma;
    r.bound = detail::ln2 + std::fabs(A.log_sigma - B.log_sigma);
    r.holds = r.log_norm <= r.bound;
    return r;
}

}  // namespace qpc
