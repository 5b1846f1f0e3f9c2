#pragma once

// Truncated Taylor series.  A jet of order K at x0 stores c_k = f^(k)(x0) / k!
// for k = 0..K.  All operations are the usual power-series recurrences; the
// scalar type is a template parameter so the same code runs in extended
// precision for reference values.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qpc {

template <class T>
struct BasicJet {
    T x0 = 0;
    std::vector<T> c;

    BasicJet() : c(1, T(0)) {}
    BasicJet(T base, int order) : x0(base), c(static_cast<std::size_t>(order) + 1, T(0)) {}
    BasicJet(T base, std::vector<T> coeffs) : x0(base), c(std::move(coeffs)) {}

    static BasicJet constant(T base, int order, T value) {
        BasicJet j(base, order);
        j.c[0] = value;
        return j;
    }
    // the identity function x at x0
    static BasicJet variable(T base, int order) {
        BasicJet j(base, order);
        j.c[0] = base;
        if (order >= 1) j.c[1] = 1;
        return j;
    }

    int order() const { return static_cast<int>(c.size()) - 1; }
    T value() const { return c[0]; }

    // f^(k)(x0)
    T derivative(int k) const {
        T f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return c.at(k) * f;
    }
};

using Jet = BasicJet<double>;

namespace detail {

template <class T>
void check_compatible(const BasicJet<T>& a, const BasicJet<T>& b) {
    if (a.c.size() != b.c.size()) throw PreconditionFailed("jet: order mismatch");
    if (!(a.x0 == b.x0)) throw PreconditionFailed("jet: base point mismatch");
}

}  // namespace detail

template <class T>
BasicJet<T> jet_add(const BasicJet<T>& a, const BasicJet<T>& b) {
    detail::check_compatible(a, b);
    BasicJet<T> r = a;
    for (std::size_t k = 0; k < r.c.size(); ++k) r.c[k] += b.c[k];
    return r;
}

template <class T>
BasicJet<T> jet_sub(const BasicJet<T>& a, const BasicJet<T>& b) {
    detail::check_compatible(a, b);
    BasicJet<T> r = a;
    for (std::size_t k = 0; k < r.c.size(); ++k) r.c[k] -= b.c[k];
    return r;
}

template <class T>
BasicJet<T> jet_scale(const BasicJet<T>& a, T s) {
    BasicJet<T> r = a;
    for (auto& v : r.c) v *= s;
    return r;
}

template <class T>
BasicJet<T> jet_shift(const BasicJet<T>& a, T s) {
    BasicJet<T> r = a;
    r.c[0] += s;
    return r;
}

template <class T>
BasicJet<T> jet_mul(const BasicJet<T>& a, const BasicJet<T>& b) {
    detail::check_compatible(a, b);
    const int K = a.order();
    BasicJet<T> r(a.x0, K);
    for (int k = 0; k <= K; ++k) {
        T s = 0;
        for (int j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
        r.c[k] = s;
    }
    return r;
}

template <class T>
BasicJet<T> jet_recip(const BasicJet<T>& a) {
    if (a.c[0] == T(0)) throw DomainViolation("jet_recip: zero constant term");
    const int K = a.order();
    BasicJet<T> r(a.x0, K);
    T inv = T(1) / a.c[0];
    r.c[0] = inv;
    for (int k = 1; k <= K; ++k) {
        T s = 0;
        for (int j = 1; j <= k; ++j) s += a.c[j] * r.c[k - j];
        r.c[k] = -inv * s;
    }
    return r;
}

template <class T>
BasicJet<T> jet_div(const BasicJet<T>& a, const BasicJet<T>& b) {
    return jet_mul(a, jet_recip(b));
}

template <class T>
BasicJet<T> jet_sqrt(const BasicJet<T>& a) {
    using std::sqrt;
    if (!(a.c[0] > T(0))) throw DomainViolation("jet_sqrt: constant term must be positive");
    const int K = a.order();
    BasicJet<T> r(a.x0, K);
    r.c[0] = sqrt(a.c[0]);
    for (int k = 1; k <= K; ++k) {
        T s = a.c[k];
        for (int j = 1; j < k; ++j) s -= r.c[j] * r.c[k - j];
        r.c[k] = s / (2 * r.c[0]);
    }
    return r;
}

template <class T>
BasicJet<T> jet_exp(const BasicJet<T>& a) {
    using std::exp;
    const int K = a.order();
    BasicJet<T> r(a.x0, K);
    r.c[0] = exp(a.c[0]);
    for (int k = 1; k <= K; ++k) {
        T s = 0;
        for (int j = 1; j <= k; ++j) s += T(j) * a.c[j] * r.c[k - j];
        r.c[k] = s / T(k);
    }
    return r;
}

template <class T>
BasicJet<T> jet_log(const BasicJet<T>& a) {
    using std::log;
    if (!(a.c[0] > T(0))) throw DomainViolation("jet_log: constant term must be positive");
    const int K = a.order();
    BasicJet<T> r(a.x0, K);
    r.c[0] = log(a.c[0]);
    for (int k = 1; k <= K; ++k) {
        T s = 0;
        for (int j = 1; j < k; ++j) s += T(j) * r.c[j] * a.c[k - j];
        r.c[k] = (a.c[k] - s / T(k)) / a.c[0];
    }
    return r;
}

// a^p for a positive constant term.
template <class T>
BasicJet<T> jet_pow(const BasicJet<T>& a, T p) {
    using std::pow;
    if (!(a.c[0] > T(0))) throw DomainViolation("jet_pow: constant term must be positive");
    const int K = a.order();
    BasicJet<T> r(a.x0, K);
    r.c[0] = pow(a.c[0], p);
    for (int k = 1; k <= K; ++k) {
        T s = 0;
        for (int j = 1; j <= k; ++j) s += ((p + 1) * T(j) - T(k)) * a.c[j] * r.c[k - j];
        r.c[k] = s / (T(k) * a.c[0]);
    }
    return r;
}

template <class T>
void jet_sincos(const BasicJet<T>& a, BasicJet<T>& s, BasicJet<T>& co) {
    using std::cos;
    using std::sin;
    const int K = a.order();
    s = BasicJet<T>(a.x0, K);
    co = BasicJet<T>(a.x0, K);
    s.c[0] = sin(a.c[0]);
    co.c[0] = cos(a.c[0]);
    for (int k = 1; k <= K; ++k) {
        T ss = 0, cc = 0;
        for (int j = 1; j <= k; ++j) {
            ss += T(j) * a.c[j] * co.c[k - j];
            cc += T(j) * a.c[j] * s.c[k - j];
        }
        s.c[k] = ss / T(k);
        co.c[k] = -cc / T(k);
    }
}

template <class T>
BasicJet<T> jet_sin(const BasicJet<T>& a) {
    BasicJet<T> s, c;
    jet_sincos(a, s, c);
    return s;
}

template <class T>
BasicJet<T> jet_cos(const BasicJet<T>& a) {
    BasicJet<T> s, c;
    jet_sincos(a, s, c);
    return c;
}

// Integrates a derivative series: r' = d, r(x0) = value.
// The result has one order more than d.
template <class T>
BasicJet<T> jet_integrate(const BasicJet<T>& d, T value) {
    const int K = d.order() + 1;
    BasicJet<T> r(d.x0, K);
    r.c[0] = value;
    for (int k = 1; k <= K; ++k) r.c[k] = d.c[k - 1] / T(k);
    return r;
}

template <class T>
BasicJet<T> jet_derivative(const BasicJet<T>& a) {
    const int K = a.order();
    BasicJet<T> r(a.x0, K > 0 ? K - 1 : 0);
    for (int k = 0; k < K; ++k) r.c[k] = T(k + 1) * a.c[k + 1];
    return r;
}

template <class T>
BasicJet<T> jet_arcsin(const BasicJet<T>& a) {
    using std::abs;
    using std::asin;
    if (!(abs(a.c[0]) < T(1))) throw DomainViolation("jet_arcsin: |constant term| must be < 1");
    if (a.order() == 0) return BasicJet<T>::constant(a.x0, 0, asin(a.c[0]));
    // arcsin(a)' = a' / sqrt(1 - a^2)
    auto one_minus = jet_scale(jet_mul(a, a), T(-1));
    one_minus.c[0] += 1;
    auto h = jet_recip(jet_sqrt(one_minus));
    auto da = jet_derivative(a);
    BasicJet<T> ht(a.x0, std::vector<T>(h.c.begin(), h.c.begin() + da.c.size()));
    return jet_integrate(jet_mul(da, ht), asin(a.c[0]));
}

// g o f, where outer is the jet of g at f(x0) and inner is the jet of f at x0.
template <class T>
BasicJet<T> jet_compose(const BasicJet<T>& outer, const BasicJet<T>& inner) {
    if (outer.c.size() != inner.c.size()) throw PreconditionFailed("jet_compose: order mismatch");
    const int K = inner.order();
    BasicJet<T> h = inner;
    h.c[0] = 0;
    BasicJet<T> r = BasicJet<T>::constant(inner.x0, K, outer.c[K]);
    for (int m = K - 1; m >= 0; --m) {
        r = jet_mul(r, h);
        r.c[0] += outer.c[m];
    }
    return r;
}

// Jet of f(a x + b) at x0 from the jet of f at a x0 + b.
template <class T>
BasicJet<T> jet_affine_pullback(const BasicJet<T>& outer, T a, T x0) {
    BasicJet<T> r = outer;
    r.x0 = x0;
    T p = 1;
    for (auto& v : r.c) {
        v *= p;
        p *= a;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Partition sums

// Calls fn(k) for every k = (k_1, ..., k_n) with k_1 + 2 k_2 + ... + n k_n = n.
template <class Fn>
void for_each_partition(int n, Fn&& fn) {
    std::vector<int> k(static_cast<std::size_t>(n) + 1, 0);
    auto rec = [&](auto&& self, int part, int remaining) -> void {
        if (part == 0) {
            if (remaining == 0) fn(k);
            return;
        }
        for (int m = 0; m * part <= remaining; ++m) {
            k[part] = m;
            self(self, part - 1, remaining - m * part);
        }
        k[part] = 0;
    };
    rec(rec, n, n);
}

inline double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// (g o f)^(n)(x0) by the partition formula, from the jets of g at f(x0) and of f at x0.
inline double faa_di_bruno(const Jet& outer, const Jet& inner, int n) {
    double total = 0;
    for_each_partition(n, [&](const std::vector<int>& k) {
        int order = 0;
        double term = factorial(n);
        for (int j = 1; j <= n; ++j) {
            if (k[j] == 0) continue;
            order += k[j];
            // f^(j)/j! = inner.c[j]
            term *= std::pow(inner.c[j], k[j]) / factorial(k[j]);
        }
        total += term * outer.derivative(order);
    });
    return total;
}

struct FaaDiBrunoResult {
    bool agree = true;
    double max_rel_error = 0;
    int worst_n = 0;
};

inline FaaDiBrunoResult faa_di_bruno_check(const Jet& outer, const Jet& inner, int n_max, double tol = 1e-9) {
    if (n_max > 8) throw PreconditionFailed("faa_di_bruno_check: n <= 8");
    if (outer.order() < n_max || inner.order() < n_max) throw PreconditionFailed("faa_di_bruno_check: jets too short");
    Jet o(outer.x0, std::vector<double>(outer.c.begin(), outer.c.begin() + n_max + 1));
    Jet i(inner.x0, std::vector<double>(inner.c.begin(), inner.c.begin() + n_max + 1));
    Jet comp = jet_compose(o, i);
    FaaDiBrunoResult r;
    for (int n = 1; n <= n_max; ++n) {
        double a = faa_di_bruno(o, i, n);
        double b = comp.derivative(n);
        // scale by the size of the individual partition terms
        double scale = 0;
        for_each_partition(n, [&](const std::vector<int>& k) {
            int order = 0;
            double term = factorial(n);
            for (int j = 1; j <= n; ++j) {
                order += k[j];
                term *= std::pow(std::fabs(i.c[j]), k[j]) / factorial(k[j]);
            }
            scale += term * std::fabs(o.derivative(order));
        });
        double err = scale > 0 ? std::fabs(a - b) / scale : std::fabs(a - b);
        if (err > r.max_rel_error) {
            r.max_rel_error = err;
            r.worst_n = n;
        }
    }
    r.agree = r.max_rel_error <= tol;
    return r;
}

struct PartitionIdentityResult {
    double sum = 0;
    double closed_form = 0;
    double rel_error = 0;
    bool holds = false;
};

// sum over partitions of k! / (k_1! ... k_n!) R^k against R (1 + R)^(n-1).
inline PartitionIdentityResult partition_identity_check(int n, double R, double tol = 1e-10) {
    if (n < 1 || n > 12) throw PreconditionFailed("partition_identity_check: 1 <= n <= 12");
    PartitionIdentityResult r;
    double scale = 0;  // sum of |terms|, used only when the closed form vanishes
    for_each_partition(n, [&](const std::vector<int>& k) {
        int total = 0;
        double denom = 1;
        for (int j = 1; j <= n; ++j) {
            total += k[j];
            denom *= factorial(k[j]);
        }
        double term = factorial(total) / denom * std::pow(R, total);
        r.sum += term;
        scale += std::fabs(term);
    });
    r.closed_form = R * std::pow(1 + R, n - 1);
    double ref = r.closed_form != 0.0 ? std::fabs(r.closed_form) : std::max(scale, 1.0);
    r.rel_error = std::fabs(r.sum - r.closed_form) / ref;
    r.holds = r.rel_error <= tol;
    return r;
}

}  // namespace qpc
