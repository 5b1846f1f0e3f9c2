#pragma once

// The flat bump f(x) = exp(-1/|x|^nu) and its one-sided cousin exp(-1/x^p)
// (zero for x <= 0).  For x > 0
//
//     f^(n)(x) = sum_{i=1..n} a_i^n x^-(i nu + n) exp(-x^-nu)
//
// with an integer-free coefficient recurrence; derivatives are summed in log
// scale so large negative powers of x never overflow.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "jet.hpp"

namespace qpc {

class BumpCoefficients {
public:
    BumpCoefficients() = default;

    BumpCoefficients(double nu, int n_max) : nu_(nu), n_max_(n_max) {
        if (!(nu > 0.0)) throw PreconditionFailed("bump_coefficients: nu must be positive");
        if (n_max < 0 || n_max > 60) throw PreconditionFailed("bump_coefficients: n_max must lie in [0, 60]");
        const long double v = nu;
        a_.assign(static_cast<std::size_t>(n_max) + 1, {});
        a_[0] = {0.0L};
        if (n_max >= 1) a_[1] = {0.0L, v};
        for (int n = 1; n < n_max; ++n) {
            const auto& cur = a_[n];
            std::vector<long double> next(static_cast<std::size_t>(n) + 2, 0.0L);
            next[1] = -cur[1] * (v + n);
            for (int i = 2; i <= n; ++i) next[i] = cur[i - 1] * v - cur[i] * (i * v + n);
            next[n + 1] = cur[n] * v;
            a_[n + 1] = std::move(next);
        }
        for (int n = 1; n <= n_max; ++n) {
            for (int i = 1; i <= n; ++i) {
                double m = log_bound_margin(n, i);
                worst_margin_ = std::min(worst_margin_, m);
                if (m < 0.0) {
                    ++violations_;
                }
            }
        }
        if (violations_ > 0)
            throw BoundViolated("bump_coefficients: " + std::to_string(violations_) + " entries exceed the bound");
    }

    double nu() const { return nu_; }
    int n_max() const { return n_max_; }
    long double a(int n, int i) const { return a_.at(n).at(i); }
    const std::vector<long double>& row(int n) const { return a_.at(n); }

    // ln((2 nu + 2)^(n+i) (nu + n)^(n-i)) - ln|a_i^n|; +inf for zero entries.
    double log_bound_margin(int n, int i) const {
        long double v = nu_;
        long double lb = (n + i) * std::log(2 * v + 2) + (n - i) * std::log(v + n);
        long double x = std::fabs(a_[n][i]);
        if (x == 0.0L) return std::numeric_limits<double>::infinity();
        return static_cast<double>(lb - std::log(x));
    }
    int violations() const { return violations_; }
    double worst_margin() const { return worst_margin_; }

private:
    double nu_ = 0.5;
    int n_max_ = 0;
    std::vector<std::vector<long double>> a_;
    int violations_ = 0;
    double worst_margin_ = std::numeric_limits<double>::infinity();
};

inline BumpCoefficients bump_coefficients(double nu, int n_max) { return BumpCoefficients(nu, n_max); }

namespace detail {

// n-th derivative of exp(-x^-nu) at x > 0, optionally divided by n!.
inline double flat_derivative_pos(const BumpCoefficients& t, double x, int n, bool taylor) {
    const long double lx = std::log(static_cast<long double>(x));
    const long double e = std::pow(static_cast<long double>(x), -static_cast<long double>(t.nu()));
    const long double lfact = taylor ? std::lgamma(static_cast<long double>(n) + 1) : 0.0L;
    if (n == 0) return static_cast<double>(std::exp(-e));
    const auto& row = t.row(n);
    long double m = -std::numeric_limits<long double>::infinity();
    std::vector<long double> lt(static_cast<std::size_t>(n) + 1, m);
    for (int i = 1; i <= n; ++i) {
        if (row[i] == 0.0L) continue;
        lt[i] = std::log(std::fabs(row[i])) - (i * t.nu() + n) * lx;
        m = std::max(m, lt[i]);
    }
    if (m == -std::numeric_limits<long double>::infinity()) return 0.0;
    long double s = 0;
    for (int i = 1; i <= n; ++i) {
        if (row[i] == 0.0L) continue;
        s += (row[i] > 0 ? 1 : -1) * std::exp(lt[i] - m);
    }
    if (s == 0.0L) return 0.0;
    long double l = m + std::log(std::fabs(s)) - e - lfact;
    if (l < -11000.0L) return 0.0;
    return static_cast<double>((s > 0 ? 1 : -1) * std::exp(l));
}

}  // namespace detail

// exp(-1/|x|^nu), 0 at x = 0.
class FlatBump {
public:
    FlatBump() = default;
    FlatBump(double nu, int n_max = 60) : table_(nu, n_max) {}

    double nu() const { return table_.nu(); }
    const BumpCoefficients& table() const { return table_; }

    double eval(double x) const {
        if (x == 0.0) return 0.0;
        return std::exp(-std::pow(std::fabs(x), -table_.nu()));
    }

    double derivative(double x, int n) const {
        check_order(n);
        if (x == 0.0) return 0.0;
        double v = detail::flat_derivative_pos(table_, std::fabs(x), n, false);
        return (x < 0 && (n % 2)) ? -v : v;
    }

    Jet jet(double x0, int K) const {
        check_order(K);
        Jet j(x0, K);
        if (x0 == 0.0) return j;
        for (int k = 0; k <= K; ++k) {
            double v = detail::flat_derivative_pos(table_, std::fabs(x0), k, true);
            j.c[k] = (x0 < 0 && (k % 2)) ? -v : v;
        }
        return j;
    }

private:
    void check_order(int n) const {
        if (n > table_.n_max()) throw PreconditionFailed("flat bump: derivative order exceeds the prepared table");
    }
    BumpCoefficients table_;
};

// exp(-1/x^p) for x > 0, 0 for x <= 0.
class OneSidedFlat {
public:
    OneSidedFlat() = default;
    OneSidedFlat(double p, int n_max = 60) : table_(p, n_max) {}

    double power() const { return table_.nu(); }

    double eval(double x) const { return x > 0.0 ? std::exp(-std::pow(x, -table_.nu())) : 0.0; }

    double derivative(double x, int n) const {
        if (n > table_.n_max()) throw PreconditionFailed("one-sided flat: order exceeds table");
        return x > 0.0 ? detail::flat_derivative_pos(table_, x, n, false) : 0.0;
    }

    Jet jet(double x0, int K) const {
        if (K > table_.n_max()) throw PreconditionFailed("one-sided flat: order exceeds table");
        Jet j(x0, K);
        if (x0 <= 0.0) return j;
        for (int k = 0; k <= K; ++k) j.c[k] = detail::flat_derivative_pos(table_, x0, k, true);
        return j;
    }

private:
    BumpCoefficients table_;
};

inline double bump_eval(double nu, double x) { return FlatBump(nu, 0).eval(x); }

inline double bump_derivative(double nu, double x, int n) { return FlatBump(nu, std::max(n, 1)).derivative(x, n); }

}  // namespace qpc
