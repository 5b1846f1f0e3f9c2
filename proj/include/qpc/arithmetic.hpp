#pragma once

// Continued fractions, circle orbits and return times for a bounded-type
// rotation number.  A frequency is always given by its partial quotients;
// the rotation x -> x + 2 pi alpha is advanced with exact integer residues
// modulo the last stored denominator, so no rounding accumulates along orbits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"

namespace qpc {

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
};

// (p_n, q_n) for n = 1..count of [0; a_1, a_2, ...].
inline std::vector<Convergent> convergents(const std::vector<int>& a, std::size_t count) {
    if (a.empty()) throw PreconditionFailed("convergents: empty partial-quotient list");
    if (count > a.size()) throw PreconditionFailed("convergents: count exceeds prefix length");
    std::vector<Convergent> out;
    out.reserve(count);
    __int128 p_prev = 1, p = 0, q_prev = 0, q = 1;
    for (std::size_t k = 0; k < count; ++k) {
        if (a[k] <= 0) throw PreconditionFailed("convergents: partial quotient must be positive");
        __int128 pn = a[k] * p + p_prev;
        __int128 qn = a[k] * q + q_prev;
        if (qn > std::numeric_limits<std::int64_t>::max())
            throw Overflow("convergents: denominator exceeds 64 bits; shorten the prefix");
        p_prev = p;
        p = pn;
        q_prev = q;
        q = qn;
        out.push_back({static_cast<std::int64_t>(pn), static_cast<std::int64_t>(qn)});
    }
    return out;
}

class Frequency {
public:
    Frequency() : Frequency(std::vector<int>(60, 1)) {}

    explicit Frequency(std::vector<int> partial_quotients)
        : a_(std::move(partial_quotients)), conv_(convergents(a_, a_.size())) {
        bound_ = *std::max_element(a_.begin(), a_.end()) + 1;
    }

    static Frequency golden(std::size_t terms = 60) { return Frequency(std::vector<int>(terms, 1)); }
    static Frequency silver(std::size_t terms = 40) { return Frequency(std::vector<int>(terms, 2)); }

    const std::vector<int>& partial_quotients() const { return a_; }
    const std::vector<Convergent>& convergent_list() const { return conv_; }

    // q_n with the usual indexing: q_0 = 1, q_1 = a_1, ...
    std::int64_t q(int n) const {
        if (n == 0) return 1;
        if (n < 0 || n > static_cast<int>(conv_.size()))
            throw PreconditionFailed("Frequency::q: index " + std::to_string(n) + " out of range");
        return conv_[n - 1].q;
    }
    std::int64_t p(int n) const {
        if (n == 0) return 0;
        if (n < 0 || n > static_cast<int>(conv_.size()))
            throw PreconditionFailed("Frequency::p: index out of range");
        return conv_[n - 1].p;
    }
    int size() const { return static_cast<int>(conv_.size()); }

    // q_{n+1} <= M q_n holds with M = max a + 1.
    int bound() const { return bound_; }

    // The value of the stored finite expansion, p_K / q_K.
    long double value() const {
        return static_cast<long double>(conv_.back().p) / static_cast<long double>(conv_.back().q);
    }

    std::int64_t modulus() const { return conv_.back().q; }
    std::int64_t step() const { return conv_.back().p % conv_.back().q; }

    // i * alpha mod 1 as a residue in [0, modulus()).
    std::int64_t residue(std::int64_t i) const {
        __int128 m = modulus();
        __int128 r = (static_cast<__int128>(i) * step()) % m;
        if (r < 0) r += m;
        return static_cast<std::int64_t>(r);
    }

    long double frac(std::int64_t i) const {
        return static_cast<long double>(residue(i)) / static_cast<long double>(modulus());
    }

private:
    std::vector<int> a_;
    std::vector<Convergent> conv_;
    int bound_ = 2;
};

inline constexpr long double two_pi_l = 6.283185307179586476925286766559005768L;
inline constexpr long double pi_l = 3.141592653589793238462643383279502884L;

inline double point_from_residue(double x, std::int64_t r, std::int64_t m) {
    long double t = static_cast<long double>(x) + two_pi_l * (static_cast<long double>(r) / m);
    t = std::fmod(t, two_pi_l);
    if (t < 0) t += two_pi_l;
    double out = static_cast<double>(t);
    return out >= two_pi ? 0.0 : out;
}

// x + 2 pi i alpha mod 2 pi, computed from the exact residue of i*p mod q.
inline double orbit_point(double x, const Frequency& f, std::int64_t i) {
    return point_from_residue(x, f.residue(i), f.modulus());
}

// Steps along an orbit one rotation at a time; the residue is exact.
class OrbitWalker {
public:
    OrbitWalker(double x, const Frequency& f, std::int64_t start = 0)
        : x_(x), m_(f.modulus()), p_(f.step()), r_(f.residue(start)) {}

    double point() const { return point_from_residue(x_, r_, m_); }
    void forward() {
        r_ += p_;
        if (r_ >= m_) r_ -= m_;
    }
    void backward() {
        r_ -= p_;
        if (r_ < 0) r_ += m_;
    }

private:
    double x_;
    std::int64_t m_, p_, r_;
};

struct CriticalGeometry {
    double c1 = 0.5;
    double beta = 1.2;

    double c2() const { return c1 + pi; }
    double center(int i) const { return i == 0 ? c1 : c1 + pi; }

    // Half-width of I_n / shrink.
    double radius(std::int64_t q, double shrink = 1.0) const {
        return std::pow(static_cast<double>(q), -beta) / shrink;
    }

    // Circle distance to {c1, c1 + pi}.
    double dist(double x) const { return std::fabs(std::remainder(x - c1, pi)); }

    // Closed-interval membership in I_n / shrink.
    bool contains(double x, std::int64_t q, double shrink = 1.0) const { return dist(x) <= radius(q, shrink); }
};

enum class Dir { forward, backward };

inline std::int64_t default_return_cap(std::int64_t q) {
    double c = std::pow(static_cast<double>(q), 4.0);
    return c > 4e18 ? std::numeric_limits<std::int64_t>::max() : static_cast<std::int64_t>(c);
}

// Smallest i in [1, cap] with T^{+-i} x in I_n / shrink.
inline std::int64_t first_return(double x, const Frequency& f, const CriticalGeometry& g, std::int64_t q_n,
                                 Dir dir, std::int64_t cap = 0, double shrink = 1.0) {
    if (!g.contains(x, q_n, shrink)) throw PreconditionFailed("first_return: start point outside the interval");
    if (cap <= 0) cap = default_return_cap(q_n);
    double rad = g.radius(q_n, shrink);
    OrbitWalker w(x, f);
    for (std::int64_t i = 1; i <= cap; ++i) {
        if (dir == Dir::forward)
            w.forward();
        else
            w.backward();
        if (g.dist(w.point()) <= rad) return i;
    }
    throw ReturnNotFound("first_return: no return within cap " + std::to_string(cap) + " for q_n = " +
                         std::to_string(q_n));
}

// Interior uniform grid of `count` points on [c - w, c + w].
inline std::vector<double> interval_grid(double c, double w, int count) {
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) out[k] = c - w + (2.0 * w) * (k + 0.5) / count;
    return out;
}

struct ReturnRatio {
    std::int64_t min_r = 0;   // min of r over I_n, both directions
    std::int64_t max_r = 0;   // max of the return to I_n/10 over I_n/10
    double ratio = 0.0;
};

inline ReturnRatio min_max_return(const Frequency& f, const CriticalGeometry& g, std::int64_t q_n,
                                  int grid_size = 64, std::int64_t cap = 0) {
    ReturnRatio out;
    out.min_r = std::numeric_limits<std::int64_t>::max();
    for (int comp = 0; comp < 2; ++comp) {
        for (double x : interval_grid(g.center(comp), g.radius(q_n), grid_size)) {
            for (Dir d : {Dir::forward, Dir::backward}) {
                out.min_r = std::min(out.min_r, first_return(x, f, g, q_n, d, cap));
            }
        }
        for (double x : interval_grid(g.center(comp), g.radius(q_n, 10.0), grid_size)) {
            for (Dir d : {Dir::forward, Dir::backward}) {
                out.max_r = std::max(out.max_r, first_return(x, f, g, q_n, d, cap, 10.0));
            }
        }
    }
    out.ratio = static_cast<double>(out.min_r) / static_cast<double>(out.max_r);
    return out;
}

// Nonresonance through stage n (convergent indices N <= n).
inline bool is_nonresonant(double x, int n, int N, const Frequency& f, const CriticalGeometry& g) {
    if (n < N) throw PreconditionFailed("is_nonresonant: n < N");
    OrbitWalker w(x, f);
    std::int64_t i = 0;
    auto scan = [&](std::int64_t until, double rad) {
        for (; i < until; ++i, w.forward()) {
            if (!(g.dist(w.point()) > rad)) return false;
        }
        return true;
    };
    if (!scan(f.q(N), g.radius(f.q(N)))) return false;
    for (int k = N + 1; k <= n; ++k) {
        if (!scan(f.q(k), g.radius(f.q(k)))) return false;
    }
    return true;
}

struct LambdaSchedule {
    int N = 0;
    double log_lambda = 0.0;
    double epsilon = 0.0;
    double gamma = 0.0;
    double coeff = 1e4;
    std::vector<double> log_lambda_n;        // index k <-> stage N + k
    std::vector<double> log_lambda_tilde_n;
    double increment_sum = 0.0;
    bool summable_regime = false;             // sum coeff q^{gamma-1} < eps ln lambda

    double at(int n) const { return log_lambda_n.at(n - N); }
    double tilde_at(int n) const { return log_lambda_tilde_n.at(n - N); }
};

// Stages N..N+count-1 of ln lambda_n and ln lambda~_n.
inline LambdaSchedule lambda_schedule(double log_lambda, double epsilon, double gamma, double coeff,
                                      const Frequency& f, int N, int count) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw PreconditionFailed("lambda_schedule: gamma must lie in (0,1)");
    LambdaSchedule s;
    s.N = N;
    s.log_lambda = log_lambda;
    s.epsilon = epsilon;
    s.gamma = gamma;
    s.coeff = coeff;
    double lo = (1.0 - epsilon) * log_lambda;
    double hi = (1.0 + epsilon) * log_lambda;
    s.log_lambda_n.push_back(lo);
    s.log_lambda_tilde_n.push_back(hi);
    for (int k = 1; k < count; ++k) {
        double inc = coeff * std::pow(static_cast<double>(f.q(N + k)), gamma - 1.0);
        s.increment_sum += inc;
        lo -= inc;
        hi += inc;
        s.log_lambda_n.push_back(lo);
        s.log_lambda_tilde_n.push_back(hi);
    }
    s.summable_regime = s.increment_sum < epsilon * log_lambda;
    return s;
}

}  // namespace qpc
