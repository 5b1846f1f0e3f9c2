#pragma once

// Extended-precision reference computations shared by the test binaries.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "qpc/sl2.hpp"

namespace oracle {

#ifdef QPC_ORACLE_DIGITS
using mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<QPC_ORACLE_DIGITS>>;
#else
using mp = boost::multiprecision::cpp_bin_float_100;
#endif

struct Mat {
    mp a = 1, b = 0, c = 0, d = 1;
    Mat operator*(const Mat& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

inline const mp& pi() {
    static const mp v = boost::multiprecision::acos(mp(-1));
    return v;
}

inline Mat rot(const mp& t) {
    mp c = cos(t), s = sin(t);
    return {c, -s, s, c};
}

// R_u diag(e^L, e^-L) R_{pi/2 - s}, built entrywise.
inline Mat dense(const qpc::LogPolarSL2& P) {
    mp e = exp(mp(P.log_sigma));
    Mat D{e, 0, 0, 1 / e};
    return rot(mp(P.u)) * D * rot(pi() / 2 - mp(P.s));
}

inline Mat dense(const qpc::DenseSL2& A) { return {A.a, A.b, A.c, A.d}; }

struct Polar {
    mp log_sigma;
    mp u, s;
};

// Polar data from the Gram matrices A^T A and A A^T.
inline Polar polar(const Mat& A) {
    mp f2 = A.a * A.a + A.b * A.b + A.c * A.c + A.d * A.d;
    mp det = A.a * A.d - A.b * A.c;
    // largest eigenvalue of A^T A
    mp disc2 = f2 * f2 - 4 * det * det;
    mp disc = disc2 > 0 ? mp(sqrt(disc2)) : mp(0);
    mp sig2 = (f2 + disc) / 2;
    Polar out;
    out.log_sigma = log(sig2) / 2;
    mp pr = A.a * A.a + A.c * A.c - A.b * A.b - A.d * A.d;
    mp q2 = 2 * (A.a * A.b + A.c * A.d);
    mp v = A.a * A.a + A.b * A.b - A.c * A.c - A.d * A.d;
    mp w2 = 2 * (A.a * A.c + A.b * A.d);
    out.s = atan2(q2, pr) / 2 + pi() / 2;
    out.u = atan2(w2, v) / 2;
    return out;
}

inline double proj_dist(const mp& a, double b) {
    mp d = a - mp(b);
    mp p = pi();
    d = d - p * floor(d / p + mp(0.5));
    return std::fabs(static_cast<double>(d));
}

inline double log_norm(const Mat& A) { return static_cast<double>(polar(A).log_sigma); }

inline qpc::LogPolarSL2 random_polar(std::mt19937_64& rng, double max_log) {
    std::uniform_real_distribution<double> L(0.0, max_log), ang(-qpc::half_pi, qpc::half_pi);
    return {L(rng), ang(rng), ang(rng)};
}

}  // namespace oracle
