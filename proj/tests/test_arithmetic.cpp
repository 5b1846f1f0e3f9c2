#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qpc/arithmetic.hpp"

using namespace qpc;
using mp = boost::multiprecision::cpp_bin_float_50;

TEST(Convergents, Golden) {
    auto c = convergents({1, 1, 1, 1, 1, 1}, 6);
    std::vector<std::int64_t> q;
    for (auto& x : c) q.push_back(x.q);
    EXPECT_EQ(q, (std::vector<std::int64_t>{1, 2, 3, 5, 8, 13}));
}

TEST(Convergents, Silver) {
    auto c = convergents({2, 2, 2, 2}, 4);
    EXPECT_EQ(c[0].q, 2);
    EXPECT_EQ(c[1].q, 5);
    EXPECT_EQ(c[2].q, 12);
    EXPECT_EQ(c[3].q, 29);
}

TEST(Convergents, SingleTerm) {
    auto c = convergents({7}, 1);
    EXPECT_EQ(c[0].p, 1);
    EXPECT_EQ(c[0].q, 7);
}

TEST(Convergents, Errors) {
    EXPECT_THROW(convergents({}, 0), PreconditionFailed);
    EXPECT_THROW(convergents({1, 0, 1}, 3), PreconditionFailed);
    EXPECT_THROW(convergents({1, 2}, 3), PreconditionFailed);
    EXPECT_THROW(convergents(std::vector<int>(120, 1), 120), Overflow);
}

TEST(Frequency, RecursionBoundAndApproximation) {
    for (auto f : {Frequency::golden(60), Frequency::silver(40), Frequency({1, 3, 1, 2, 4, 1, 1, 2, 3, 1, 2, 1, 4})}) {
        // alpha from the full stored expansion, evaluated in 50 digits
        mp alpha = mp(f.p(f.size())) / mp(f.q(f.size()));
        for (int n = 1; n < f.size(); ++n) {
            EXPECT_EQ(f.q(n + 1), f.partial_quotients()[n] * f.q(n) + f.q(n - 1));
            EXPECT_LT(f.q(n), f.q(n + 1));
            EXPECT_LE(f.q(n + 1), f.bound() * f.q(n));
            if (n + 1 < f.size()) {
                mp err = abs(mp(f.q(n)) * alpha - mp(f.p(n)));
                EXPECT_LT(err, mp(1) / mp(f.q(n + 1)));
            }
        }
    }
}

TEST(Orbit, Trivial) {
    Frequency quarter({4});
    EXPECT_NEAR(orbit_point(0.0, quarter, 2), pi, 1e-15);
    EXPECT_EQ(orbit_point(0.3, Frequency::golden(), 0), 0.3);
}

TEST(Orbit, GoldenMillionMatchesExtendedPrecision) {
    auto f = Frequency::golden(60);
    mp two_pi_mp = 2 * boost::multiprecision::acos(mp(-1));
    mp alpha = (sqrt(mp(5)) - 1) / 2;
    mp t = mp(0.3) + two_pi_mp * (mp(1000000) * alpha);
    t = t - two_pi_mp * floor(t / two_pi_mp);
    EXPECT_NEAR(orbit_point(0.3, f, 1000000), static_cast<double>(t), 1e-12);
    // frozen from the computation above
    EXPECT_NEAR(orbit_point(0.3, f, 1000000), 0.22931350460601368, 1e-12);
}

TEST(Orbit, WalkerMatchesDirectEvaluation) {
    auto f = Frequency::golden(60);
    OrbitWalker w(1.1, f);
    for (int i = 0; i < 5000; ++i) {
        ASSERT_EQ(w.point(), orbit_point(1.1, f, i));
        w.forward();
    }
    for (int i = 5000; i > -300; --i) {
        ASSERT_EQ(w.point(), orbit_point(1.1, f, i));
        w.backward();
    }
}

namespace {

// Returns by brute force in extended precision.
std::int64_t brute_return(double x, int dir, std::int64_t q, double beta, double c1) {
    mp pi_mp = boost::multiprecision::acos(mp(-1));
    mp alpha = (sqrt(mp(5)) - 1) / 2;
    mp rad = pow(mp(q), mp(-beta));
    for (std::int64_t i = 1;; ++i) {
        mp y = mp(x) + 2 * pi_mp * alpha * dir * i - mp(c1);
        y = y - pi_mp * floor(y / pi_mp + mp(0.5));
        if (abs(y) <= rad) return i;
    }
}

}  // namespace

TEST(Return, GoldenQ13FromCenter) {
    auto f = Frequency::golden(60);
    CriticalGeometry g;
    std::int64_t q = 13;
    auto rp = first_return(g.c1, f, g, q, Dir::forward);
    auto rm = first_return(g.c1, f, g, q, Dir::backward);
    EXPECT_EQ(rp, brute_return(g.c1, 1, q, g.beta, g.c1));
    EXPECT_EQ(rm, brute_return(g.c1, -1, q, g.beta, g.c1));
    // frozen values from the brute-force scan
    EXPECT_EQ(rp, 17);
    EXPECT_EQ(rm, 17);
}

TEST(Return, ForwardBackwardAsymmetry) {
    auto f = Frequency::golden(60);
    CriticalGeometry g;
    std::int64_t q = 13;
    bool found = false;
    for (double x : interval_grid(g.c1, g.radius(q), 64)) {
        auto rp = first_return(x, f, g, q, Dir::forward);
        auto rm = first_return(x, f, g, q, Dir::backward);
        EXPECT_EQ(rp, brute_return(x, 1, q, g.beta, g.c1));
        EXPECT_EQ(rm, brute_return(x, -1, q, g.beta, g.c1));
        if (rp != rm) found = true;
    }
    EXPECT_TRUE(found);
}

TEST(Return, AtLeastHalfQ) {
    CriticalGeometry g;
    for (auto f : {Frequency::golden(60), Frequency::silver(40)}) {
        for (int n = 2; n <= 9; ++n) {
            std::int64_t q = f.q(n);
            for (int comp = 0; comp < 2; ++comp)
                for (double x : interval_grid(g.center(comp), g.radius(q), 64))
                    for (Dir d : {Dir::forward, Dir::backward}) EXPECT_GE(2 * first_return(x, f, g, q, d), q);
        }
    }
}

TEST(Return, Errors) {
    auto f = Frequency::golden(60);
    CriticalGeometry g;
    EXPECT_THROW(first_return(g.c1 + 1.0, f, g, 13, Dir::forward), PreconditionFailed);
    EXPECT_THROW(first_return(g.c1, f, g, 13, Dir::forward, 3), ReturnNotFound);
}

TEST(Return, MinMaxRatio) {
    auto f = Frequency::golden(60);
    CriticalGeometry g;
    for (int n = 3; n <= 9; ++n) {
        auto r = min_max_return(f, g, f.q(n));
        EXPECT_GT(r.ratio, 0.0);
        EXPECT_LE(r.ratio, 1.0);
        EXPECT_GT(r.ratio, std::pow(2.0, -20));
    }
    auto one = min_max_return(f, g, 13, 1);
    EXPECT_GT(one.ratio, 0.0);
}

TEST(Nonresonance, Basics) {
    auto f = Frequency::golden(60);
    CriticalGeometry g;
    int N = 4;
    EXPECT_FALSE(is_nonresonant(g.c1, N, N, f, g));
    EXPECT_FALSE(is_nonresonant(g.c1 + g.radius(f.q(N)), N, N, f, g));
    EXPECT_THROW(is_nonresonant(0.0, 3, N, f, g), PreconditionFailed);
}

TEST(Nonresonance, MonotoneAndMeasure) {
    auto f = Frequency::golden(60);
    CriticalGeometry g;
    int N = 4, n = 9;
    int G = 20000, count = 0;
    for (int k = 0; k < G; ++k) {
        double x = two_pi * (k + 0.5) / G;
        bool good = is_nonresonant(x, n, N, f, g);
        if (good) {
            ++count;
            for (int m = N; m < n; ++m) EXPECT_TRUE(is_nonresonant(x, m, N, f, g));
        }
    }
    double bound = 1.0;
    for (int k = N; k < n; ++k) bound -= std::pow(static_cast<double>(f.q(k)), 1.0 - g.beta);
    EXPECT_GE(static_cast<double>(count) / G, bound - 1e-3);
}

TEST(Schedule, StartValueAndConstantCase) {
    auto f = Frequency::golden(60);
    auto s = lambda_schedule(50.0, 0.1, 0.6, 0.0, f, 4, 6);
    for (int n = 4; n < 10; ++n) {
        EXPECT_EQ(s.at(n), 0.9 * 50.0);
        EXPECT_EQ(s.tilde_at(n), 1.1 * 50.0);
    }
    EXPECT_THROW(lambda_schedule(50.0, 0.1, 1.0, 1.0, f, 4, 6), PreconditionFailed);
}

TEST(Schedule, DirectSummation) {
    auto f = Frequency::golden(60);
    auto s = lambda_schedule(50.0, 0.1, 0.6, 1.0, f, 4, 8);
    for (int n = 4; n < 12; ++n) {
        long double sum = 0;
        for (int k = 5; k <= n; ++k) sum += std::pow(static_cast<long double>(f.q(k)), -0.4L);
        EXPECT_NEAR(s.at(n), static_cast<double>(45.0L - sum), 1e-12);
        EXPECT_NEAR(s.tilde_at(n), static_cast<double>(55.0L + sum), 1e-12);
        EXPECT_NEAR(s.at(n) + s.tilde_at(n), 100.0, 1e-12);
        if (n > 4) {
            EXPECT_LT(s.at(n), s.at(n - 1));
        }
    }
    // frozen: ln lambda_7 = 45 - (8^-0.4 + 13^-0.4 + 21^-0.4)
    EXPECT_NEAR(s.at(7), 43.91040187638693, 1e-12);
    EXPECT_TRUE(s.summable_regime);
}
