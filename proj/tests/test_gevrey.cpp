#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "qpc/gevrey.hpp"

using namespace qpc;
using oracle::mp;

namespace {

// exp(-x^-nu) jet in 100-digit arithmetic through the generic series recurrences.
BasicJet<mp> mp_flat_jet(double nu, double x, int K) {
    auto v = BasicJet<mp>::variable(mp(x), K);
    auto p = jet_pow(v, mp(-nu));
    return jet_exp(jet_scale(p, mp(-1)));
}

Jet poly(double x0, std::vector<double> c) { return Jet(x0, std::move(c)); }

}  // namespace

TEST(Jet, ExpSquares) {
    auto e = jet_exp(Jet::variable(0.0, 3));
    EXPECT_DOUBLE_EQ(e.c[0], 1.0);
    EXPECT_DOUBLE_EQ(e.c[1], 1.0);
    EXPECT_DOUBLE_EQ(e.c[2], 0.5);
    EXPECT_NEAR(e.c[3], 1.0 / 6, 1e-16);
    auto e2 = jet_mul(e, e);
    EXPECT_NEAR(e2.c[1], 2.0, 1e-15);
    EXPECT_NEAR(e2.c[2], 2.0, 1e-15);
    EXPECT_NEAR(e2.c[3], 4.0 / 3, 1e-15);
    auto unit = Jet::constant(0.0, 3, 1.0);
    EXPECT_EQ(jet_mul(e, unit).c, e.c);
}

TEST(Jet, PolynomialProductMatchesConvolution) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(9), b(9);
        for (auto& v : a) v = U(rng);
        for (auto& v : b) v = U(rng);
        auto p = jet_mul(poly(0.0, a), poly(0.0, b));
        for (int k = 0; k <= 8; ++k) {
            double s = 0;
            for (int j = 0; j <= k; ++j) s += a[j] * b[k - j];
            EXPECT_NEAR(p.c[k], s, 1e-13);
        }
        // commutativity, distributivity
        auto q = jet_mul(poly(0.0, b), poly(0.0, a));
        for (int k = 0; k <= 8; ++k) EXPECT_NEAR(p.c[k], q.c[k], 1e-14);
        auto lhs = jet_mul(poly(0.0, a), jet_add(poly(0.0, b), poly(0.0, a)));
        auto rhs = jet_add(p, jet_mul(poly(0.0, a), poly(0.0, a)));
        for (int k = 0; k <= 8; ++k) EXPECT_NEAR(lhs.c[k], rhs.c[k], 1e-12);
    }
}

TEST(Jet, MismatchThrows) {
    EXPECT_THROW(jet_mul(Jet(0.0, 3), Jet(0.0, 4)), PreconditionFailed);
    EXPECT_THROW(jet_add(Jet(0.0, 3), Jet(1.0, 3)), PreconditionFailed);
}

TEST(Jet, ElementaryFunctions) {
    auto as = jet_arcsin(poly(0.0, {0, 1, 0, 0}));
    EXPECT_NEAR(as.c[1], 1.0, 1e-16);
    EXPECT_NEAR(as.c[2], 0.0, 1e-16);
    EXPECT_NEAR(as.c[3], 1.0 / 6, 1e-16);
    EXPECT_EQ(as.order(), 3);
    auto r = jet_recip(Jet::constant(0.0, 5, 1.0));
    EXPECT_EQ(r.c, Jet::constant(0.0, 5, 1.0).c);
    auto sq = jet_sqrt(poly(0.0, {1, 2, 1, 0, 0}));
    EXPECT_NEAR(sq.c[0], 1, 1e-16);
    EXPECT_NEAR(sq.c[1], 1, 1e-16);
    for (int k = 2; k <= 4; ++k) EXPECT_NEAR(sq.c[k], 0, 1e-16);
    EXPECT_THROW(jet_recip(Jet(0.0, 3)), DomainViolation);
    EXPECT_THROW(jet_sqrt(Jet::constant(0.0, 3, -1.0)), DomainViolation);
    EXPECT_THROW(jet_arcsin(Jet::constant(0.0, 3, 1.0)), DomainViolation);

    // sin^2 + cos^2 = 1, log(exp(a)) = a, recip round trip
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(12);
        for (auto& v : a) v = U(rng);
        a[0] = 0.7 + U(rng);
        Jet A(0.3, a);
        auto s = jet_sin(A), c = jet_cos(A);
        auto one = jet_add(jet_mul(s, s), jet_mul(c, c));
        EXPECT_NEAR(one.c[0], 1, 1e-14);
        for (int k = 1; k < 12; ++k) EXPECT_NEAR(one.c[k], 0, 1e-12);
        auto l = jet_log(jet_exp(A));
        for (int k = 0; k < 12; ++k) EXPECT_NEAR(l.c[k], A.c[k], 1e-12);
        auto ra = jet_recip(A);
        auto u = jet_mul(A, ra);
        EXPECT_NEAR(u.c[0], 1, 1e-14);
        for (int k = 1; k < 12; ++k) EXPECT_NEAR(u.c[k], 0, 1e-10);
        auto rr = jet_recip(jet_mul(A, jet_recip(ra)));
        (void)rr;
        auto p = jet_pow(A, 2.5);
        auto p2 = jet_exp(jet_scale(jet_log(A), 2.5));
        for (int k = 0; k < 12; ++k) EXPECT_NEAR(p.c[k], p2.c[k], 1e-11 * std::max(1.0, std::fabs(p2.c[k])));
    }
}

TEST(FaaDiBruno, ChainRuleAndIdentity) {
    Jet g(0.5, {0.2, 1.3, -0.7, 0.4, 0.1, 0, 0, 0, 0});
    Jet f(0.0, {0.5, 0.8, 0.3, -0.2, 0.05, 0, 0, 0, 0});
    // n = 2: g'' f'^2 + g' f''
    double expect = g.derivative(2) * std::pow(f.derivative(1), 2) + g.derivative(1) * f.derivative(2);
    EXPECT_NEAR(faa_di_bruno(g, f, 2), expect, 1e-14);
    Jet id = Jet::variable(0.5, 8);
    auto r = jet_compose(id, f);
    for (int k = 0; k <= 8; ++k) EXPECT_NEAR(r.c[k], f.c[k], 1e-15);
}

TEST(FaaDiBruno, ExpOfSinAtZero) {
    auto s = jet_sin(Jet::variable(0.0, 8));
    auto e = jet_exp(Jet::variable(0.0, 8));  // exp at sin(0) = 0
    auto r = faa_di_bruno_check(e, s, 8);
    EXPECT_TRUE(r.agree);
    // (e^{sin x})^(5)(0) = 0 from the symbolic expansion 1 + x + x^2/2 - x^4/8 - x^5/15 + ...
    EXPECT_NEAR(faa_di_bruno(e, s, 5), -8.0, 1e-12);
    EXPECT_NEAR(faa_di_bruno(e, s, 4), -3.0, 1e-12);
}

TEST(FaaDiBruno, RandomJets) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> a(9), b(9);
        for (auto& v : a) v = U(rng);
        for (auto& v : b) v = U(rng);
        auto r = faa_di_bruno_check(Jet(b[0], a), Jet(0.0, b), 8);
        EXPECT_TRUE(r.agree) << r.max_rel_error;
    }
    EXPECT_THROW(faa_di_bruno_check(Jet(0, 9), Jet(0, 9), 9), PreconditionFailed);
}

TEST(Partition, Identity) {
    EXPECT_TRUE(partition_identity_check(1, 0.7).holds);
    auto r = partition_identity_check(3, 2.0);
    EXPECT_DOUBLE_EQ(r.sum, 18.0);
    EXPECT_EQ(partition_identity_check(5, 0.0).sum, 0.0);
    for (int n = 1; n <= 12; ++n)
        for (double R : {-0.5, 0.1, 1.0, 2.0}) EXPECT_TRUE(partition_identity_check(n, R).holds) << n << " " << R;
    EXPECT_THROW(partition_identity_check(13, 1.0), PreconditionFailed);
}

TEST(Bump, CoefficientTable) {
    auto t = bump_coefficients(0.5, 40);
    EXPECT_DOUBLE_EQ(static_cast<double>(t.a(1, 1)), 0.5);
    EXPECT_DOUBLE_EQ(static_cast<double>(t.a(2, 2)), 0.25);
    EXPECT_DOUBLE_EQ(static_cast<double>(t.a(2, 1)), -0.5 * 1.5);
    EXPECT_EQ(t.violations(), 0);
    EXPECT_GT(t.worst_margin(), 0.0);
    for (double nu : {0.3, 0.8, 2.5}) EXPECT_EQ(bump_coefficients(nu, 60).violations(), 0);
    EXPECT_THROW(bump_coefficients(0.5, 61), PreconditionFailed);
}

TEST(Bump, ValuesAndDerivatives) {
    EXPECT_EQ(bump_eval(0.5, 0.0), 0.0);
    for (int n = 0; n < 10; ++n) EXPECT_EQ(bump_derivative(0.5, 0.0, n), 0.0);
    EXPECT_NEAR(bump_derivative(1.0, 1.0, 1), std::exp(-1.0), 1e-16);
    // frozen from arbitrary-precision numerical differentiation
    EXPECT_NEAR(bump_derivative(0.5, 0.3, 10) / 2570543747.686266852, 1.0, 1e-10);
    EXPECT_NEAR(bump_derivative(0.5, 0.3, 1), 0.49020587040884329, 1e-15);
    EXPECT_NEAR(bump_derivative(0.5, 0.3, 2), -0.95938039068656269, 1e-14);
    // parity
    EXPECT_NEAR(bump_derivative(0.5, -0.3, 3), -bump_derivative(0.5, 0.3, 3), 1e-12);
}

TEST(Bump, MatchesExtendedPrecisionSeries) {
    for (double nu : {0.3, 0.5, 0.8}) {
        FlatBump b(nu, 40);
        for (int i = 0; i < 20; ++i) {
            double x = 0.05 + 1.5 * i / 19.0;
            auto ref = mp_flat_jet(nu, x, 10);
            for (int n = 0; n <= 10; ++n) {
                double want = static_cast<double>(ref.derivative(n));
                EXPECT_NEAR(b.derivative(x, n), want, 1e-8 * std::fabs(want)) << nu << " " << x << " " << n;
            }
        }
    }
}

TEST(Bump, FiniteDifferenceCrossCheck) {
    FlatBump b(0.5, 10);
    for (double x : {0.2, 0.5, 1.0}) {
        double h = 1e-3 * x;
        for (int n = 1; n <= 6; ++n) {
            // central difference of the (n-1)-th derivative
            double fd = (b.derivative(x + h, n - 1) - b.derivative(x - h, n - 1)) / (2 * h);
            EXPECT_NEAR(fd, b.derivative(x, n), 1e-4 * std::fabs(b.derivative(x, n)) + 1e-12);
        }
    }
}

TEST(PeriodicBump, FlatZerosAndMidpoint) {
    double c1 = 0.5, nu = 0.5;
    auto g = periodic_bump(c1, nu, 1e-4);
    EXPECT_EQ(g(c1), 0.0);
    EXPECT_EQ(g(c1 + pi), 0.0);
    EXPECT_NEAR(g(c1 + half_pi), 1e-4 * std::exp(-2.0 * std::pow(2.0 / pi, nu)), 1e-18);
    EXPECT_NEAR(g(c1 + half_pi) / 1e-4, 0.20275252716897400, 1e-15);
    for (Side s : {Side::below, Side::above}) {
        auto j = g.jet(c1, 20, s);
        for (double v : j.c) EXPECT_EQ(v, 0.0);
    }
    // 2 pi periodicity
    for (double x : {0.1, 1.0, 2.0, 3.0}) EXPECT_NEAR(g(x + two_pi), g(x), 1e-20);
    // near the zero the low derivatives are below exp(-t^-nu) scale
    auto near = g.jet(c1 + 1e-4, 2);
    for (double v : near.c) EXPECT_LT(std::fabs(v), 1e-30);
}

TEST(PeriodicBump, DerivativeEnvelope) {
    double c1 = 0.5, nu = 0.5;
    auto g = periodic_bump(c1, nu);
    // fit C on a coarse grid, verify on a fine one
    double logC = 0;
    auto fit = uniform_grid(c1 + 0.005, c1 + pi - 0.005, 64);
    for (double x : fit) {
        auto j = g.jet(x, 20);
        for (int n = 1; n <= 20; ++n) {
            double l = std::log(std::fabs(j.derivative(n))) - periodic_bump_log_envelope(x, c1, nu) -
                       (1 + 1 / nu) * std::lgamma(n + 1.0);
            logC = std::max(logC, l / n);
        }
    }
    auto check = uniform_grid(c1 + 0.005, c1 + pi - 0.005, 701);
    int bad = 0;
    for (double x : check) {
        auto j = g.jet(x, 20);
        for (int n = 1; n <= 20; ++n) {
            double l = std::log(std::fabs(j.derivative(n)));
            if (l > n * logC + periodic_bump_log_envelope(x, c1, nu) + (1 + 1 / nu) * std::lgamma(n + 1.0) + n * std::log(1.05))
                ++bad;
        }
    }
    EXPECT_EQ(bad, 0) << "C = " << std::exp(logC);
}

TEST(SampleAngle, Basics) {
    double c = 1e-4, c1 = 0.5, nu = 0.5;
    auto phi = sample_angle(c, c1, nu);
    EXPECT_EQ(phi(c1), 0.0);
    EXPECT_NEAR(phi(c1 + half_pi), std::asin(c * 0.20275252716897400), 1e-19);
    for (double t : {0.01, 0.05, 0.2, 0.6}) {
        EXPECT_GE(std::fabs(phi(c1 + t)), 0.5 * c * std::exp(-std::pow(t, -nu)));
        EXPECT_LE(std::fabs(phi(c1 + t)), pi / 6);
    }
    EXPECT_THROW(sample_angle(1e-3, c1, nu), PreconditionFailed);
}

TEST(Plateau, Values) {
    CriticalGeometry g;
    double delta = default_plateau_delta(0.5, 1.2);
    EXPECT_NEAR(delta, 0.4, 1e-15);
    for (std::int64_t q : {5, 13, 34}) {
        auto f = plateau(q, g, delta);
        double r = g.radius(q);
        EXPECT_EQ(f(g.c1), 1.0);
        EXPECT_EQ(f(g.c2()), 1.0);
        EXPECT_EQ(f(g.c1 + r), 0.0);
        double v = f(g.c1 + 1.5 * r / 10);
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
        // exact on grids
        for (double x : uniform_grid(g.c1 - r / 10, g.c1 + r / 10, 101)) EXPECT_EQ(f(x), 1.0);
        for (double x : uniform_grid(g.c1 + r, g.c1 + pi - r, 1001)) EXPECT_EQ(f(x), 0.0);
        for (double x : uniform_grid(g.c1 - r, g.c1 + r, 1001)) {
            EXPECT_GE(f(x), 0.0);
            EXPECT_LE(f(x), 1.0);
        }
    }
}

TEST(Plateau, OneSidedJetsAgreeAtGluingPoints) {
    CriticalGeometry g;
    PlateauSpec p{13, g.beta, g.c1, 0.4};
    auto f = plateau(p);
    for (double b : p.breaks()) {
        auto lo = f.jet(b, 20, Side::below);
        auto hi = f.jet(b, 20, Side::above);
        // compare in profile units; the x-coefficients carry a factor scale^k
        double sk = 1;
        for (int k = 0; k <= 20; ++k, sk *= p.scale()) {
            EXPECT_NEAR(lo.c[k] / sk, hi.c[k] / sk, 1e-8) << b << " " << k;
            if (k > 0) {
                EXPECT_NEAR(hi.c[k] / sk, 0.0, 1e-8);
            }
        }
    }
}

TEST(Seminorm, TrivialCases) {
    auto xs = uniform_grid(0, 1, 33);
    auto z = seminorm_estimate(fn::constant(0.0), 2.5, 1.0, 20, xs);
    EXPECT_EQ(z.value, 0.0);
    auto one = seminorm_estimate(fn::constant(1.0), 2.5, 3.0, 20, xs);
    EXPECT_NEAR(one.value, 4 * pi * pi / 3, 1e-12);
    EXPECT_EQ(one.k_star, 0);
}

TEST(Seminorm, Monotone) {
    auto phi = sample_angle(1e-4, 0.5, 0.5);
    auto xs = uniform_grid(0.6, 2.0, 129);
    auto tab = jet_table(phi, xs, 30);
    double prev = INFINITY;
    for (double K : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        double v = seminorm_from_table(tab, 2.5, K).log_value;
        EXPECT_LE(v, prev);
        prev = v;
    }
    auto fine = uniform_grid(0.6, 2.0, 257);
    EXPECT_GE(seminorm_estimate(phi, 2.5, 1.0, 30, fine).log_value,
              seminorm_estimate(phi, 2.5, 1.0, 30, xs).log_value - 1e-12);
    EXPECT_GE(seminorm_estimate(phi, 2.5, 1.0, 35, xs).log_value, seminorm_estimate(phi, 2.5, 1.0, 30, xs).log_value);
}

TEST(Seminorm, LinearInAmplitude) {
    auto xs = uniform_grid(0.6, 3.5, 129);
    auto a = seminorm_estimate(periodic_bump(0.5, 0.5, 1e-4), 3.0, 2.0, 30, xs);
    auto b = seminorm_estimate(periodic_bump(0.5, 0.5, 1e-6), 3.0, 2.0, 30, xs);
    EXPECT_NEAR(a.log_value - b.log_value, std::log(100.0), 1e-12);
    EXPECT_EQ(a.k_star, b.k_star);
}

TEST(Algebra, UnitAndSine) {
    auto xs = uniform_grid(0, two_pi, 257);
    auto one = fn::constant(1.0);
    auto r = gevrey_algebra_suite(one, one, 2.5, 1.0, 1e-3, xs, 30);
    EXPECT_NEAR(r.items[0].log_lhs + log_seminorm_prefactor, r.items[0].log_rhs, 1e-12);
    auto s = fn::sin(fn::identity());
    auto rs = gevrey_algebra_suite(s, s, 2.5, 1.0, 1e-3, xs, 30);
    EXPECT_TRUE(rs.all_hold());
    for (auto& it : rs.items) EXPECT_TRUE(it.holds) << it.name;
}
