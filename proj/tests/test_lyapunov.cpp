#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qpc/lyapunov.hpp"

using namespace qpc;

namespace {

const Construction& run() {
    static const Construction c = construct(ExperimentConfig{});
    return c;
}

const Frequency& golden() {
    static const Frequency f = Frequency::golden(40);
    return f;
}

double first_nonresonant(const CocycleStage& st) {
    const auto& ctx = st.context();
    for (int k = 0; k < 1000; ++k) {
        double x = two_pi * (k + 0.37) / 1000;
        if (is_nonresonant(x, st.n(), ctx.config.N, ctx.freq, ctx.geom)) return x;
    }
    return -1;
}

}  // namespace

TEST(FiniteLE, ConstantDiagonal) {
    const double L = std::log(1e6);
    CocycleFn A = [&](double) { return LogPolarSL2::hyperbolic(L, pi / 2); };
    auto e = finite_le(A, golden(), 500, 16);
    EXPECT_NEAR(e.mean, L, 1e-12);
    EXPECT_NEAR(e.min, L, 1e-12);
    EXPECT_NEAR(e.stddev, 0.0, 1e-12);
}

TEST(FiniteLE, RotationCocycleIsZero) {
    CocycleFn A = [](double x) { return LogPolarSL2::rotation(x); };
    auto e = finite_le(A, golden(), 2000, 32);
    EXPECT_LE(std::fabs(e.mean), 1e-3);
}

TEST(FiniteLE, ElementaryHyperbolicBound) {
    const double L = std::log(50.0);
    CocycleFn A = [&](double x) { return LogPolarSL2::hyperbolic(L, 0.3 * std::sin(x)); };
    auto e = finite_le(A, golden(), 300, 32);
    EXPECT_LE(e.max, L + 1e-12);
    EXPECT_GE(e.min, 0.0);
}

TEST(FiniteLE, MatchesDenseProductOnCorrectedStage) {
    const auto& st = run().corrected.front().stage;
    const auto& f = st.context().freq;
    for (double x : {0.1, 0.5 + 1e-4, 2.0, st.context().geom.center(1)}) {
        oracle::Mat P;
        OrbitWalker w(x, f);
        for (int i = 0; i < 100; ++i, w.forward()) P = oracle::dense(st.factor(w.point())) * P;
        double want = oracle::log_norm(P) / 100.0;
        EXPECT_NEAR(pointwise_le(cocycle_of(st), f, x, 100), want, 1e-8 * want) << x;
    }
}

TEST(FiniteLE, BadArguments) {
    CocycleFn A = [](double) { return LogPolarSL2{}; };
    EXPECT_THROW(finite_le(A, golden(), 0, 4), PreconditionFailed);
    EXPECT_THROW(finite_le(A, golden(), 4, 0), PreconditionFailed);
    EXPECT_THROW(pointwise_le(A, golden(), 0.1, 0), PreconditionFailed);
}

TEST(FiniteLE, ShiftedGridSameMean) {
    // offset by one grid step: same phases, reordered
    const auto& st = run().initial;
    auto a = finite_le(st, 400, 64);
    auto b = finite_le(st, 400, 64, two_pi / 64);
    EXPECT_NEAR(a.mean, b.mean, 1e-10);
}

TEST(FiniteLE, ThreadsDoNotChangeValues) {
    const auto& st = run().initial;
    CocycleFn A = cocycle_of(st);
    auto a = finite_le(A, st.context().freq, 300, 24, 1);
    auto b = finite_le(A, st.context().freq, 300, 24, 4);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.mean, b.mean);
}

TEST(Subadditivity, NoIncreaseUnderDoubling) {
    const double L = std::log(1e3);
    CocycleFn A = [&](double x) { return LogPolarSL2::hyperbolic(L, 0.8 * std::cos(x)); };
    auto r = subadditivity_check(A, golden(), 50, 4, 32, 1, 1e-9);
    EXPECT_TRUE(r.holds) << r.worst_excess;
    EXPECT_EQ(r.Ts.size(), 5u);
}

TEST(Gap, PositiveStableNoPointwiseIncrease) {
    auto rep = le_gap_experiment(run(), 1000, 64);
    ASSERT_EQ(rep.rows.size(), 2 * run().corrected.size());
    EXPECT_TRUE(rep.gap_positive);
    EXPECT_TRUE(rep.gap_stable) << rep.worst_stability;
    for (const auto& r : rep.rows) {
        EXPECT_EQ(r.pointwise_increases, 0u) << "stage " << r.stage;
        EXPECT_LE(r.corrected_ratio, 1.0 + 1e-12);
        EXPECT_NEAR(r.ratio, r.gap / rep.log_lambda, 1e-15);
    }
}

TEST(Gap, ConcentratedOnVisitingOrbits) {
    const auto& run_ = run();
    auto g = localized_gap(run_.corrected.front().stage, run_.degenerate.front(), 50, 128);
    ASSERT_GT(g.visiting, 0u);
    ASSERT_GT(g.avoiding, 0u);
    EXPECT_GT(g.gap_visiting, 5 * g.gap_avoiding);
}

TEST(Growth, NonresonantLadder) {
    const auto& st = run().corrected.front().stage;
    double x = first_nonresonant(st);
    ASSERT_GE(x, 0.0);
    auto g = nonresonant_growth_check(st, x, 2000);
    EXPECT_GE(g.ladder.size(), 3u);
    EXPECT_GE(g.min_margin, 0.0);
}

TEST(Growth, ResonantPointRejected) {
    const auto& st = run().corrected.front().stage;
    double c0 = st.context().geom.center(0);
    EXPECT_THROW(nonresonant_growth_check(st, c0, 100), PreconditionFailed);
}

TEST(Upper, DegenerateBelowCorrected) {
    const auto& run_ = run();
    const auto& corr = run_.corrected.front().stage;
    const auto& deg = run_.degenerate.front();
    // phi_0 is flat at the centres, where both stages collapse alike
    const auto& ctx = corr.context();
    double x = ctx.geom.center(0) + 0.9 * ctx.geom.radius(ctx.freq.q(corr.n())) / 10.0;
    auto u = degenerate_upper_check(deg, corr, x, 3, 0.01);
    EXPECT_TRUE(u.holds) << u.min_margin;
    // the corrected stage against itself cannot drop by rho
    auto neg = degenerate_upper_check(corr, corr, x, 3, 0.01);
    EXPECT_FALSE(neg.holds);
}

TEST(Upper, OutsideInnerIntervalRejected) {
    const auto& run_ = run();
    double far = run_.initial.context().geom.center(0) + 1.0;
    EXPECT_THROW(degenerate_upper_check(run_.degenerate.front(), run_.corrected.front().stage, far, 2, 0.01),
                 PreconditionFailed);
}
