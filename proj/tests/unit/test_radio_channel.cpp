#include <gtest/gtest.h>

#include <cmath>

#include "mcache/power_time.hpp"
#include "mcache/radio_channel.hpp"
#include "oracles/ergodic_closed_form.hpp"
#include "oracles/theta_monte_carlo.hpp"

using namespace mcache;

// psi(1)/ln 2 and psi(8)/ln 2, evaluated to 30 digits outside this code base.
constexpr double kPsi1Bits = -0.832746177276867;
constexpr double kPsi8Bits = 2.9079559644566594;

TEST(Theta, FrozenDigammaValues) {
    EXPECT_NEAR(theta(LinkGain{1.0, 1, 1.0}), kPsi1Bits, 1e-14);
    // gain = N_T cancels the 1/N_T normalization.
    EXPECT_NEAR(theta(LinkGain{8.0, 8, 1.0}), kPsi8Bits, 1e-14);
}

TEST(Theta, ShiftsByLog2OfGainAndNoise) {
    const double base = theta(LinkGain{1e-9, 8, 1e-13});
    EXPECT_NEAR(theta(LinkGain{2e-9, 8, 1e-13}), base + 1.0, 1e-12);
    EXPECT_NEAR(theta(LinkGain{1e-9, 8, 4e-13}), base - 2.0, 1e-12);
}

TEST(Theta, AgreesWithMonteCarlo) {
    for (int nt : {1, 2, 4, 8}) {
        const auto mc = oracle::theta_monte_carlo(nt, 3e-10, 1e-13, 200000, 17 + nt);
        EXPECT_NEAR(theta(LinkGain{3e-10, nt, 1e-13}), mc.mean, 4 * mc.standard_error) << nt;
    }
}

TEST(ErgodicRate, MatchesClosedForm) {
    for (int nt : {1, 2, 4, 8, 16}) {
        for (double c : {1e-3, 0.1, 0.9, 1.0, 1.5, 10.0, 1e3, 1e6}) {
            const LinkGain link{static_cast<double>(nt), nt, 1.0};  // c equals the power
            const double expected = oracle::ergodic_bits_per_symbol(nt, link.large_scale_gain, 1.0, c);
            EXPECT_NEAR(ergodic_rate_exact(link, c, 1.0), expected, 1e-10 * expected) << nt << " " << c;
        }
    }
}

TEST(ErgodicRate, ScalesWithSymbols) {
    const LinkGain link{1e-9, 8, 1e-13};
    EXPECT_NEAR(ergodic_rate_exact(link, 2.0, 1000.0), 1000.0 * ergodic_rate_exact(link, 2.0, 1.0), 1e-9);
    EXPECT_EQ(ergodic_rate_exact(link, 2.0, 0.0), 0.0);
    EXPECT_EQ(ergodic_rate_exact(link, 0.0, 10.0), 0.0);
}

TEST(ErgodicRate, SurrogateIsALowerBoundThatTightensAtHighSnr) {
    const LinkGain link{1e-10, 8, 1e-13};
    double previous_gap = INFINITY;
    for (double p : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const double exact = ergodic_rate_exact(link, p, 1.0);
        const double approx = ergodic_rate_hisnr(link, p, 1.0);
        EXPECT_GE(exact, approx);
        EXPECT_LT(exact - approx, previous_gap);
        previous_gap = exact - approx;
    }
    EXPECT_LT(previous_gap, 1e-3);
}

TEST(Decode, ExactlySizedActionDecodes) {
    const double th = 1.7;
    const double bits = 14e6;
    const auto action = optimal_action(th, {1.0, 100.0}, bits);
    EXPECT_TRUE(decodes_hisnr(th, action, bits));
    EXPECT_FALSE(decodes_hisnr(th - 1e-3, action, bits));
    SegmentAction short_action = action;
    short_action.symbols *= 0.99;
    EXPECT_FALSE(decodes_hisnr(th, short_action, bits));
    EXPECT_FALSE(decodes_hisnr(th, SegmentAction{}, bits));
}

TEST(Decode, ExactModelIsMorePermissive) {
    const LinkGain link{1e-10, 8, 1e-13};
    const double bits = 14e6;
    const auto action = optimal_action(theta(link), {1.0, 100.0}, bits);
    EXPECT_TRUE(decodes(link, action, bits, RateModel::hisnr));
    EXPECT_TRUE(decodes(link, action, bits, RateModel::exact));
}

TEST(Snapshot, MatchesPerLinkTheta) {
    ScenarioConfig sc;
    sc.segment_count = 3;
    sc.cache_positions = {{350, 0}, {0, -380}};
    const auto pool = sample_fading_pool(sc, 3, 9);
    for (const auto& f : pool) {
        const auto snap = channel_snapshot(sc, f);
        for (std::size_t s = 0; s < 3; ++s) {
            EXPECT_DOUBLE_EQ(snap.user(s), theta(user_link(sc, f, s)));
            for (std::size_t c = 0; c < 2; ++c) EXPECT_DOUBLE_EQ(snap.cache(c, s), theta(cache_link(sc, f, c, s)));
        }
    }
}
