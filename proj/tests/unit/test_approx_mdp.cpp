#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "mcache/approx_mdp.hpp"
#include "mcache/power_time.hpp"

using namespace mcache;

namespace {

bool rel_close(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

BufferState without(std::size_t caches, std::size_t segments, std::size_t c, std::size_t s) {
    const auto full = BufferState::full(caches, segments);
    return BufferState::from_index(caches, segments, full.index() & ~(1ULL << (c * segments + s)));
}

ScenarioConfig overlapping() {
    ScenarioConfig sc;
    sc.segment_count = 2;
    sc.cache_positions = {{380, 0}, {380, 120}};
    return sc;
}

}  // namespace

TEST(ReferenceValues, AnchorsMatchExactSolver) {
    for (const auto& sc : {fixture::desk(2, 2, 3), fixture::desk(3, 2, 4), overlapping()}) {
        const auto pool = sample_fading_pool(sc, 150, 9);
        const auto table = value_iteration(sc, 5, pool);
        const auto refs = build_reference_values(sc, 5, pool);
        const std::size_t nc = sc.cache_count(), ns = sc.segments();
        for (std::size_t k = 0; k <= 5; ++k) {
            EXPECT_TRUE(rel_close(refs.v_star(k), table.value(k, BufferState::full(nc, ns))));
            for (std::size_t c = 0; c < nc; ++c)
                for (std::size_t s = 0; s < ns; ++s)
                    EXPECT_TRUE(rel_close(refs.v_defect(c, s, k), table.value(k, without(nc, ns, c, s))))
                        << k << " " << c << " " << s;
        }
    }
}

TEST(ReferenceValues, StarIsLinearAndFreeFunctionsAgree) {
    const auto sc = fixture::desk(2, 3, 5);
    const auto refs = build_reference_values(sc, 4, 200, 13);
    for (std::size_t k = 0; k <= 4; ++k) {
        EXPECT_TRUE(rel_close(refs.v_star(k), static_cast<double>(k) * refs.v_star(1)));
        EXPECT_TRUE(rel_close(v_star(sc, k, 200, 13), refs.v_star(k)));
    }
    EXPECT_TRUE(rel_close(v_defect(sc, 1, 2, 4, 200, 13), refs.v_defect(1, 2, 4)));
    EXPECT_THROW(v_defect(sc, 2, 0, 1, 10, 1), std::out_of_range);
}

TEST(ReferenceValues, GapsAreNonnegativeAndGrow) {
    const auto sc = fixture::desk(3, 2, 6);
    const auto refs = build_reference_values(sc, 8, 300, 2);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t s = 0; s < 2; ++s) {
            EXPECT_EQ(refs.defect_gap(c, s, 0), 0.0);
            for (std::size_t k = 1; k <= 8; ++k) {
                EXPECT_GE(refs.defect_gap(c, s, k), 0.0);
                EXPECT_GE(refs.defect_gap(c, s, k), refs.defect_gap(c, s, k - 1) * (1 - 1e-12));
            }
        }
}

TEST(ReferenceValues, SerialAndParallelAreBitIdentical) {
    const auto sc = fixture::desk(4, 3, 1);
    const auto pool = sample_fading_pool(sc, 100, 3);
    const auto a = build_reference_values(sc, 6, pool, Execution::serial);
    const auto b = build_reference_values(sc, 6, pool, Execution::parallel);
    EXPECT_EQ(a.star, b.star);
    EXPECT_EQ(a.defect, b.defect);
}

TEST(ReferenceValues, TextRoundTrip) {
    const auto sc = fixture::desk(2, 2, 2);
    const auto refs = build_reference_values(sc, 4, 50, 3);
    std::stringstream buf;
    refs.write(buf);
    const auto back = ReferenceValues::read(buf);
    EXPECT_EQ(back.caches, refs.caches);
    EXPECT_EQ(back.segments, refs.segments);
    EXPECT_EQ(back.horizon, refs.horizon);
    EXPECT_EQ(back.disjoint_coverage, refs.disjoint_coverage);
    EXPECT_EQ(back.star, refs.star);
    EXPECT_EQ(back.defect, refs.defect);
}

TEST(ApproxValue, AdditiveOverMissingBits) {
    const auto sc = fixture::desk(2, 2, 3);
    const auto refs = build_reference_values(sc, 3, 60, 1);
    const auto state = BufferState::from_index(2, 2, 0b0110);
    const double expected = refs.v_star(3) + refs.defect_gap(0, 0, 3) + refs.defect_gap(1, 1, 3);
    EXPECT_TRUE(rel_close(approx_value(refs, state, 3), expected));
    EXPECT_EQ(approx_value(refs, BufferState::full(2, 2), 2), refs.v_star(2));
    EXPECT_THROW(approx_value(refs, state, 4), std::out_of_range);
}

TEST(Bounds, LowerOnlyForDisjointCoverage) {
    const auto disjoint = build_reference_values(fixture::desk(2, 2, 3), 3, 40, 1);
    const auto overlap = build_reference_values(overlapping(), 3, 40, 1);
    EXPECT_TRUE(disjoint.disjoint_coverage);
    EXPECT_FALSE(overlap.disjoint_coverage);
    EXPECT_TRUE(value_bounds(disjoint, BufferState(2, 2), 2).lower.has_value());
    EXPECT_FALSE(value_bounds(overlap, BufferState(2, 2), 2).lower.has_value());
}

TEST(Bounds, ErrorBoundIsUpperMinusLower) {
    const auto sc = fixture::desk(2, 2, 7);
    const auto refs = build_reference_values(sc, 6, 200, 3);
    for (std::size_t k = 1; k <= 6; ++k)
        for (std::uint64_t idx = 0; idx < 16; ++idx) {
            const auto state = BufferState::from_index(2, 2, idx);
            const auto b = value_bounds(refs, state, k);
            ASSERT_TRUE(b.lower.has_value());
            EXPECT_EQ(b.upper, approx_value(refs, state, k));
            EXPECT_TRUE(rel_close(approximation_error_bound(refs, state, k), b.upper - *b.lower, 1e-10));
            EXPECT_GE(approximation_error_bound(refs, state, k), -1e-9 * b.upper);
        }
    // At a single remaining stage the two bounds coincide.
    EXPECT_TRUE(rel_close(*value_bounds(refs, BufferState(2, 2), 1).lower, value_bounds(refs, BufferState(2, 2), 1).upper));
}

TEST(Bounds, SandwichExactValuesOnDesk) {
    const auto sc = fixture::desk(2, 2, 8);
    const auto pool = sample_fading_pool(sc, 400, 6);
    const auto table = value_iteration(sc, 6, pool);
    const auto refs = build_reference_values(sc, 6, pool);
    for (std::size_t k = 1; k <= 6; ++k)
        for (std::uint64_t idx = 0; idx < 16; ++idx) {
            const auto b = value_bounds(refs, BufferState::from_index(2, 2, idx), k);
            const double v = table.value(k, idx);
            EXPECT_LE(*b.lower, v * (1 + 1e-12)) << k << " " << idx;
            EXPECT_LE(v, b.upper * (1 + 1e-12)) << k << " " << idx;
        }
}

TEST(OnlineAction, NoLifetimeLeftServesTheUser) {
    const auto sc = fixture::desk(3, 2, 2);
    const auto refs = build_reference_values(sc, 10, 50, 1);
    for (const auto& f : sample_fading_pool(sc, 40, 3))
        for (const auto& p : online_action(refs, BufferState(3, 2), f, 0.0, sc)) EXPECT_EQ(p.target, kUserTarget);
}

TEST(OnlineAction, MinimizesCostPlusExpectedGaps) {
    auto sc = fixture::desk(3, 2, 2);
    sc.request_intensity = 5.0;
    const auto refs = build_reference_values(sc, 25, 100, 1);
    const double tau = 0.8;
    const double mu = sc.request_intensity * tau;
    const std::size_t h = truncation_horizon(mu, kHorizonTolerance);
    const auto state = BufferState::from_index(3, 2, 0b000100);
    for (const auto& f : sample_fading_pool(sc, 60, 4)) {
        const auto plan = online_action(refs, state, f, tau, sc);
        const auto snap = channel_snapshot(sc, f);
        for (std::size_t s = 0; s < 2; ++s) {
            if (covered_by(state, s, f.user_position, sc)) {
                EXPECT_EQ(plan[s].target, kNoTransmission);
                continue;
            }
            auto value_of = [&](double target_theta) {
                const auto a = serve_action(sc, target_theta);
                double v = action_cost(a, weights_of(sc));
                for (std::size_t c = 0; c < 3; ++c) {
                    if (state.has(c, s) || snap.cache(c, s) >= snap.user(s)) continue;
                    if (decodes_hisnr(snap.cache(c, s), a, sc.segment_bits())) continue;
                    for (std::size_t n = 1; n <= h; ++n)
                        v += poisson_pmf(static_cast<long>(n), mu) * refs.defect_gap(c, s, n);
                }
                return v;
            };
            const double chosen = value_of(plan[s].target == kUserTarget ? snap.user(s)
                                                                        : snap.cache(plan[s].target, s));
            EXPECT_LE(chosen, value_of(snap.user(s)) * (1 + 1e-12));
            for (std::size_t c = 0; c < 3; ++c)
                if (!state.has(c, s) && snap.cache(c, s) < snap.user(s))
                    EXPECT_LE(chosen, value_of(snap.cache(c, s)) * (1 + 1e-12));
        }
    }
}

TEST(OnlineAction, HorizonShortfallThrows) {
    auto sc = fixture::desk(2, 2, 2);
    sc.request_intensity = 10.0;
    const auto refs = build_reference_values(sc, 5, 20, 1);
    const auto f = sample_fading_pool(sc, 1, 1)[0];
    EXPECT_THROW(online_action(refs, BufferState(2, 2), f, 1.0, sc), std::out_of_range);
}

TEST(ApproxSystemCost, ZeroIntensityAndExactAtOneStage) {
    auto sc = fixture::desk(2, 2, 2);
    const auto pool = sample_fading_pool(sc, 80, 2);
    const auto refs = build_reference_values(sc, 15, pool);
    const auto table = value_iteration(sc, 15, pool);
    sc.request_intensity = 0.0;
    EXPECT_EQ(approx_system_cost(refs, sc), 0.0);
    sc.request_intensity = 2.0;
    EXPECT_GE(approx_system_cost(refs, sc), exact_system_cost(table, sc) * (1 - 1e-12));
}
