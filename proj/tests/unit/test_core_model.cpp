#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcache/core_model.hpp"
#include "oracles/poisson_direct.hpp"

using namespace mcache;

TEST(BufferState, IndexAndHexRoundTrip) {
    for (std::uint64_t idx : {0ULL, 1ULL, 5ULL, 0x3ffULL, 0xabcULL}) {
        const auto s = BufferState::from_index(3, 4, idx);
        EXPECT_EQ(s.index(), idx);
        EXPECT_EQ(BufferState::from_hex(3, 4, s.hex()), s);
    }
    EXPECT_EQ(BufferState::from_index(3, 4, 0xabc).hex(), "abc");
    EXPECT_EQ(BufferState(2, 2).hex(), "0");
}

TEST(BufferState, BitLayoutIsCacheMajor) {
    BufferState s(2, 3);
    s.set(1, 2);
    EXPECT_EQ(s.index(), 1ULL << 5);
    EXPECT_TRUE(s.has(1, 2));
    EXPECT_FALSE(s.has(0, 2));
}

TEST(BufferState, SubsetOrder) {
    const auto a = BufferState::from_index(2, 2, 0b0101);
    const auto b = BufferState::from_index(2, 2, 0b0111);
    EXPECT_TRUE(a.is_subset_of(b));
    EXPECT_FALSE(b.is_subset_of(a));
    EXPECT_TRUE(BufferState(2, 2).is_subset_of(a));
    EXPECT_TRUE(BufferState::full(2, 2).is_full());
    EXPECT_EQ(BufferState::full(2, 2).count(), 4u);
}

TEST(Poisson, PmfSumsToOne) {
    for (double mu : {0.5, 2.0, 10.0}) {
        double sum = 0.0;
        for (long n = 0; n < 200; ++n) sum += poisson_pmf(n, mu);
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    EXPECT_EQ(poisson_pmf(0, 0.0), 1.0);
    EXPECT_EQ(poisson_pmf(3, 0.0), 0.0);
    EXPECT_THROW(poisson_pmf(-1, 1.0), std::domain_error);
    EXPECT_THROW(poisson_pmf(1, -1.0), std::domain_error);
}

TEST(Poisson, PmfMatchesRecurrence) {
    const double mu = 7.5;
    long double p = std::exp(-7.5L);
    for (long n = 0; n < 40; ++n) {
        EXPECT_NEAR(poisson_pmf(n, mu), static_cast<double>(p), 1e-14 * std::max(1.0, static_cast<double>(p)));
        p *= 7.5L / static_cast<long double>(n + 1);
    }
}

TEST(TruncationHorizon, FrozenValues) {
    EXPECT_EQ(truncation_horizon(2.0, 1e-9), 15u);
    EXPECT_EQ(truncation_horizon(10.0, 1e-3), 21u);
    EXPECT_EQ(truncation_horizon(10.0, 1e-9), 34u);
    EXPECT_EQ(truncation_horizon(0.0, 1e-9), 0u);
}

TEST(TruncationHorizon, MatchesDirectScan) {
    for (double mu : {0.1, 1.0, 3.3, 8.0, 25.0})
        for (double tol : {1e-3, 1e-6, 1e-9})
            EXPECT_EQ(truncation_horizon(mu, tol), oracle::horizon_by_scan(mu, tol)) << mu << " " << tol;
}

TEST(TruncationHorizon, RejectsBadTolerance) {
    EXPECT_THROW(truncation_horizon(1.0, 0.0), std::domain_error);
    EXPECT_THROW(truncation_horizon(1.0, 1.0), std::domain_error);
}

TEST(Geometry, PathlossClampsInsideReferenceDistance) {
    ScenarioConfig sc;
    EXPECT_EQ(pathloss(sc, 0.0), 1.0);
    EXPECT_EQ(pathloss(sc, 0.5), 1.0);
    EXPECT_NEAR(pathloss(sc, 10.0), std::pow(10.0, -3.5), 1e-18);
}

TEST(Geometry, CoverageNeedsBufferedSegmentAndDisk) {
    ScenarioConfig sc;
    sc.segment_count = 2;
    sc.cache_positions = {{400, 0}, {-400, 0}};
    BufferState s(2, 2);
    s.set(0, 1);
    EXPECT_TRUE(covered_by(s, 1, {420, 10}, sc));
    EXPECT_FALSE(covered_by(s, 0, {420, 10}, sc));
    EXPECT_FALSE(covered_by(s, 1, {-420, 10}, sc));
    EXPECT_FALSE(covered_by(s, 1, {0, 0}, sc));
}

TEST(Geometry, DisjointCoverage) {
    ScenarioConfig sc;
    sc.cache_positions = {{400, 0}, {-400, 0}};
    EXPECT_TRUE(coverage_disjoint(sc));
    sc.cache_positions = {{400, 0}, {400, 100}};
    EXPECT_FALSE(coverage_disjoint(sc));
}

TEST(Placement, AnnulusAndDisjoint) {
    const auto a = place_caches_annulus(20, 500, 90, 3);
    ASSERT_EQ(a.size(), 20u);
    for (auto p : a) {
        const double r = std::hypot(p.x, p.y);
        EXPECT_GE(r, 300.0 - 1e-9);
        EXPECT_LE(r, 410.0 + 1e-9);
    }
    EXPECT_EQ(a.front().x, place_caches_annulus(20, 500, 90, 3).front().x);

    ScenarioConfig sc;
    sc.cache_positions = place_caches_disjoint(6, 500, 90, 7);
    EXPECT_TRUE(coverage_disjoint(sc));
    EXPECT_THROW(place_caches_disjoint(40, 500, 90, 7), std::runtime_error);
}

TEST(Config, ValidateNamesField) {
    ScenarioConfig sc;
    sc.noise_power = 0.0;
    try {
        sc.validate();
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("noise_power"), std::string::npos);
    }
}

TEST(Sampling, TraceIsSortedAndDeterministic) {
    ScenarioConfig sc;
    sc.cache_positions = place_caches_annulus(3, 500, 90, 1);
    sc.request_intensity = 6.0;
    const auto a = sample_request_trace(sc, 11);
    const auto b = sample_request_trace(sc, 11);
    EXPECT_EQ(a.arrival_times, b.arrival_times);
    EXPECT_TRUE(std::is_sorted(a.arrival_times.begin(), a.arrival_times.end()));
    for (double t : a.arrival_times) {
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, sc.lifetime);
    }
    ASSERT_EQ(a.fading.size(), a.request_count());
    for (const auto& f : a.fading) {
        EXPECT_LE(std::hypot(f.user_position.x, f.user_position.y), sc.cell_radius);
        EXPECT_EQ(f.user_shadowing.size(), sc.segments());
        EXPECT_EQ(f.cache_shadowing.size(), 3 * sc.segments());
    }
}

TEST(Sampling, ZeroIntensityHasNoRequests) {
    ScenarioConfig sc;
    sc.request_intensity = 0.0;
    EXPECT_EQ(sample_request_trace(sc, 4).request_count(), 0u);
}

TEST(Sampling, RequestCountMeanMatchesIntensity) {
    ScenarioConfig sc;
    sc.request_intensity = 4.0;
    double total = 0.0;
    const int runs = 4000;
    for (int r = 0; r < runs; ++r) total += static_cast<double>(sample_request_trace(sc, 1000 + r).request_count());
    // Poisson(4) mean over 4000 runs has standard error 2/sqrt(4000).
    EXPECT_NEAR(total / runs, 4.0, 4 * 2.0 / std::sqrt(runs));
}

TEST(Sampling, ShadowingIsLogNormalInDecibels) {
    ScenarioConfig sc;
    sc.segment_count = 1;
    const auto pool = sample_fading_pool(sc, 20000, 5);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& f : pool) {
        const double db = 10.0 * std::log10(f.user_shadowing[0]);
        sum += db;
        sum_sq += db * db;
    }
    const double n = static_cast<double>(pool.size());
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 4 * 8.0 / std::sqrt(n));
    EXPECT_NEAR(std::sqrt(sum_sq / n - mean * mean), 8.0, 0.2);
}
