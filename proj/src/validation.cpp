#include "mcache/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mcache/approx_mdp.hpp"
#include "mcache/exact_solver.hpp"
#include "mcache/power_time.hpp"
#include "mcache/radio_channel.hpp"
#include "mcache/simulator.hpp"

namespace mcache {

namespace {

constexpr std::size_t kStages = 6;
constexpr double kRelTol = 1e-9;

std::string fmt(const char* format, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, format, a, b);
    return buf;
}

bool close(double a, double b) { return std::abs(a - b) <= kRelTol * std::max({1.0, std::abs(a), std::abs(b)}); }

CheckResult check_lambert_w() {
    double worst = 0.0;
    for (int i = 0; i <= 160; ++i) {
        const double x = std::pow(10.0, -8.0 + 0.1 * i);
        const double w = lambert_w0(x);
        worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::max(1.0, x));
    }
    const bool anchors = lambert_w0(0.0) == 0.0 && lambert_w0(std::exp(1.0)) == 1.0;
    return {"lambert_w_residual", worst <= 1e-12 && anchors, fmt("max scaled residual %.3g", worst)};
}

CheckResult check_optimal_action(const ScenarioConfig& sc) {
    const WeightPair weights = weights_of(sc);
    double worst = 0.0;
    for (double theta : {-10.0, -3.0, 0.0, 2.0, 8.0}) {
        const SegmentAction a = optimal_action(theta, weights, sc.segment_bits());
        const double f0 = segment_objective(a.power, theta, weights, sc.segment_bits());
        for (double step : {1e-3, -1e-3}) {
            const double f1 = segment_objective(a.power * (1.0 + step), theta, weights, sc.segment_bits());
            worst = std::max(worst, (f0 - f1) / f0);
        }
    }
    return {"optimal_action_is_local_minimum", worst <= 1e-12, fmt("max relative improvement %.3g", worst)};
}

std::vector<CheckResult> check_value_table(const ScenarioConfig& sc, const ValueTable& table,
                                           const FadingPool& pool, std::uint64_t seed, std::size_t samples) {
    std::vector<CheckResult> out;
    const std::size_t n = table.state_count();

    bool stage_ok = true;
    for (std::size_t k = 1; k <= table.stages(); ++k)
        for (std::uint64_t i = 0; i < n; ++i) stage_ok &= table.value(k, i) >= table.value(k - 1, i);
    out.push_back({"value_nondecreasing_in_stages", stage_ok, ""});

    bool inclusion_ok = true;
    for (std::size_t k = 0; k <= table.stages(); ++k)
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint64_t j = 0; j < n; ++j)
                if ((i & j) == i) inclusion_ok &= table.value(k, j) <= table.value(k, i) * (1 + kRelTol);
    out.push_back({"value_nonincreasing_in_buffer", inclusion_ok, ""});

    double build_residual = 0.0;
    double worst_z = 0.0;
    const FadingPool fresh = sample_fading_pool(sc, samples, seed ^ 0x5eed5eedULL);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto state = BufferState::from_index(sc.cache_count(), sc.segments(), i);
        const auto own = bellman_samples(sc, table, table.stages(), state, pool);
        const double own_mean = std::accumulate(own.begin(), own.end(), 0.0) / static_cast<double>(own.size());
        const double v = table.value(table.stages(), i);
        build_residual = std::max(build_residual, std::abs(own_mean - v) / std::max(1.0, v));

        // Fresh draws test generalization; both means carry sampling error.
        const auto other = bellman_samples(sc, table, table.stages(), state, fresh);
        auto moments = [](const std::vector<double>& x) {
            const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
            double ss = 0.0;
            for (double y : x) ss += (y - m) * (y - m);
            return std::pair{m, ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size())};
        };
        const auto [m1, v1] = moments(own);
        const auto [m2, v2] = moments(other);
        const double se = std::sqrt(v1 + v2);
        if (se > 0.0) worst_z = std::max(worst_z, std::abs(m1 - m2) / se);
    }
    out.push_back({"bellman_residual_on_build_pool", build_residual <= kRelTol,
                   fmt("max relative residual %.3g", build_residual)});
    out.push_back({"bellman_fresh_pool_within_4se", worst_z <= 4.0, fmt("max |z| %.3g", worst_z)});
    return out;
}

std::vector<CheckResult> check_bounds(const ScenarioConfig& sc, const ValueTable& table,
                                      const ReferenceValues& refs) {
    std::vector<CheckResult> out;
    bool anchors_ok = true;
    for (std::size_t k = 0; k <= table.stages(); ++k) {
        const auto full = BufferState::full(sc.cache_count(), sc.segments());
        anchors_ok &= close(approx_value(refs, full, k), table.value(k, full));
        for (std::size_t c = 0; c < sc.cache_count(); ++c)
            for (std::size_t s = 0; s < sc.segments(); ++s) {
                const auto state = BufferState::from_index(sc.cache_count(), sc.segments(),
                                                           full.index() & ~(1ULL << (c * sc.segments() + s)));
                anchors_ok &= close(approx_value(refs, state, k), table.value(k, state));
            }
    }
    out.push_back({"approximation_exact_at_anchors", anchors_ok, ""});

    bool upper_ok = true;
    bool lower_ok = true;
    for (std::size_t k = 1; k <= table.stages(); ++k)
        for (std::uint64_t i = 0; i < table.state_count(); ++i) {
            const auto state = BufferState::from_index(sc.cache_count(), sc.segments(), i);
            const auto b = value_bounds(refs, state, k);
            const double v = table.value(k, i);
            const double slack = kRelTol * std::max(1.0, std::abs(v));
            upper_ok &= v <= b.upper + slack;
            if (b.lower) lower_ok &= *b.lower <= v + slack;
        }
    out.push_back({"upper_bound_holds", upper_ok, ""});
    if (refs.disjoint_coverage) out.push_back({"lower_bound_holds", lower_ok, ""});
    return out;
}

std::vector<CheckResult> check_simulator(const ScenarioConfig& sc, const std::vector<Policy>& policies,
                                         std::uint64_t seed) {
    bool additive = true;
    bool monotone = true;
    bool pushed_full = true;
    for (const auto& policy : policies) {
        for (std::size_t r = 0; r < 40; ++r) {
            const auto trace = sample_request_trace(sc, replication_seed(seed, r));
            BufferState state(sc.cache_count(), sc.segments());
            double sum = 0.0;
            for (std::size_t n = 0; n < trace.request_count(); ++n) {
                const auto remaining = sc.lifetime - trace.arrival_times[n];
                const auto actions = actions_of(policy.decide(sc, state, trace.fading[n], n, remaining));
                const double cost = stage_cost(sc, state, trace.fading[n], actions);
                additive &= cost >= 0.0 && std::isfinite(cost);
                sum += cost;
                const auto next = transition(sc, state, trace.fading[n], actions);
                monotone &= state.is_subset_of(next);
                if (n == 0 && policy.kind() == PolicyKind::baseline_push_all &&
                    !std::isfinite(sc.max_transmit_power))
                    pushed_full &= next.is_full();
                state = next;
            }
            const auto result = simulate_lifetime(sc, policy, trace);
            additive &= close(result.total_cost, sum) && result.final_state == state &&
                        result.request_count == trace.request_count();
        }
    }
    return {{"cost_nonnegative_and_additive", additive, ""},
            {"buffer_trajectory_monotone", monotone, ""},
            {"push_all_fills_buffers_on_first_request", pushed_full, ""}};
}

}  // namespace

ScenarioConfig desk_instance(const ScenarioConfig& base, std::uint64_t seed) {
    ScenarioConfig sc = base;
    sc.segment_count = 2;
    sc.cache_positions = place_caches_disjoint(2, sc.cell_radius, sc.cache_service_radius, seed);
    return sc;
}

std::vector<CheckResult> run_validation_suite(const ScenarioConfig& scenario, std::uint64_t seed,
                                              std::size_t fading_samples, Execution exec) {
    const ScenarioConfig sc = scenario.cache_count() * scenario.segments() <= kMaxExactBits &&
                                      scenario.cache_count() > 0
                                  ? scenario
                                  : desk_instance(scenario, seed);
    std::vector<CheckResult> out;
    out.push_back(check_lambert_w());
    out.push_back(check_optimal_action(sc));

    const FadingPool pool = sample_fading_pool(sc, fading_samples, seed);
    const ValueTable table = value_iteration(sc, kStages, pool, exec);
    const ValueTable serial = value_iteration(sc, kStages, pool, Execution::serial);
    out.push_back({"serial_and_parallel_value_iteration_identical", table == serial, ""});
    for (auto& c : check_value_table(sc, table, pool, seed, fading_samples)) out.push_back(std::move(c));

    const ReferenceValues refs = build_reference_values(sc, kStages, pool, exec);
    for (auto& c : check_bounds(sc, table, refs)) out.push_back(std::move(c));

    ScenarioConfig sim = sc;
    sim.request_intensity = 2.0 / sim.lifetime;
    const std::size_t horizon = truncation_horizon(sim.rate_times_lifetime(), kHorizonTolerance);
    const FadingPool sim_pool = sample_fading_pool(sim, std::min<std::size_t>(fading_samples, 200), seed);
    std::vector<Policy> policies;
    for (auto kind : {PolicyKind::exact_oracle, PolicyKind::approx_online, PolicyKind::baseline_user_only,
                      PolicyKind::baseline_push_all})
        policies.push_back(make_policy(sim, kind, horizon, sim_pool, exec));
    for (auto& c : check_simulator(sim, policies, seed)) out.push_back(std::move(c));

    const auto a = estimate_average_cost(sim, policies[1], 20, seed, exec);
    const auto b = estimate_average_cost(sim, policies[1], 20, seed, Execution::serial);
    out.push_back({"replications_deterministic", a.mean == b.mean && a.half_width_95 == b.half_width_95, ""});
    return out;
}

}  // namespace mcache
