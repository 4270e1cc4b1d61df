#include "mcache/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>

#include "mcache/power_time.hpp"

namespace mcache {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Reproducible regardless of how the replications were scheduled.
double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

Plan user_only_plan(const ScenarioConfig& config, const BufferState& state, const FadingRealization& fading,
                    const ChannelSnapshot& snap) {
    Plan plan(config.segments());
    for (std::size_t s = 0; s < config.segments(); ++s) {
        if (covered_by(state, s, fading.user_position, config)) continue;
        plan[s] = {serve_action(config, snap.user(s)), kUserTarget};
    }
    return plan;
}

Plan push_all_plan(const ScenarioConfig& config, const BufferState& state, const FadingRealization& fading,
                   const ChannelSnapshot& snap) {
    Plan plan(config.segments());
    for (std::size_t s = 0; s < config.segments(); ++s) {
        if (covered_by(state, s, fading.user_position, config)) continue;
        int target = kUserTarget;
        double worst = snap.user(s);
        for (std::size_t c = 0; c < config.cache_count(); ++c) {
            if (snap.cache(c, s) < worst) {
                worst = snap.cache(c, s);
                target = static_cast<int>(c);
            }
        }
        try {
            plan[s] = {serve_action(config, worst), target};
        } catch (const std::domain_error&) {
            // The power cap rules out the worst receiver; fall back to the user.
            plan[s] = {serve_action(config, snap.user(s)), kUserTarget};
        }
    }
    return plan;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::exact_oracle: return "exact_oracle";
        case PolicyKind::approx_online: return "approx_online";
        case PolicyKind::baseline_user_only: return "baseline_user_only";
        case PolicyKind::baseline_push_all: return "baseline_push_all";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (auto k : {PolicyKind::exact_oracle, PolicyKind::approx_online, PolicyKind::baseline_user_only,
                   PolicyKind::baseline_push_all})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

Policy Policy::exact_oracle(std::shared_ptr<const ValueTable> table) {
    if (!table) throw std::invalid_argument("exact_oracle needs a value table");
    Policy p(PolicyKind::exact_oracle);
    p.table_ = std::move(table);
    return p;
}

Policy Policy::approx_online(std::shared_ptr<const ReferenceValues> refs) {
    if (!refs) throw std::invalid_argument("approx_online needs reference values");
    Policy p(PolicyKind::approx_online);
    p.refs_ = std::move(refs);
    return p;
}

Policy Policy::baseline_user_only() { return Policy(PolicyKind::baseline_user_only); }
Policy Policy::baseline_push_all() { return Policy(PolicyKind::baseline_push_all); }

std::size_t Policy::horizon() const {
    if (table_) return table_->stages();
    if (refs_) return refs_->horizon;
    return std::numeric_limits<std::size_t>::max();
}

Plan Policy::decide(const ScenarioConfig& config, const BufferState& state, const FadingRealization& fading,
                    std::size_t request_index, double remaining_lifetime) const {
    switch (kind_) {
        case PolicyKind::exact_oracle:
            return random_stage_policy(*table_, state, fading, remaining_lifetime, config);
        case PolicyKind::approx_online:
            return online_action(*refs_, state, fading, remaining_lifetime, config);
        case PolicyKind::baseline_user_only:
            return user_only_plan(config, state, fading, channel_snapshot(config, fading));
        case PolicyKind::baseline_push_all:
            if (request_index == 0) return push_all_plan(config, state, fading, channel_snapshot(config, fading));
            return user_only_plan(config, state, fading, channel_snapshot(config, fading));
    }
    throw std::logic_error("unknown policy kind");
}

Policy make_policy(const ScenarioConfig& config, PolicyKind kind, std::size_t horizon, const FadingPool& pool,
                   Execution exec) {
    switch (kind) {
        case PolicyKind::exact_oracle:
            require_tractable(config);
            return Policy::exact_oracle(std::make_shared<ValueTable>(value_iteration(config, horizon, pool, exec)));
        case PolicyKind::approx_online:
            return Policy::approx_online(
                std::make_shared<ReferenceValues>(build_reference_values(config, horizon, pool, exec)));
        case PolicyKind::baseline_user_only: return Policy::baseline_user_only();
        case PolicyKind::baseline_push_all: return Policy::baseline_push_all();
    }
    throw std::logic_error("unknown policy kind");
}

LifetimeResult simulate_lifetime(const ScenarioConfig& config, const Policy& policy, const RequestTrace& trace,
                                 RateModel model) {
    const std::size_t needed = truncation_horizon(config.rate_times_lifetime(), kHorizonTolerance);
    if (policy.horizon() < needed)
        throw std::out_of_range("policy horizon " + std::to_string(policy.horizon()) + " is below the required " +
                                std::to_string(needed));

    LifetimeResult result;
    result.final_state = BufferState(config.cache_count(), config.segments());
    result.request_count = trace.request_count();
    result.per_request_costs.reserve(trace.request_count());
    for (std::size_t n = 0; n < trace.request_count(); ++n) {
        const auto& fading = trace.fading[n];
        const double remaining = config.lifetime - trace.arrival_times[n];
        const auto actions = actions_of(policy.decide(config, result.final_state, fading, n, remaining));
        const double cost = stage_cost(config, result.final_state, fading, actions);
        result.per_request_costs.push_back(cost);
        result.final_state = transition(config, result.final_state, fading, actions, model);
    }
    result.total_cost = pairwise_sum(result.per_request_costs.data(), result.per_request_costs.size());
    return result;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) {
    return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(replication));
}

std::vector<double> replicate_costs(const ScenarioConfig& config, const Policy& policy, std::size_t replications,
                                    std::uint64_t rng_seed, Execution exec) {
    std::vector<double> totals(replications, 0.0);
    auto one = [&](std::size_t r) {
        const auto trace = sample_request_trace(config, replication_seed(rng_seed, r));
        totals[r] = simulate_lifetime(config, policy, trace).total_cost;
    };
    if (exec == Execution::serial) {
        for (std::size_t r = 0; r < replications; ++r) one(r);
        return totals;
    }
    // Exceptions cannot leave an OpenMP region; capture the first one.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(replications); ++r) {
        try {
            one(static_cast<std::size_t>(r));
        } catch (...) {
#pragma omp critical(mcache_replicate_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return totals;
}

CostEstimate summarize(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("at least two replications are required");
    const double mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
    const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    return {mean, 1.96 * std::sqrt(var / static_cast<double>(n)), n};
}

CostEstimate estimate_average_cost(const ScenarioConfig& config, const Policy& policy, std::size_t replications,
                                   std::uint64_t rng_seed, Execution exec) {
    if (replications < 2) throw std::invalid_argument("replications must be at least 2");
    return summarize(replicate_costs(config, policy, replications, rng_seed, exec));
}

CostEstimate compare_policies(const ScenarioConfig& config, const Policy& a, const Policy& b,
                              std::size_t replications, std::uint64_t rng_seed, Execution exec) {
    if (replications < 2) throw std::invalid_argument("replications must be at least 2");
    auto ca = replicate_costs(config, a, replications, rng_seed, exec);
    const auto cb = replicate_costs(config, b, replications, rng_seed, exec);
    for (std::size_t r = 0; r < replications; ++r) ca[r] -= cb[r];
    return summarize(ca);
}

std::vector<SweepRow> sweep_request_intensity(const ScenarioConfig& config, const std::vector<PolicyKind>& policies,
                                              const std::vector<double>& lambda_t_grid, std::size_t replications,
                                              std::uint64_t rng_seed, const SweepOptions& options,
                                              Execution exec) {
    if (lambda_t_grid.empty()) throw std::invalid_argument("lambda_T grid is empty");
    if (!(config.lifetime > 0.0)) throw std::invalid_argument("lifetime must be positive");
    for (double g : lambda_t_grid)
        if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("lambda_T grid values must be finite and >= 0");

    const double top = *std::max_element(lambda_t_grid.begin(), lambda_t_grid.end());
    const std::size_t horizon = std::max<std::size_t>(1, truncation_horizon(top, kHorizonTolerance));

    const bool needs_pool = std::any_of(policies.begin(), policies.end(), [](PolicyKind k) {
        return k == PolicyKind::exact_oracle || k == PolicyKind::approx_online;
    });
    const FadingPool pool =
        needs_pool ? sample_fading_pool(config, options.fading_samples, options.pool_seed) : FadingPool{};

    std::vector<Policy> built;
    built.reserve(policies.size());
    for (auto kind : policies) built.push_back(make_policy(config, kind, horizon, pool, exec));

    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < policies.size(); ++p) {
        for (double lt : lambda_t_grid) {
            ScenarioConfig point = config;
            point.request_intensity = lt / config.lifetime;
            rows.push_back({policies[p], lt, estimate_average_cost(point, built[p], replications, rng_seed, exec)});
        }
    }
    return rows;
}

}  // namespace mcache
