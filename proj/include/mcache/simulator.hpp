#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "mcache/approx_mdp.hpp"
#include "mcache/core_model.hpp"
#include "mcache/exact_solver.hpp"
#include "mcache/execution.hpp"
#include "mcache/radio_channel.hpp"

namespace mcache {

enum class PolicyKind { exact_oracle, approx_online, baseline_user_only, baseline_push_all };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

/// A downlink controller. Baselines are stateless; the two MDP controllers
/// share an immutable table that must cover the lifetime's Poisson horizon.
class Policy {
public:
    static Policy exact_oracle(std::shared_ptr<const ValueTable> table);
    static Policy approx_online(std::shared_ptr<const ReferenceValues> refs);
    static Policy baseline_user_only();
    static Policy baseline_push_all();

    PolicyKind kind() const { return kind_; }
    /// Largest random horizon this policy can handle (unbounded for baselines).
    std::size_t horizon() const;

    Plan decide(const ScenarioConfig& config, const BufferState& state, const FadingRealization& fading,
                std::size_t request_index, double remaining_lifetime) const;

private:
    explicit Policy(PolicyKind kind) : kind_(kind) {}

    PolicyKind kind_;
    std::shared_ptr<const ValueTable> table_;
    std::shared_ptr<const ReferenceValues> refs_;
};

/// Builds whatever table `kind` needs on the given common fading pool.
Policy make_policy(const ScenarioConfig& config, PolicyKind kind, std::size_t horizon, const FadingPool& pool,
                   Execution exec = Execution::parallel);

struct LifetimeResult {
    double total_cost = 0.0;
    std::vector<double> per_request_costs;
    BufferState final_state;
    std::size_t request_count = 0;
};

/// Plays one file lifetime from an empty buffer.
LifetimeResult simulate_lifetime(const ScenarioConfig& config, const Policy& policy, const RequestTrace& trace,
                                 RateModel model = RateModel::hisnr);

/// Seed of the request trace for one replication; shared across policies.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication);

/// Total lifetime cost of each replication, in replication order.
std::vector<double> replicate_costs(const ScenarioConfig& config, const Policy& policy, std::size_t replications,
                                    std::uint64_t rng_seed, Execution exec = Execution::parallel);

struct CostEstimate {
    double mean = 0.0;
    double half_width_95 = 0.0;
    std::size_t replications = 0;
};

/// Mean and normal-approximation 95% half-width of `samples` (pairwise summation).
CostEstimate summarize(const std::vector<double>& samples);

CostEstimate estimate_average_cost(const ScenarioConfig& config, const Policy& policy, std::size_t replications,
                                   std::uint64_t rng_seed, Execution exec = Execution::parallel);

/// Paired (common random number) estimate of cost(a) - cost(b).
CostEstimate compare_policies(const ScenarioConfig& config, const Policy& a, const Policy& b,
                              std::size_t replications, std::uint64_t rng_seed,
                              Execution exec = Execution::parallel);

struct SweepOptions {
    std::size_t fading_samples = 500;
    std::uint64_t pool_seed = 1;
};

struct SweepRow {
    PolicyKind policy;
    double lambda_t;
    CostEstimate estimate;
};

/// Policy-major table of cost estimates over a grid of lambda*T values.
/// MDP tables are built once, covering the largest grid value.
std::vector<SweepRow> sweep_request_intensity(const ScenarioConfig& config, const std::vector<PolicyKind>& policies,
                                              const std::vector<double>& lambda_t_grid, std::size_t replications,
                                              std::uint64_t rng_seed, const SweepOptions& options = {},
                                              Execution exec = Execution::parallel);

}  // namespace mcache
