#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mcache/core_model.hpp"
#include "mcache/exact_solver.hpp"
#include "mcache/execution.hpp"

namespace mcache {

/// Value functions at the anchor states for stages 0..horizon:
/// the full buffer S* and each single-defect state S^{i,s} (only cache i
/// lacks segment s). Every other state's value is approximated from these.
struct ReferenceValues {
    std::size_t caches = 0;
    std::size_t segments = 0;
    std::size_t horizon = 0;
    bool disjoint_coverage = false;
    std::vector<double> star;    // [k]
    std::vector<double> defect;  // [(i * segments + s) * (horizon + 1) + k]

    double v_star(std::size_t k) const { return star.at(k); }
    double v_defect(std::size_t cache, std::size_t segment, std::size_t k) const {
        return defect.at((cache * segments + segment) * (horizon + 1) + k);
    }
    /// Marginal cost of the single missing (cache, segment) bit.
    double defect_gap(std::size_t cache, std::size_t segment, std::size_t k) const {
        return v_defect(cache, segment, k) - v_star(k);
    }

    /// Same flat `stage,state_hex,value` rows as ValueTable, anchor states only.
    void write(std::ostream& out) const;
    static ReferenceValues read(std::istream& in);
};

/// Builds all anchor values on one common-random-number pool. Parallel over
/// (cache, segment) pairs; stages are sequential.
ReferenceValues build_reference_values(const ScenarioConfig& config, std::size_t horizon,
                                       const FadingPool& pool, Execution exec = Execution::parallel);
ReferenceValues build_reference_values(const ScenarioConfig& config, std::size_t horizon,
                                       std::size_t fading_samples, std::uint64_t rng_seed,
                                       Execution exec = Execution::parallel);

/// V_k(S*) = k * Pr(user uncovered) * E[sum_s cost of serving the user | uncovered],
/// the probability and conditional mean estimated jointly from the pool.
double v_star(const ScenarioConfig& config, std::size_t k, std::size_t fading_samples, std::uint64_t rng_seed);

/// V_k(S^{i,s}) by the two-next-state recursion.
double v_defect(const ScenarioConfig& config, std::size_t cache, std::size_t segment, std::size_t k,
                std::size_t fading_samples, std::uint64_t rng_seed);

/// V_k(S*) + sum over unset bits of (V_k(S^{i,s}) - V_k(S*)).
double approx_value(const ReferenceValues& refs, const BufferState& state, std::size_t k);

struct ValueBounds {
    std::optional<double> lower;  // only when service disks are pairwise disjoint
    double upper = 0.0;
};

/// Upper bound equals approx_value; the lower bound swaps the defect gaps
/// for their one-stage values.
ValueBounds value_bounds(const ReferenceValues& refs, const BufferState& state, std::size_t k);

/// upper - lower, summed over the unset bits.
double approximation_error_bound(const ReferenceValues& refs, const BufferState& state, std::size_t k);

/// Online control: per uncovered segment, choose the receiver whose decode
/// threshold to meet so that transmit cost plus the Poisson-weighted
/// defect gaps left behind is smallest.
/// Throws std::out_of_range when the horizon is shorter than the truncation.
Plan online_action(const ReferenceValues& refs, const BufferState& state, const FadingRealization& fading,
                   double remaining_lifetime, const ScenarioConfig& config);

/// sum_N pmf(N; lambda T) approx_value(empty, N).
double approx_system_cost(const ReferenceValues& refs, const ScenarioConfig& config);

}  // namespace mcache
