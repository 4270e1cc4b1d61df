#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcache/core_model.hpp"
#include "mcache/execution.hpp"
#include "mcache/radio_channel.hpp"
#include "mcache/segment_action.hpp"

namespace mcache {

inline constexpr int kNoTransmission = -2;
inline constexpr int kUserTarget = -1;

/// Action for one segment plus the receiver whose decode threshold it meets
/// with equality (kUserTarget, a cache index, or kNoTransmission).
struct SegmentPlan {
    SegmentAction action;
    int target = kNoTransmission;
};

using Plan = std::vector<SegmentPlan>;

std::vector<SegmentAction> actions_of(const Plan& plan);

/// One admissible per-segment choice in the Bellman minimization.
struct Candidate {
    int target = kNoTransmission;
    SegmentAction action;
    double cost = 0.0;
};

/// Per segment: a single no-transmission entry when the user is served by a
/// cache; otherwise serve-the-user first, then one entry per cache that lacks
/// the segment and sees a worse channel than the user (ascending cache index).
using ActionGrid = std::vector<std::vector<Candidate>>;

ActionGrid action_grid(const ScenarioConfig& config, const BufferState& state,
                       const FadingRealization& fading);

/// Caches decode what they can hear; bits never clear. Segments the user gets
/// from a cache are not transmitted, whatever `actions` says.
BufferState transition(const ScenarioConfig& config, const BufferState& state,
                       const FadingRealization& fading, std::span<const SegmentAction> actions,
                       RateModel model = RateModel::hisnr);

/// Sum over segments the user cannot get from a cache of action_cost.
double stage_cost(const ScenarioConfig& config, const BufferState& state,
                  const FadingRealization& fading, std::span<const SegmentAction> actions);

inline constexpr std::size_t kMaxExactBits = 12;

class TractabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws TractabilityError when N_C * N_S exceeds kMaxExactBits.
void require_tractable(const ScenarioConfig& config);

/// V_k(state) for k = 0..stages over all 2^(N_C N_S) buffer states; V_0 = 0.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::size_t caches, std::size_t segments, std::size_t stages);

    std::size_t caches() const { return caches_; }
    std::size_t segments() const { return segments_; }
    std::size_t stages() const { return stages_; }
    std::size_t state_count() const { return state_count_; }

    double value(std::size_t k, std::uint64_t state_index) const {
        return values_[k * state_count_ + state_index];
    }
    double value(std::size_t k, const BufferState& state) const { return value(k, state.index()); }
    std::span<const double> stage(std::size_t k) const {
        return {values_.data() + k * state_count_, state_count_};
    }
    std::span<double> stage(std::size_t k) { return {values_.data() + k * state_count_, state_count_}; }

    /// Flat text: two '#' header lines, then `stage,state_hex,value` rows for k >= 1.
    void write(std::ostream& out) const;
    static ValueTable read(std::istream& in);

    friend bool operator==(const ValueTable&, const ValueTable&) = default;

private:
    std::size_t caches_ = 0;
    std::size_t segments_ = 0;
    std::size_t stages_ = 0;
    std::size_t state_count_ = 0;
    std::vector<double> values_;
};

/// Reduced-state value iteration: V_k(S) is the pool average of the per-draw
/// minimum over joint ActionGrid choices of stage cost plus V_{k-1}(next).
ValueTable value_iteration(const ScenarioConfig& config, std::size_t stages, const FadingPool& pool,
                           Execution exec = Execution::parallel);
ValueTable value_iteration(const ScenarioConfig& config, std::size_t stages, std::size_t fading_samples,
                           std::uint64_t rng_seed, Execution exec = Execution::parallel);

/// Per-draw right-hand side of the reduced Bellman equation for stage k,
/// using V_{k-1} from `table`. Averages to V_k when `pool` is the build pool.
std::vector<double> bellman_samples(const ScenarioConfig& config, const ValueTable& table, std::size_t k,
                                    const BufferState& state, const FadingPool& pool);

/// Poisson-weighted continuation sum_N pmf(N; lambda tau) V_N(state) over
/// every state, truncated at truncation_horizon(lambda tau, 1e-9).
std::vector<double> random_horizon_continuation(const ValueTable& table, double rate_times_remaining);

/// Minimizer of stage cost plus the Poisson-weighted continuation.
/// Throws std::out_of_range when the table is shorter than the horizon.
Plan random_stage_policy(const ValueTable& table, const BufferState& state, const FadingRealization& fading,
                         double remaining_lifetime, const ScenarioConfig& config);

/// sum_N pmf(N; lambda T) V_N(empty).
double exact_system_cost(const ValueTable& table, const ScenarioConfig& config);

}  // namespace mcache
