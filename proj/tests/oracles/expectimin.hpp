#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mcache/exact_solver.hpp"

namespace oracle {

// V_k(S) by plain recursion over pool draws and every joint per-segment
// choice, memoized on (k, state). Uses only the public one-step model
// (action_grid, stage_cost, transition), never the solver's kernel.
class Expectimin {
public:
    Expectimin(const mcache::ScenarioConfig& config, const mcache::FadingPool& pool) : config_(config), pool_(pool) {}

    double value(std::size_t k, const mcache::BufferState& state) {
        if (k == 0) return 0.0;
        const auto key = std::pair{k, state.index()};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        double total = 0.0;
        for (const auto& fading : pool_) {
            const auto grid = mcache::action_grid(config_, state, fading);
            std::vector<mcache::SegmentAction> actions(grid.size());
            double best = std::numeric_limits<double>::infinity();
            choose(k, state, fading, grid, 0, actions, best);
            total += best;
        }
        const double v = total / static_cast<double>(pool_.size());
        memo_.emplace(key, v);
        return v;
    }

private:
    void choose(std::size_t k, const mcache::BufferState& state, const mcache::FadingRealization& fading,
                const mcache::ActionGrid& grid, std::size_t s, std::vector<mcache::SegmentAction>& actions,
                double& best) {
        if (s == grid.size()) {
            const double g = mcache::stage_cost(config_, state, fading, actions);
            const auto next = mcache::transition(config_, state, fading, actions);
            best = std::min(best, g + value(k - 1, next));
            return;
        }
        for (const auto& c : grid[s]) {
            actions[s] = c.action;
            choose(k, state, fading, grid, s + 1, actions, best);
        }
    }

    const mcache::ScenarioConfig& config_;
    const mcache::FadingPool& pool_;
    std::map<std::pair<std::size_t, std::uint64_t>, double> memo_;
};

struct EnumerationResult {
    double best_value;
    std::uint64_t policies;
};

// Every deterministic Markov policy of a 1-cache, 1-segment instance: one
// grid choice per (stage, state, draw), all combinations evaluated. The full
// state has a single choice per draw, so a policy is a tuple of per-stage
// choice vectors for the empty state. Stage k's vector acts through
// V_k(0) = A + B0 V_{k-1}(0) + B1 V_{k-1}(1), precomputed per vector.
inline EnumerationResult enumerate_single_bit_policies(const mcache::ScenarioConfig& config,
                                                       const mcache::FadingPool& pool, std::size_t stages) {
    if (config.cache_count() != 1 || config.segments() != 1) throw std::invalid_argument("1x1 instances only");
    struct Choice {
        double cost;
        std::uint64_t next;
    };
    const double draws = static_cast<double>(pool.size());
    const auto empty = mcache::BufferState::from_index(1, 1, 0);
    const auto full = mcache::BufferState::from_index(1, 1, 1);
    auto options = [&](const mcache::BufferState& state, const mcache::FadingRealization& f) {
        std::vector<Choice> out;
        const auto grid = mcache::action_grid(config, state, f);
        for (const auto& c : grid[0]) {
            const std::vector<mcache::SegmentAction> a{c.action};
            out.push_back({mcache::stage_cost(config, state, f, a), mcache::transition(config, state, f, a).index()});
        }
        return out;
    };

    // V_k(1) does not depend on the policy.
    std::vector<double> full_value(stages + 1, 0.0);
    for (std::size_t k = 1; k <= stages; ++k) {
        double sum = 0.0;
        for (const auto& f : pool) {
            const auto opts = options(full, f);
            if (opts.size() != 1 || opts[0].next != 1) throw std::logic_error("full state must be absorbing");
            sum += opts[0].cost + full_value[k - 1];
        }
        full_value[k] = sum / draws;
    }

    std::vector<std::vector<Choice>> empty_options;
    std::uint64_t per_stage = 1;
    for (const auto& f : pool) {
        empty_options.push_back(options(empty, f));
        per_stage *= empty_options.back().size();
    }
    std::vector<double> a(per_stage), b0(per_stage), b1(per_stage);
    for (std::uint64_t code = 0; code < per_stage; ++code) {
        std::uint64_t rest = code;
        double cost = 0.0, to_empty = 0.0, to_full = 0.0;
        for (const auto& opts : empty_options) {
            const auto& pick = opts[rest % opts.size()];
            rest /= opts.size();
            cost += pick.cost;
            (pick.next == 0 ? to_empty : to_full) += 1.0;
        }
        a[code] = cost / draws;
        b0[code] = to_empty / draws;
        b1[code] = to_full / draws;
    }

    double best = std::numeric_limits<double>::infinity();
    std::uint64_t evaluated = 0;
    // Stage k's choice vector maps V_{k-1}(0) to V_k(0); recurse over all tuples.
    auto descend = [&](auto&& self, std::size_t k, double previous) -> void {
        if (k == stages) {
            for (std::uint64_t c = 0; c < per_stage; ++c)
                best = std::min(best, a[c] + b0[c] * previous + b1[c] * full_value[k - 1]);
            evaluated += per_stage;
            return;
        }
        for (std::uint64_t c = 0; c < per_stage; ++c)
            self(self, k + 1, a[c] + b0[c] * previous + b1[c] * full_value[k - 1]);
    };
    if (stages == 0) return {0.0, 1};
    descend(descend, 1, 0.0);
    return {best, evaluated};
}

}  // namespace oracle
