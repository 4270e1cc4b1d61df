#pragma once

#include <limits>

#include "mcache/core_model.hpp"
#include "mcache/segment_action.hpp"

namespace mcache {

/// Cost weights on transmit energy (per joule) and airtime (per symbol).
struct WeightPair {
    double w_e = 1.0;
    double w_t = 1.0;
};

/// Principal branch of the Lambert W function for x >= 0.
/// Throws std::domain_error for negative or NaN arguments.
double lambert_w0(double x);

/// Per-segment cost of serving at power P while meeting the threshold with
/// equality under the high-SNR rate: threshold * (w_e P + w_t) / (theta + log2 P).
/// Infinite when theta + log2 P <= 0.
double segment_objective(double power, double theta_target, const WeightPair& weights,
                         double threshold_bits);

/// Cheapest (P, N) that lets a receiver with the given theta decode
/// `threshold_bits`. The unconstrained minimizer is
///
///     P* = w_t / (w_e W(2^theta w_t / (e w_e))),   N* = threshold / (theta + log2 P*).
///
/// With a finite `max_power` the objective's unimodality makes min(P*, cap)
/// optimal; a cap at or below 2^-theta is infeasible (std::domain_error).
SegmentAction optimal_action(double theta_target, const WeightPair& weights, double threshold_bits,
                             double max_power = std::numeric_limits<double>::infinity());

/// w_e P N + w_t N.
double action_cost(const SegmentAction& action, const WeightPair& weights);

inline WeightPair weights_of(const ScenarioConfig& config) { return {config.w_e, config.w_t}; }

/// optimal_action with the scenario's weights, threshold, power cap and
/// symbol rounding.
SegmentAction serve_action(const ScenarioConfig& config, double theta_target);

}  // namespace mcache
