#include "mcache/power_time.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcache {

namespace {

constexpr int kMaxHalleySteps = 50;
constexpr double kThetaMargin = 1e-12;

double halley_w(double x, double w) {
    for (int step = 0; step < kMaxHalleySteps; ++step) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        const double next = w - f / denom;
        if (!std::isfinite(next)) return std::numeric_limits<double>::quiet_NaN();
        const double delta = std::abs(next - w);
        w = next;
        if (delta <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) return w;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double bisect_w(double x) {
    double lo = 0.0, hi = std::max(1.0, std::log(x) + 1.0);
    for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (mid * std::exp(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// W(e^L) for L too large to exponentiate: solve w + ln w = L.
double lambert_w0_of_exp(double log_x) {
    double w = log_x - std::log(log_x);
    for (int step = 0; step < kMaxHalleySteps; ++step) {
        const double next = w - (w + std::log(w) - log_x) / (1.0 + 1.0 / w);
        if (std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * w) return next;
        w = next;
    }
    return w;
}

}  // namespace

double lambert_w0(double x) {
    if (!(x >= 0.0)) throw std::domain_error("lambert_w0: argument must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;

    double guess;
    if (x < std::numbers::e) {
        const double l = std::log1p(x);
        guess = l * (1.0 - std::log1p(l) / (2.0 + l));
    } else {
        const double l1 = std::log(x), l2 = std::log(l1);
        guess = l1 - l2 + l2 / l1;
    }
    const double w = halley_w(x, guess);
    return std::isfinite(w) ? w : bisect_w(x);
}

double segment_objective(double power, double theta_target, const WeightPair& weights,
                         double threshold_bits) {
    const double bits_per_symbol = theta_target + std::log2(power);
    if (!(bits_per_symbol > 0.0)) return std::numeric_limits<double>::infinity();
    return threshold_bits * (weights.w_e * power + weights.w_t) / bits_per_symbol;
}

SegmentAction optimal_action(double theta_target, const WeightPair& weights, double threshold_bits,
                             double max_power) {
    const double log_arg = theta_target * std::numbers::ln2 + std::log(weights.w_t / weights.w_e) - 1.0;
    const double w = log_arg < 700.0 ? lambert_w0(std::exp(log_arg)) : lambert_w0_of_exp(log_arg);
    double power = weights.w_t / (weights.w_e * w);

    if (power > max_power) {
        if (!(theta_target + std::log2(max_power) > kThetaMargin))
            throw std::domain_error("optimal_action: power cap leaves the receiver undecodable");
        power = max_power;
    }
    const double bits_per_symbol = theta_target + std::log2(power);
    if (!(bits_per_symbol > kThetaMargin))
        throw std::logic_error("optimal_action: optimum violates theta + log2 P > 0");
    return {power, threshold_bits / bits_per_symbol};
}

double action_cost(const SegmentAction& action, const WeightPair& weights) {
    if (action.symbols == 0.0) return 0.0;
    return weights.w_e * action.power * action.symbols + weights.w_t * action.symbols;
}

SegmentAction serve_action(const ScenarioConfig& config, double theta_target) {
    SegmentAction a = optimal_action(theta_target, weights_of(config), config.segment_bits(),
                                     config.max_transmit_power);
    if (config.integer_symbols) a.symbols = std::ceil(a.symbols);
    return a;
}

}  // namespace mcache
