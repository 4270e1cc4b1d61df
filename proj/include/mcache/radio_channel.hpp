#pragma once

#include <cstddef>
#include <vector>

#include "mcache/core_model.hpp"
#include "mcache/segment_action.hpp"

namespace mcache {

enum class RateModel { exact, hisnr };

/// One BS-to-receiver link for one segment. Each of the N_T channel entries
/// is CN(0, large_scale_gain), so ||h||^2 / large_scale_gain ~ Gamma(N_T, 1).
struct LinkGain {
    double large_scale_gain = 1.0;
    int antenna_count = 1;
    double noise_power = 1.0;
};

/// E[log2(||h||^2 / (N_T sigma^2))] in closed form via the digamma function.
double theta(const LinkGain& link);

/// symbols * E[log2(1 + ||h||^2 P / (N_T sigma^2))], by quadrature.
double ergodic_rate_exact(const LinkGain& link, double power, double symbols);

/// High-SNR surrogate symbols * (theta + log2 P). Negative below P = 2^-theta.
double ergodic_rate_hisnr(const LinkGain& link, double power, double symbols);
double ergodic_rate_hisnr(double theta_bits, double power, double symbols);

/// Relative slack on the decode threshold so that an action sized to meet a
/// receiver's threshold exactly is not rejected by rounding in N*(theta+log2 P).
inline constexpr double kDecodeSlack = 1e-12;

/// Closed inequality rate >= threshold_bits under the chosen rate model.
bool decodes(const LinkGain& link, const SegmentAction& action, double threshold_bits,
             RateModel model = RateModel::hisnr);
bool decodes_hisnr(double theta_bits, const SegmentAction& action, double threshold_bits);

LinkGain user_link(const ScenarioConfig& config, const FadingRealization& fading,
                   std::size_t segment);
LinkGain cache_link(const ScenarioConfig& config, const FadingRealization& fading,
                    std::size_t cache, std::size_t segment);

/// theta for every receiver of one request.
struct ChannelSnapshot {
    std::size_t caches = 0;
    std::size_t segments = 0;
    std::vector<double> user_theta;   // per segment
    std::vector<double> cache_theta;  // caches x segments, row-major

    double user(std::size_t s) const { return user_theta[s]; }
    double cache(std::size_t c, std::size_t s) const { return cache_theta[c * segments + s]; }
};

ChannelSnapshot channel_snapshot(const ScenarioConfig& config, const FadingRealization& fading);

}  // namespace mcache
