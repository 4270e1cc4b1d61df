#include "mcache/radio_channel.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/digamma.hpp>

namespace mcache {

namespace {

constexpr int kLaguerreNodes = 64;
constexpr int kLegendreNodes = 16;

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix,
// weights are mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
    const auto n = diag.size();
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        jacobi(i, i) = diag(i);
        if (i + 1 < n) jacobi(i, i + 1) = jacobi(i + 1, i) = offdiag(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    QuadratureRule rule;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        rule.nodes.push_back(eig.eigenvalues()(i));
        rule.weights.push_back(mu0 * v0 * v0);
    }
    return rule;
}

// Generalized Gauss-Laguerre for the Gamma(alpha+1, 1) density (weights sum to 1).
// Eigenvector weights lose relative accuracy at the far nodes, where the
// Gamma tail is tiny but still matters once multiplied by a growing
// integrand, so nodes are Newton-polished on the three-term recurrence and
// weights come from the closed form in log space.
QuadratureRule gamma_rule(double alpha) {
    constexpr int n = kLaguerreNodes;
    Eigen::VectorXd diag(n), off(n - 1);
    for (int i = 0; i < n; ++i) diag(i) = 2.0 * i + alpha + 1.0;
    for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(i * (i + alpha));
    QuadratureRule rule = golub_welsch(diag, off, 1.0);

    // Returns {L_n(x), L_{n-1}(x), L_{n+1}(x)} for the generalized polynomials.
    auto laguerre = [alpha](double x) {
        double prev = 1.0, cur = 1.0 + alpha - x;
        for (int k = 1; k < n; ++k) {
            const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        const double above = ((2.0 * n + 1.0 + alpha - x) * cur - (n + alpha) * prev) / (n + 1.0);
        return std::array<double, 3>{cur, prev, above};
    };
    const double log_norm = std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0) - std::lgamma(alpha + 1.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double x = rule.nodes[i];
        for (int it = 0; it < 4; ++it) {
            const auto l = laguerre(x);
            const double deriv = (n * l[0] - (n + alpha) * l[1]) / x;
            x -= l[0] / deriv;
        }
        rule.nodes[i] = x;
        const double l_above = std::abs(laguerre(x)[2]);
        rule.weights[i] = std::exp(log_norm + std::log(x) - 2.0 * (std::log(n + 1.0) + std::log(l_above)));
    }
    return rule;
}

const QuadratureRule& gamma_rule_cached(int antenna_count) {
    static std::mutex mutex;
    static std::map<int, QuadratureRule> rules;
    std::lock_guard lock(mutex);
    auto it = rules.find(antenna_count);
    if (it == rules.end()) it = rules.emplace(antenna_count, gamma_rule(antenna_count - 1.0)).first;
    return it->second;
}

const QuadratureRule& laguerre_rule() {
    static const QuadratureRule rule = gamma_rule(0.0);
    return rule;
}

const QuadratureRule& legendre_rule() {
    static const QuadratureRule rule = [] {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(kLegendreNodes);
        Eigen::VectorXd off(kLegendreNodes - 1);
        for (int k = 1; k < kLegendreNodes; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
        return golub_welsch(diag, off, 2.0);
    }();
    return rule;
}

// E[ln(1 + c X)], X ~ Gamma(n, 1).
//
// For c <= 1 the integrand is analytic well beyond the origin and the plain
// generalized rule is exact to rounding. For c > 1 the branch point at -1/c
// crowds the origin, so [0,1] is split into dyadic Gauss-Legendre panels
// (each panel no shorter than its distance to the branch point) and [1,inf)
// is a shifted Laguerre tail.
double expected_log1p(int n, double c) {
    const double alpha = n - 1.0;
    if (c <= 1.0) {
        const auto& rule = gamma_rule_cached(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * std::log1p(c * rule.nodes[i]);
        return acc;
    }
    const double log_gamma_n = std::lgamma(static_cast<double>(n));
    auto density = [&](double x) { return std::exp(alpha * std::log(x) - x - log_gamma_n); };

    double tail = 0.0;
    const auto& lag = laguerre_rule();
    for (std::size_t i = 0; i < lag.nodes.size(); ++i) {
        const double x = lag.nodes[i] + 1.0;
        tail += lag.weights[i] * std::exp(alpha * std::log(x) - 1.0 - log_gamma_n) * std::log1p(c * x);
    }

    double head = 0.0;
    const auto& leg = legendre_rule();
    const int panels = static_cast<int>(std::ceil(std::log2(c))) + 2;
    double hi = 1.0;
    for (int p = 0; p <= panels; ++p) {
        const double lo = p == panels ? 0.0 : std::ldexp(1.0, -(p + 1));
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < leg.nodes.size(); ++i) {
            const double x = mid + half * leg.nodes[i];
            head += half * leg.weights[i] * density(x) * std::log1p(c * x);
        }
        hi = lo;
    }
    return head + tail;
}

}  // namespace

double theta(const LinkGain& link) {
    const double nt = link.antenna_count;
    return (boost::math::digamma(nt) + std::log(link.large_scale_gain) - std::log(nt * link.noise_power)) /
           std::numbers::ln2;
}

double ergodic_rate_exact(const LinkGain& link, double power, double symbols) {
    if (symbols == 0.0) return 0.0;
    const double snr_scale = link.large_scale_gain * power / (link.antenna_count * link.noise_power);
    return symbols * expected_log1p(link.antenna_count, snr_scale) / std::numbers::ln2;
}

double ergodic_rate_hisnr(double theta_bits, double power, double symbols) {
    if (symbols == 0.0) return 0.0;
    return symbols * (theta_bits + std::log2(power));
}

double ergodic_rate_hisnr(const LinkGain& link, double power, double symbols) {
    return ergodic_rate_hisnr(theta(link), power, symbols);
}

bool decodes_hisnr(double theta_bits, const SegmentAction& action, double threshold_bits) {
    if (!action.transmits() || !(action.power > 0.0)) return false;
    return ergodic_rate_hisnr(theta_bits, action.power, action.symbols) >=
           threshold_bits * (1.0 - kDecodeSlack);
}

bool decodes(const LinkGain& link, const SegmentAction& action, double threshold_bits, RateModel model) {
    if (!action.transmits() || !(action.power > 0.0)) return false;
    if (model == RateModel::hisnr) return decodes_hisnr(theta(link), action, threshold_bits);
    return ergodic_rate_exact(link, action.power, action.symbols) >= threshold_bits * (1.0 - kDecodeSlack);
}

LinkGain user_link(const ScenarioConfig& config, const FadingRealization& fading, std::size_t segment) {
    return {fading.user_pathloss * fading.user_shadowing.at(segment), config.antenna_count,
            config.noise_power};
}

LinkGain cache_link(const ScenarioConfig& config, const FadingRealization& fading, std::size_t cache,
                    std::size_t segment) {
    return {cache_pathloss(config, cache) * fading.cache_shadow(cache, segment), config.antenna_count,
            config.noise_power};
}

ChannelSnapshot channel_snapshot(const ScenarioConfig& config, const FadingRealization& fading) {
    ChannelSnapshot snap;
    snap.caches = config.cache_count();
    snap.segments = config.segments();
    snap.user_theta.resize(snap.segments);
    snap.cache_theta.resize(snap.caches * snap.segments);
    for (std::size_t s = 0; s < snap.segments; ++s) snap.user_theta[s] = theta(user_link(config, fading, s));
    for (std::size_t c = 0; c < snap.caches; ++c) {
        const double rho = cache_pathloss(config, c);
        for (std::size_t s = 0; s < snap.segments; ++s)
            snap.cache_theta[c * snap.segments + s] =
                theta(LinkGain{rho * fading.cache_shadow(c, s), config.antenna_count, config.noise_power});
    }
    return snap;
}

}  // namespace mcache
