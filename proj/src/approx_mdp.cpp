#include "mcache/approx_mdp.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mcache/power_time.hpp"
#include "mcache/radio_channel.hpp"

namespace mcache {

namespace {

// Per-draw quantities the anchor recursions need.
struct AnchorDraw {
    bool covered_any = false;               // inside some service disk
    std::vector<bool> covered_without;      // [i]: inside a disk other than i's
    std::vector<double> user_cost;          // [s]
    std::vector<double> user_theta;         // [s]
    std::vector<double> cache_theta;        // [i * S + s]
    std::vector<double> cache_cost;         // [i * S + s], valid when cache_theta < user_theta
};

AnchorDraw make_anchor_draw(const ScenarioConfig& config, const FadingRealization& fading) {
    const std::size_t nc = config.cache_count(), ns = config.segments();
    const WeightPair weights = weights_of(config);
    const ChannelSnapshot snap = channel_snapshot(config, fading);

    AnchorDraw d;
    std::vector<bool> inside(nc);
    for (std::size_t c = 0; c < nc; ++c) inside[c] = in_service_disk(config, c, fading.user_position);
    d.covered_any = std::find(inside.begin(), inside.end(), true) != inside.end();
    d.covered_without.resize(nc);
    for (std::size_t i = 0; i < nc; ++i) {
        bool other = false;
        for (std::size_t j = 0; j < nc && !other; ++j) other = j != i && inside[j];
        d.covered_without[i] = other;
    }
    d.user_theta = snap.user_theta;
    d.cache_theta = snap.cache_theta;
    d.user_cost.resize(ns);
    for (std::size_t s = 0; s < ns; ++s) d.user_cost[s] = action_cost(serve_action(config, snap.user(s)), weights);
    d.cache_cost.assign(nc * ns, 0.0);
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t s = 0; s < ns; ++s)
            if (snap.cache(i, s) < snap.user(s))
                d.cache_cost[i * ns + s] = action_cost(serve_action(config, snap.cache(i, s)), weights);
    return d;
}

// Stage cost at S* for one draw: every segment costs the user-serving action
// unless the user sits inside some disk.
double full_state_cost(const AnchorDraw& d) {
    if (d.covered_any) return 0.0;
    double total = 0.0;
    for (double c : d.user_cost) total += c;
    return total;
}

// V_k(S^{i,s}) for k = 0..horizon. Per draw:
//   user served by another cache for s: nothing sent, defect persists;
//   cache i hears at least as well as the user: serving the user fills it;
//   otherwise the cheaper of serving the user (defect persists) and
//   meeting cache i's threshold (continue from S*).
void defect_recursion(const std::vector<AnchorDraw>& draws, std::size_t i, std::size_t s, std::size_t ns,
                      const std::vector<double>& star, std::span<double> out) {
    const auto m = static_cast<double>(draws.size());
    out[0] = 0.0;
    for (std::size_t k = 1; k < out.size(); ++k) {
        double sum = 0.0;
        for (const auto& d : draws) {
            double base = 0.0;
            if (!d.covered_any)
                for (std::size_t t = 0; t < ns; ++t)
                    if (t != s) base += d.user_cost[t];
            double v;
            if (d.covered_without[i]) {
                v = base + out[k - 1];
            } else if (d.user_theta[s] <= d.cache_theta[i * ns + s]) {
                v = base + d.user_cost[s] + star[k - 1];
            } else {
                v = base + std::min(d.user_cost[s] + out[k - 1], d.cache_cost[i * ns + s] + star[k - 1]);
            }
            sum += v;
        }
        out[k] = sum / m;
    }
}

}  // namespace

ReferenceValues build_reference_values(const ScenarioConfig& config, std::size_t horizon,
                                       const FadingPool& pool, Execution exec) {
    if (pool.empty()) throw std::invalid_argument("build_reference_values: empty fading pool");
    const std::size_t nc = config.cache_count(), ns = config.segments();

    std::vector<AnchorDraw> draws;
    draws.reserve(pool.size());
    for (const auto& f : pool) draws.push_back(make_anchor_draw(config, f));

    ReferenceValues refs;
    refs.caches = nc;
    refs.segments = ns;
    refs.horizon = horizon;
    refs.disjoint_coverage = coverage_disjoint(config);

    double one_stage = 0.0;
    for (const auto& d : draws) one_stage += full_state_cost(d);
    one_stage /= static_cast<double>(draws.size());
    refs.star.resize(horizon + 1);
    for (std::size_t k = 0; k <= horizon; ++k) refs.star[k] = static_cast<double>(k) * one_stage;

    refs.defect.assign(nc * ns * (horizon + 1), 0.0);
    const auto pairs = static_cast<long>(nc * ns);
    auto row = [&](long p) {
        return std::span<double>(refs.defect.data() + static_cast<std::size_t>(p) * (horizon + 1), horizon + 1);
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long p = 0; p < pairs; ++p)
            defect_recursion(draws, static_cast<std::size_t>(p) / ns, static_cast<std::size_t>(p) % ns, ns,
                             refs.star, row(p));
    } else {
        for (long p = 0; p < pairs; ++p)
            defect_recursion(draws, static_cast<std::size_t>(p) / ns, static_cast<std::size_t>(p) % ns, ns,
                             refs.star, row(p));
    }
    return refs;
}

ReferenceValues build_reference_values(const ScenarioConfig& config, std::size_t horizon,
                                       std::size_t fading_samples, std::uint64_t rng_seed, Execution exec) {
    return build_reference_values(config, horizon, sample_fading_pool(config, fading_samples, rng_seed), exec);
}

double v_star(const ScenarioConfig& config, std::size_t k, std::size_t fading_samples, std::uint64_t rng_seed) {
    const FadingPool pool = sample_fading_pool(config, fading_samples, rng_seed);
    double one_stage = 0.0;
    for (const auto& f : pool) one_stage += full_state_cost(make_anchor_draw(config, f));
    return static_cast<double>(k) * (one_stage / static_cast<double>(pool.size()));
}

double v_defect(const ScenarioConfig& config, std::size_t cache, std::size_t segment, std::size_t k,
                std::size_t fading_samples, std::uint64_t rng_seed) {
    if (cache >= config.cache_count() || segment >= config.segments())
        throw std::out_of_range("v_defect: cache or segment index out of range");
    return build_reference_values(config, k, fading_samples, rng_seed).v_defect(cache, segment, k);
}

double approx_value(const ReferenceValues& refs, const BufferState& state, std::size_t k) {
    if (k > refs.horizon) throw std::out_of_range("approx_value: stage beyond the reference horizon");
    double v = refs.v_star(k);
    for (std::size_t i = 0; i < refs.caches; ++i)
        for (std::size_t s = 0; s < refs.segments; ++s)
            if (!state.has(i, s)) v += refs.defect_gap(i, s, k);
    return v;
}

ValueBounds value_bounds(const ReferenceValues& refs, const BufferState& state, std::size_t k) {
    ValueBounds b;
    b.upper = approx_value(refs, state, k);
    if (refs.disjoint_coverage) {
        double lower = refs.v_star(k);
        if (k >= 1)
            for (std::size_t i = 0; i < refs.caches; ++i)
                for (std::size_t s = 0; s < refs.segments; ++s)
                    if (!state.has(i, s)) lower += refs.defect_gap(i, s, 1);
        b.lower = lower;
    }
    return b;
}

double approximation_error_bound(const ReferenceValues& refs, const BufferState& state, std::size_t k) {
    if (k > refs.horizon) throw std::out_of_range("approximation_error_bound: stage beyond the horizon");
    double eps = 0.0;
    for (std::size_t i = 0; i < refs.caches; ++i)
        for (std::size_t s = 0; s < refs.segments; ++s)
            if (!state.has(i, s)) eps += refs.defect_gap(i, s, k) - refs.defect_gap(i, s, 1);
    return eps;
}

Plan online_action(const ReferenceValues& refs, const BufferState& state, const FadingRealization& fading,
                   double remaining_lifetime, const ScenarioConfig& config) {
    const std::size_t nc = config.cache_count(), ns = config.segments();
    if (refs.caches != nc || refs.segments != ns || state.caches() != nc || state.segments() != ns)
        throw std::invalid_argument("online_action: dimension mismatch");
    const double mean = config.request_intensity * std::max(0.0, remaining_lifetime);
    const std::size_t horizon = truncation_horizon(mean, kHorizonTolerance);
    if (horizon > refs.horizon)
        throw std::out_of_range("reference values cover " + std::to_string(refs.horizon) +
                                " stages, horizon needs " + std::to_string(horizon));

    std::vector<double> weight(horizon + 1);
    for (std::size_t n = 0; n <= horizon; ++n) weight[n] = poisson_pmf(static_cast<long>(n), mean);
    auto expected_gap = [&](std::size_t i, std::size_t s) {
        double g = 0.0;
        for (std::size_t n = 1; n <= horizon; ++n) g += weight[n] * refs.defect_gap(i, s, n);
        return g;
    };

    const ChannelSnapshot snap = channel_snapshot(config, fading);
    const WeightPair weights = weights_of(config);
    const double threshold = config.segment_bits();
    Plan plan(ns);
    std::vector<std::size_t> worse;  // caches lacking s with a worse channel than the user
    std::vector<double> gap(nc, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
        if (covered_by(state, s, fading.user_position, config)) continue;

        worse.clear();
        for (std::size_t c = 0; c < nc; ++c)
            if (!state.has(c, s) && snap.cache(c, s) < snap.user(s)) {
                worse.push_back(c);
                gap[c] = expected_gap(c, s);
            }
        std::stable_sort(worse.begin(), worse.end(),
                         [&](std::size_t a, std::size_t b) { return snap.cache(a, s) < snap.cache(b, s); });

        // candidate 0 serves the user; candidate 1 + j meets worse[j]'s threshold
        auto left_behind = [&](const SegmentAction& a) {
            double g = 0.0;
            for (std::size_t c : worse)
                if (!decodes_hisnr(snap.cache(c, s), a, threshold)) g += gap[c];
            return g;
        };
        SegmentPlan best{serve_action(config, snap.user(s)), kUserTarget};
        double best_value = action_cost(best.action, weights) + left_behind(best.action);
        for (std::size_t c : worse) {
            const SegmentAction a = serve_action(config, snap.cache(c, s));
            const double v = action_cost(a, weights) + left_behind(a);
            if (v < best_value) {
                best_value = v;
                best = {a, static_cast<int>(c)};
            }
        }
        plan[s] = best;
    }
    return plan;
}

double approx_system_cost(const ReferenceValues& refs, const ScenarioConfig& config) {
    const double mean = config.rate_times_lifetime();
    const std::size_t horizon = truncation_horizon(mean, kHorizonTolerance);
    if (horizon > refs.horizon) throw std::out_of_range("approx_system_cost: horizon shortfall");
    const BufferState empty(refs.caches, refs.segments);
    double total = 0.0;
    for (std::size_t n = 1; n <= horizon; ++n)
        total += poisson_pmf(static_cast<long>(n), mean) * approx_value(refs, empty, n);
    return total;
}

// ---------------------------------------------------------------------------

void ReferenceValues::write(std::ostream& out) const {
    out << "# mcache reference values\n";
    out << "# caches=" << caches << " segments=" << segments << " stages=" << horizon
        << " disjoint=" << (disjoint_coverage ? 1 : 0) << "\n";
    out << "stage,state_hex,value\n";
    out << std::setprecision(17);
    const std::string full = BufferState::full(caches, segments).hex();
    for (std::size_t k = 1; k <= horizon; ++k) {
        out << k << ',' << full << ',' << v_star(k) << '\n';
        for (std::size_t i = 0; i < caches; ++i)
            for (std::size_t s = 0; s < segments; ++s) {
                // S^{i,s}: all bits except (i, s)
                BufferState defect_state(caches, segments);
                for (std::size_t c = 0; c < caches; ++c)
                    for (std::size_t t = 0; t < segments; ++t)
                        if (c != i || t != s) defect_state.set(c, t);
                out << k << ',' << defect_state.hex() << ',' << v_defect(i, s, k) << '\n';
            }
    }
}

ReferenceValues ReferenceValues::read(std::istream& in) {
    std::string line;
    ReferenceValues refs;
    int disjoint = 0;
    bool have_dims = false;
    while (std::getline(in, line)) {
        if (line.rfind("# caches=", 0) == 0) {
            if (std::sscanf(line.c_str(), "# caches=%zu segments=%zu stages=%zu disjoint=%d", &refs.caches,
                            &refs.segments, &refs.horizon, &disjoint) != 4)
                throw std::runtime_error("ReferenceValues::read: malformed dimension line");
            have_dims = true;
        } else if (line.rfind("stage,", 0) == 0) {
            break;
        }
    }
    if (!have_dims) throw std::runtime_error("ReferenceValues::read: missing dimension line");
    refs.disjoint_coverage = disjoint != 0;
    refs.star.assign(refs.horizon + 1, 0.0);
    refs.defect.assign(refs.caches * refs.segments * (refs.horizon + 1), 0.0);
    const BufferState full = BufferState::full(refs.caches, refs.segments);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string k_text, hex, v_text;
        if (!std::getline(row, k_text, ',') || !std::getline(row, hex, ',') || !std::getline(row, v_text))
            throw std::runtime_error("ReferenceValues::read: malformed row '" + line + "'");
        const std::size_t k = std::stoul(k_text);
        if (k == 0 || k > refs.horizon) throw std::runtime_error("ReferenceValues::read: stage out of range");
        const BufferState state = BufferState::from_hex(refs.caches, refs.segments, hex);
        const double v = std::stod(v_text);
        if (state == full) {
            refs.star[k] = v;
        } else if (state.count() + 1 == state.bit_count()) {
            for (std::size_t i = 0; i < refs.caches; ++i)
                for (std::size_t s = 0; s < refs.segments; ++s)
                    if (!state.has(i, s)) refs.defect[(i * refs.segments + s) * (refs.horizon + 1) + k] = v;
        } else {
            throw std::runtime_error("ReferenceValues::read: '" + hex + "' is not an anchor state");
        }
        ++rows;
    }
    if (rows != refs.horizon * (1 + refs.caches * refs.segments))
        throw std::runtime_error("ReferenceValues::read: incomplete reference table");
    return refs;
}

}  // namespace mcache
