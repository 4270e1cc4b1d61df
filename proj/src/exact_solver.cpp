#include "mcache/exact_solver.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "mcache/power_time.hpp"

namespace mcache {

std::vector<SegmentAction> actions_of(const Plan& plan) {
    std::vector<SegmentAction> out;
    out.reserve(plan.size());
    for (const auto& p : plan) out.push_back(p.action);
    return out;
}

ActionGrid action_grid(const ScenarioConfig& config, const BufferState& state,
                       const FadingRealization& fading) {
    const ChannelSnapshot snap = channel_snapshot(config, fading);
    const WeightPair weights = weights_of(config);
    ActionGrid grid(snap.segments);
    for (std::size_t s = 0; s < snap.segments; ++s) {
        if (covered_by(state, s, fading.user_position, config)) {
            grid[s].push_back(Candidate{});
            continue;
        }
        const SegmentAction user = serve_action(config, snap.user(s));
        grid[s].push_back({kUserTarget, user, action_cost(user, weights)});
        for (std::size_t c = 0; c < snap.caches; ++c) {
            if (state.has(c, s) || !(snap.cache(c, s) < snap.user(s))) continue;
            const SegmentAction a = serve_action(config, snap.cache(c, s));
            grid[s].push_back({static_cast<int>(c), a, action_cost(a, weights)});
        }
    }
    return grid;
}

namespace {

void check_dimensions(const ScenarioConfig& config, const BufferState& state,
                      const FadingRealization& fading, std::size_t action_count) {
    const std::size_t nc = config.cache_count(), ns = config.segments();
    if (state.caches() != nc || state.segments() != ns || fading.user_shadowing.size() != ns ||
        fading.cache_shadowing.size() != nc * ns || action_count != ns)
        throw std::invalid_argument("dimension mismatch between config, state, fading and actions");
}

}  // namespace

BufferState transition(const ScenarioConfig& config, const BufferState& state,
                       const FadingRealization& fading, std::span<const SegmentAction> actions,
                       RateModel model) {
    check_dimensions(config, state, fading, actions.size());
    BufferState next = state;
    const double threshold = config.segment_bits();
    for (std::size_t s = 0; s < config.segments(); ++s) {
        if (!actions[s].transmits() || covered_by(state, s, fading.user_position, config)) continue;
        for (std::size_t c = 0; c < config.cache_count(); ++c) {
            if (state.has(c, s)) continue;
            if (decodes(cache_link(config, fading, c, s), actions[s], threshold, model)) next.set(c, s);
        }
    }
    return next;
}

double stage_cost(const ScenarioConfig& config, const BufferState& state,
                  const FadingRealization& fading, std::span<const SegmentAction> actions) {
    check_dimensions(config, state, fading, actions.size());
    const WeightPair weights = weights_of(config);
    double total = 0.0;
    for (std::size_t s = 0; s < config.segments(); ++s)
        if (!covered_by(state, s, fading.user_position, config)) total += action_cost(actions[s], weights);
    return total;
}

void require_tractable(const ScenarioConfig& config) {
    const std::size_t bits = config.cache_count() * config.segments();
    if (bits > kMaxExactBits)
        throw TractabilityError("exact solver refused: " + std::to_string(config.cache_count()) + " caches x " +
                                std::to_string(config.segments()) + " segments = " + std::to_string(bits) +
                                " buffer bits exceeds the limit of " + std::to_string(kMaxExactBits));
}

// ---------------------------------------------------------------------------

ValueTable::ValueTable(std::size_t caches, std::size_t segments, std::size_t stages)
    : caches_(caches),
      segments_(segments),
      stages_(stages),
      state_count_(std::size_t{1} << (caches * segments)),
      values_((stages + 1) * state_count_, 0.0) {
    if (caches * segments > kMaxExactBits) throw TractabilityError("ValueTable: too many buffer bits");
}

void ValueTable::write(std::ostream& out) const {
    out << "# mcache value table\n";
    out << "# caches=" << caches_ << " segments=" << segments_ << " stages=" << stages_ << "\n";
    out << "stage,state_hex,value\n";
    out << std::setprecision(17);
    for (std::size_t k = 1; k <= stages_; ++k)
        for (std::uint64_t i = 0; i < state_count_; ++i)
            out << k << ',' << BufferState::from_index(caches_, segments_, i).hex() << ',' << value(k, i) << '\n';
}

ValueTable ValueTable::read(std::istream& in) {
    std::string line;
    std::size_t caches = 0, segments = 0, stages = 0;
    bool have_dims = false;
    while (std::getline(in, line)) {
        if (line.rfind("# caches=", 0) == 0) {
            if (std::sscanf(line.c_str(), "# caches=%zu segments=%zu stages=%zu", &caches, &segments, &stages) != 3)
                throw std::runtime_error("ValueTable::read: malformed dimension line");
            have_dims = true;
        } else if (line.rfind("stage,", 0) == 0) {
            break;
        }
    }
    if (!have_dims) throw std::runtime_error("ValueTable::read: missing dimension line");
    ValueTable table(caches, segments, stages);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string k_text, hex, v_text;
        if (!std::getline(row, k_text, ',') || !std::getline(row, hex, ',') || !std::getline(row, v_text))
            throw std::runtime_error("ValueTable::read: malformed row '" + line + "'");
        const std::size_t k = std::stoul(k_text);
        if (k == 0 || k > stages) throw std::runtime_error("ValueTable::read: stage out of range");
        const auto idx = BufferState::from_hex(caches, segments, hex).index();
        table.stage(k)[idx] = std::stod(v_text);
        ++rows;
    }
    if (rows != stages * table.state_count()) throw std::runtime_error("ValueTable::read: incomplete table");
    return table;
}

// ---------------------------------------------------------------------------

namespace {

// Everything about one fading draw that does not depend on the buffer state.
// Receiver r = 0 is the user, r = 1 + c is cache c.
struct DrawKernel {
    std::uint64_t in_disk = 0;          // bit c: user inside cache c's disk
    std::vector<double> theta;          // segments x receivers
    std::vector<double> cost;           // cost of the action targeting r
    std::vector<std::uint64_t> hears;   // state bits of caches decoding that action
    std::vector<SegmentAction> action;
};

struct Dims {
    std::size_t caches;
    std::size_t segments;
    std::size_t receivers() const { return caches + 1; }
    std::uint64_t bit(std::size_t c, std::size_t s) const { return std::uint64_t{1} << (c * segments + s); }
};

DrawKernel make_kernel(const ScenarioConfig& config, const FadingRealization& fading, Dims dims) {
    const ChannelSnapshot snap = channel_snapshot(config, fading);
    const WeightPair weights = weights_of(config);
    const double threshold = config.segment_bits();
    const std::size_t nr = dims.receivers();

    DrawKernel k;
    for (std::size_t c = 0; c < dims.caches; ++c)
        if (in_service_disk(config, c, fading.user_position)) k.in_disk |= std::uint64_t{1} << c;
    k.theta.resize(dims.segments * nr);
    k.cost.resize(dims.segments * nr);
    k.hears.resize(dims.segments * nr, 0);
    k.action.resize(dims.segments * nr);
    for (std::size_t s = 0; s < dims.segments; ++s) {
        k.theta[s * nr] = snap.user(s);
        for (std::size_t c = 0; c < dims.caches; ++c) k.theta[s * nr + 1 + c] = snap.cache(c, s);
        for (std::size_t r = 0; r < nr; ++r) {
            const std::size_t at = s * nr + r;
            // a cache target is only ever used below the user's channel
            if (r > 0 && !(k.theta[at] < k.theta[s * nr])) continue;
            k.action[at] = serve_action(config, k.theta[at]);
            k.cost[at] = action_cost(k.action[at], weights);
            for (std::size_t c = 0; c < dims.caches; ++c)
                if (decodes_hisnr(snap.cache(c, s), k.action[at], threshold)) k.hears[at] |= dims.bit(c, s);
        }
    }
    return k;
}

std::vector<DrawKernel> make_kernels(const ScenarioConfig& config, const FadingPool& pool, Dims dims) {
    std::vector<DrawKernel> out;
    out.reserve(pool.size());
    for (const auto& f : pool) out.push_back(make_kernel(config, f, dims));
    return out;
}

struct Option {
    double cost;
    std::uint64_t gained;
    int receiver;  // -1: no transmission
};

// Options for one segment in one state; user first, then caches by index.
void segment_options(const DrawKernel& k, std::uint64_t state, std::size_t s, Dims dims,
                     std::vector<Option>& out) {
    out.clear();
    bool covered = false;
    for (std::size_t c = 0; c < dims.caches && !covered; ++c)
        covered = (state & dims.bit(c, s)) && ((k.in_disk >> c) & 1u);
    if (covered) {
        out.push_back({0.0, 0, -1});
        return;
    }
    const std::size_t nr = dims.receivers();
    out.push_back({k.cost[s * nr], k.hears[s * nr] & ~state, 0});
    for (std::size_t c = 0; c < dims.caches; ++c) {
        const std::size_t at = s * nr + 1 + c;
        if ((state & dims.bit(c, s)) || !(k.theta[at] < k.theta[s * nr])) continue;
        out.push_back({k.cost[at], k.hears[at] & ~state, static_cast<int>(1 + c)});
    }
}

// Joint minimization over the per-segment option lists. `continuation` is
// indexed by next-state. Returns the minimum and, if requested, the argmin
// (first in odometer order on ties).
struct JointResult {
    double value = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> choice;
};

template <class Continuation>
JointResult joint_minimum(const std::vector<std::vector<Option>>& options, std::uint64_t state,
                          const Continuation& continuation, bool want_choice) {
    const std::size_t ns = options.size();
    JointResult best;
    std::vector<std::size_t> pick(ns, 0);
    if (want_choice) best.choice.assign(ns, 0);
    while (true) {
        double cost = 0.0;
        std::uint64_t next = state;
        for (std::size_t s = 0; s < ns; ++s) {
            const Option& o = options[s][pick[s]];
            cost += o.cost;
            next |= o.gained;
        }
        const double v = cost + continuation(next);
        if (v < best.value) {
            best.value = v;
            if (want_choice) best.choice = pick;
        }
        std::size_t s = 0;
        while (s < ns && ++pick[s] == options[s].size()) pick[s++] = 0;
        if (s == ns) break;
    }
    return best;
}

double state_backup(const std::vector<DrawKernel>& kernels, std::span<const double> previous,
                    std::uint64_t state, Dims dims) {
    std::vector<std::vector<Option>> options(dims.segments);
    double sum = 0.0;
    for (const auto& k : kernels) {
        for (std::size_t s = 0; s < dims.segments; ++s) segment_options(k, state, s, dims, options[s]);
        sum += joint_minimum(options, state, [&](std::uint64_t next) { return previous[next]; }, false).value;
    }
    return sum / static_cast<double>(kernels.size());
}

void backup_stage_serial(const std::vector<DrawKernel>& kernels, std::span<const double> previous,
                         std::span<double> current, Dims dims) {
    for (std::size_t i = 0; i < current.size(); ++i) current[i] = state_backup(kernels, previous, i, dims);
}

void backup_stage_parallel(const std::vector<DrawKernel>& kernels, std::span<const double> previous,
                           std::span<double> current, Dims dims) {
    const auto n = static_cast<long>(current.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i)
        current[static_cast<std::size_t>(i)] = state_backup(kernels, previous, static_cast<std::uint64_t>(i), dims);
}

}  // namespace

ValueTable value_iteration(const ScenarioConfig& config, std::size_t stages, const FadingPool& pool,
                           Execution exec) {
    require_tractable(config);
    if (pool.empty()) throw std::invalid_argument("value_iteration: empty fading pool");
    const Dims dims{config.cache_count(), config.segments()};
    const auto kernels = make_kernels(config, pool, dims);
    ValueTable table(dims.caches, dims.segments, stages);
    for (std::size_t k = 1; k <= stages; ++k) {
        if (exec == Execution::parallel)
            backup_stage_parallel(kernels, table.stage(k - 1), table.stage(k), dims);
        else
            backup_stage_serial(kernels, table.stage(k - 1), table.stage(k), dims);
    }
    return table;
}

ValueTable value_iteration(const ScenarioConfig& config, std::size_t stages, std::size_t fading_samples,
                           std::uint64_t rng_seed, Execution exec) {
    require_tractable(config);
    return value_iteration(config, stages, sample_fading_pool(config, fading_samples, rng_seed), exec);
}

std::vector<double> bellman_samples(const ScenarioConfig& config, const ValueTable& table, std::size_t k,
                                    const BufferState& state, const FadingPool& pool) {
    if (k == 0 || k > table.stages()) throw std::out_of_range("bellman_samples: stage out of range");
    const Dims dims{config.cache_count(), config.segments()};
    const auto previous = table.stage(k - 1);
    const std::uint64_t idx = state.index();
    std::vector<std::vector<Option>> options(dims.segments);
    std::vector<double> out;
    out.reserve(pool.size());
    for (const auto& f : pool) {
        const DrawKernel kernel = make_kernel(config, f, dims);
        for (std::size_t s = 0; s < dims.segments; ++s) segment_options(kernel, idx, s, dims, options[s]);
        out.push_back(joint_minimum(options, idx, [&](std::uint64_t n) { return previous[n]; }, false).value);
    }
    return out;
}

std::vector<double> random_horizon_continuation(const ValueTable& table, double rate_times_remaining) {
    const std::size_t horizon = truncation_horizon(rate_times_remaining, kHorizonTolerance);
    if (horizon > table.stages())
        throw std::out_of_range("value table has " + std::to_string(table.stages()) + " stages, horizon needs " +
                                std::to_string(horizon));
    std::vector<double> out(table.state_count(), 0.0);
    for (std::size_t n = 1; n <= horizon; ++n) {
        const double p = poisson_pmf(static_cast<long>(n), rate_times_remaining);
        const auto stage = table.stage(n);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += p * stage[i];
    }
    return out;
}

Plan random_stage_policy(const ValueTable& table, const BufferState& state, const FadingRealization& fading,
                         double remaining_lifetime, const ScenarioConfig& config) {
    check_dimensions(config, state, fading, config.segments());
    const Dims dims{config.cache_count(), config.segments()};
    const auto continuation =
        random_horizon_continuation(table, config.request_intensity * std::max(0.0, remaining_lifetime));
    const DrawKernel kernel = make_kernel(config, fading, dims);
    const std::uint64_t idx = state.index();

    std::vector<std::vector<Option>> options(dims.segments);
    for (std::size_t s = 0; s < dims.segments; ++s) segment_options(kernel, idx, s, dims, options[s]);
    const auto best = joint_minimum(options, idx, [&](std::uint64_t n) { return continuation[n]; }, true);

    Plan plan(dims.segments);
    for (std::size_t s = 0; s < dims.segments; ++s) {
        const Option& o = options[s][best.choice[s]];
        if (o.receiver < 0) continue;
        plan[s].action = kernel.action[s * dims.receivers() + static_cast<std::size_t>(o.receiver)];
        plan[s].target = o.receiver == 0 ? kUserTarget : o.receiver - 1;
    }
    return plan;
}

double exact_system_cost(const ValueTable& table, const ScenarioConfig& config) {
    const auto continuation = random_horizon_continuation(table, config.rate_times_lifetime());
    return continuation[0];
}

}  // namespace mcache
