#include "mcache/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcache {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
    require(cell_radius > 0.0, "cell_radius", "must be positive");
    require(cache_service_radius > 0.0, "cache_service_radius", "must be positive");
    require(antenna_count > 0, "antenna_count", "must be positive");
    require(pathloss_exponent > 0.0, "pathloss_exponent", "must be positive");
    require(reference_distance > 0.0, "reference_distance", "must be positive");
    require(noise_power > 0.0, "noise_power", "must be positive");
    require(shadowing_sigma_db >= 0.0, "shadowing_sigma_db", "must be nonnegative");
    require(file_bits > 0.0, "file_bits", "must be positive");
    require(segment_count > 0, "segment_count", "must be positive");
    require(w_e > 0.0, "w_e", "must be positive");
    require(w_t > 0.0, "w_t", "must be positive");
    require(request_intensity >= 0.0, "request_intensity", "must be nonnegative");
    require(lifetime > 0.0, "lifetime", "must be positive");
    require(max_transmit_power > 0.0, "max_transmit_power", "must be positive");
    for (const auto& p : cache_positions)
        require(std::hypot(p.x, p.y) <= cell_radius, "cache_positions", "outside the cell disk");
}

// ---------------------------------------------------------------------------

BufferState::BufferState(std::size_t caches, std::size_t segments)
    : caches_(caches), segments_(segments), bits_(caches * segments) {}

BufferState BufferState::full(std::size_t caches, std::size_t segments) {
    BufferState s(caches, segments);
    s.bits_.set();
    return s;
}

BufferState BufferState::from_index(std::size_t caches, std::size_t segments, std::uint64_t index) {
    if (caches * segments > 64) throw std::length_error("BufferState::from_index: more than 64 bits");
    BufferState s(caches, segments);
    for (std::size_t b = 0; b < s.bits_.size(); ++b)
        if ((index >> b) & 1u) s.bits_.set(b);
    return s;
}

BufferState BufferState::from_hex(std::size_t caches, std::size_t segments, const std::string& hex) {
    BufferState s(caches, segments);
    const std::size_t n = hex.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char ch = hex[n - 1 - i];
        int nibble;
        if (ch >= '0' && ch <= '9') nibble = ch - '0';
        else if (ch >= 'a' && ch <= 'f') nibble = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') nibble = ch - 'A' + 10;
        else throw std::invalid_argument("BufferState::from_hex: bad digit in '" + hex + "'");
        for (int k = 0; k < 4; ++k) {
            if (!((nibble >> k) & 1)) continue;
            const std::size_t b = 4 * i + static_cast<std::size_t>(k);
            if (b >= s.bits_.size())
                throw std::invalid_argument("BufferState::from_hex: '" + hex + "' too wide");
            s.bits_.set(b);
        }
    }
    return s;
}

bool BufferState::has(std::size_t cache, std::size_t segment) const {
    return bits_.test(cache * segments_ + segment);
}

void BufferState::set(std::size_t cache, std::size_t segment) { bits_.set(cache * segments_ + segment); }

bool BufferState::is_subset_of(const BufferState& other) const {
    return bits_.size() == other.bits_.size() && bits_.is_subset_of(other.bits_);
}

std::uint64_t BufferState::index() const {
    if (bits_.size() > 64) throw std::length_error("BufferState::index: more than 64 bits");
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < bits_.size(); ++b)
        if (bits_.test(b)) v |= std::uint64_t{1} << b;
    return v;
}

std::string BufferState::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    const std::size_t width = std::max<std::size_t>(1, (bits_.size() + 3) / 4);
    std::string out(width, '0');
    for (std::size_t i = 0; i < width; ++i) {
        int nibble = 0;
        for (int k = 0; k < 4; ++k) {
            const std::size_t b = 4 * i + static_cast<std::size_t>(k);
            if (b < bits_.size() && bits_.test(b)) nibble |= 1 << k;
        }
        out[width - 1 - i] = digits[nibble];
    }
    return out;
}

bool operator==(const BufferState& a, const BufferState& b) {
    return a.caches_ == b.caches_ && a.segments_ == b.segments_ && a.bits_ == b.bits_;
}

bool operator<(const BufferState& a, const BufferState& b) {
    if (a.bits_.size() != b.bits_.size()) return a.bits_.size() < b.bits_.size();
    return a.bits_ < b.bits_;
}

// ---------------------------------------------------------------------------

double poisson_pmf(long n, double rate_times_time) {
    if (n < 0) throw std::domain_error("poisson_pmf: negative count");
    if (!(rate_times_time >= 0.0)) throw std::domain_error("poisson_pmf: negative rate");
    if (rate_times_time == 0.0) return n == 0 ? 1.0 : 0.0;
    const double dn = static_cast<double>(n);
    return std::exp(dn * std::log(rate_times_time) - rate_times_time - std::lgamma(dn + 1.0));
}

std::size_t truncation_horizon(double rate_times_time, double mass_tolerance) {
    if (!(mass_tolerance > 0.0 && mass_tolerance < 1.0))
        throw std::domain_error("truncation_horizon: tolerance outside (0,1)");
    double mass = 0.0;
    for (long n = 0;; ++n) {
        const double p = poisson_pmf(n, rate_times_time);
        mass += p;
        if (mass >= 1.0 - mass_tolerance) return static_cast<std::size_t>(n);
        // past the mode with an underflowed tail: nothing left to add
        if (p == 0.0 && static_cast<double>(n) > rate_times_time) return static_cast<std::size_t>(n);
    }
}

double pathloss(const ScenarioConfig& config, double dist) {
    const double d = std::max(dist, config.reference_distance);
    return std::pow(d / config.reference_distance, -config.pathloss_exponent);
}

double cache_pathloss(const ScenarioConfig& config, std::size_t cache) {
    return pathloss(config, distance(config.cache_positions.at(cache), Point{}));
}

bool in_service_disk(const ScenarioConfig& config, std::size_t cache, Point position) {
    return distance(position, config.cache_positions[cache]) <= config.cache_service_radius;
}

bool covered_by(const BufferState& state, std::size_t segment, Point position,
                const ScenarioConfig& config) {
    for (std::size_t c = 0; c < state.caches(); ++c)
        if (state.has(c, segment) && in_service_disk(config, c, position)) return true;
    return false;
}

bool coverage_disjoint(const ScenarioConfig& config) {
    const auto& pos = config.cache_positions;
    for (std::size_t a = 0; a < pos.size(); ++a)
        for (std::size_t b = a + 1; b < pos.size(); ++b)
            if (distance(pos[a], pos[b]) < 2.0 * config.cache_service_radius) return false;
    return true;
}

// ---------------------------------------------------------------------------

namespace {

Point uniform_in_annulus(double r_min, double r_max, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const double r = std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace

FadingRealization sample_fading(const ScenarioConfig& config, Rng& rng) {
    const std::size_t nc = config.cache_count();
    const std::size_t ns = config.segments();
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double db_to_ln = config.shadowing_sigma_db * std::numbers::ln10 / 10.0;

    FadingRealization f;
    f.user_position = uniform_in_annulus(0.0, config.cell_radius, rng);
    f.user_pathloss = pathloss(config, distance(f.user_position, Point{}));
    f.user_shadowing.resize(ns);
    for (auto& eta : f.user_shadowing) eta = std::exp(db_to_ln * gauss(rng));
    f.cache_shadowing.resize(nc * ns);
    for (auto& eta : f.cache_shadowing) eta = std::exp(db_to_ln * gauss(rng));
    return f;
}

FadingPool sample_fading_pool(const ScenarioConfig& config, std::size_t count, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x706f6f6cULL);
    FadingPool pool;
    pool.reserve(count);
    for (std::size_t m = 0; m < count; ++m) pool.push_back(sample_fading(config, rng));
    return pool;
}

RequestTrace sample_request_trace(const ScenarioConfig& config, std::uint64_t rng_seed) {
    Rng rng = make_rng(rng_seed);
    RequestTrace trace;
    const double mean = config.rate_times_lifetime();
    if (mean <= 0.0) return trace;

    std::poisson_distribution<long> count(mean);
    const auto n = static_cast<std::size_t>(count(rng));
    std::uniform_real_distribution<double> when(0.0, config.lifetime);
    trace.arrival_times.resize(n);
    for (auto& t : trace.arrival_times) t = when(rng);
    std::sort(trace.arrival_times.begin(), trace.arrival_times.end());
    trace.fading.reserve(n);
    for (std::size_t i = 0; i < n; ++i) trace.fading.push_back(sample_fading(config, rng));
    return trace;
}

std::vector<Point> place_caches_annulus(std::size_t count, double cell_radius,
                                        double service_radius, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x63616368ULL);
    const double r_min = 0.6 * cell_radius;
    const double r_max = std::max(r_min, cell_radius - service_radius);
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(uniform_in_annulus(r_min, r_max, rng));
    return out;
}

std::vector<Point> place_caches_disjoint(std::size_t count, double cell_radius,
                                         double service_radius, std::uint64_t seed) {
    constexpr int kMaxAttempts = 100000;
    Rng rng = make_rng(seed, 0x646a6e74ULL);
    const double r_min = 0.6 * cell_radius;
    const double r_max = std::max(r_min, cell_radius - service_radius);
    std::vector<Point> out;
    out.reserve(count);
    int attempts = 0;
    while (out.size() < count) {
        if (++attempts > kMaxAttempts)
            throw std::runtime_error("place_caches_disjoint: cannot fit " + std::to_string(count) +
                                     " non-overlapping service disks");
        const Point p = uniform_in_annulus(r_min, r_max, rng);
        const bool clear = std::all_of(out.begin(), out.end(), [&](Point q) {
            return distance(p, q) >= 2.0 * service_radius;
        });
        if (clear) out.push_back(p);
    }
    return out;
}

}  // namespace mcache
