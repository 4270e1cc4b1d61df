#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

/// Cache-assisted downlink multicast: domain types, cell geometry and the
/// Poisson request process.
namespace mcache {

using Rng = std::mt19937_64;

/// Generator for an independent stream derived from (seed, stream).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

/// Geometry, radio constants, cost weights and the per-file request model.
///
/// Cache positions are always explicit here; placement sampling happens when
/// a config is loaded (see place_caches_annulus / place_caches_disjoint).
struct ScenarioConfig {
    double cell_radius = 500.0;
    std::vector<Point> cache_positions;
    double cache_service_radius = 90.0;
    int antenna_count = 8;
    double pathloss_exponent = 3.5;
    double reference_distance = 1.0;
    double noise_power = 1e-13;
    double shadowing_sigma_db = 8.0;
    double file_bits = 140e6;
    int segment_count = 10;
    double w_e = 1.0;
    double w_t = 100.0;
    double request_intensity = 1.0;
    double lifetime = 1.0;
    /// Optional transmit power cap in watts; infinite means no cap.
    double max_transmit_power = std::numeric_limits<double>::infinity();
    /// Round symbol counts up to integers (never breaks decodability).
    bool integer_symbols = false;

    std::size_t cache_count() const { return cache_positions.size(); }
    std::size_t segments() const { return static_cast<std::size_t>(segment_count); }
    double segment_bits() const { return file_bits / segment_count; }
    double rate_times_lifetime() const { return request_intensity * lifetime; }

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;
};

/// Which (cache, segment) pairs are buffered. Bit (c, s) lives at c*N_S + s.
class BufferState {
public:
    BufferState() = default;
    BufferState(std::size_t caches, std::size_t segments);

    static BufferState full(std::size_t caches, std::size_t segments);
    /// Builds a state from its integer encoding (requires caches*segments <= 64).
    static BufferState from_index(std::size_t caches, std::size_t segments, std::uint64_t index);
    static BufferState from_hex(std::size_t caches, std::size_t segments, const std::string& hex);

    std::size_t caches() const { return caches_; }
    std::size_t segments() const { return segments_; }
    std::size_t bit_count() const { return bits_.size(); }

    bool has(std::size_t cache, std::size_t segment) const;
    void set(std::size_t cache, std::size_t segment);
    std::size_t count() const { return bits_.count(); }
    bool is_full() const { return bits_.all(); }
    bool is_subset_of(const BufferState& other) const;

    std::uint64_t index() const;
    /// Lower-case hex of the integer encoding, ceil(bits/4) digits wide.
    std::string hex() const;

    friend bool operator==(const BufferState& a, const BufferState& b);
    friend bool operator<(const BufferState& a, const BufferState& b);

private:
    std::size_t caches_ = 0;
    std::size_t segments_ = 0;
    boost::dynamic_bitset<std::uint64_t> bits_;
};

/// Large-scale fading seen during one request.
struct FadingRealization {
    Point user_position;
    double user_pathloss = 1.0;
    std::vector<double> user_shadowing;   // per segment
    std::vector<double> cache_shadowing;  // caches x segments, row-major

    double cache_shadow(std::size_t cache, std::size_t segment) const {
        return cache_shadowing[cache * user_shadowing.size() + segment];
    }
};

struct RequestTrace {
    std::vector<double> arrival_times;
    std::vector<FadingRealization> fading;

    std::size_t request_count() const { return arrival_times.size(); }
};

using FadingPool = std::vector<FadingRealization>;

/// Poisson probability of n arrivals with mean rate_times_time, in log space.
double poisson_pmf(long n, double rate_times_time);

/// Smallest horizon whose cumulative Poisson mass reaches 1 - mass_tolerance.
std::size_t truncation_horizon(double rate_times_time, double mass_tolerance);

inline constexpr double kHorizonTolerance = 1e-9;

/// Distance-based gain (d/d0)^-alpha; distances below d0 clamp to unit gain.
double pathloss(const ScenarioConfig& config, double dist);
double cache_pathloss(const ScenarioConfig& config, std::size_t cache);

bool in_service_disk(const ScenarioConfig& config, std::size_t cache, Point position);

/// True iff a cache holding `segment` serves `position`.
bool covered_by(const BufferState& state, std::size_t segment, Point position,
                const ScenarioConfig& config);

/// True iff no two service disks intersect.
bool coverage_disjoint(const ScenarioConfig& config);

FadingRealization sample_fading(const ScenarioConfig& config, Rng& rng);
FadingPool sample_fading_pool(const ScenarioConfig& config, std::size_t count,
                              std::uint64_t seed);
RequestTrace sample_request_trace(const ScenarioConfig& config, std::uint64_t rng_seed);

/// Uniform placement on the annulus [0.6 R, R - r_s].
std::vector<Point> place_caches_annulus(std::size_t count, double cell_radius,
                                        double service_radius, std::uint64_t seed);
/// Same annulus, rejecting positions whose service disk overlaps an earlier one.
/// Throws std::runtime_error when the disks do not fit.
std::vector<Point> place_caches_disjoint(std::size_t count, double cell_radius,
                                         double service_radius, std::uint64_t seed);

}  // namespace mcache
