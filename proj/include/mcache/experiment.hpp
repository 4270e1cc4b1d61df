#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcache/core_model.hpp"
#include "mcache/execution.hpp"
#include "mcache/simulator.hpp"

namespace mcache {

enum class ExperimentKind { sweep, bounds, validate };

std::string_view to_string(ExperimentKind kind);

/// Symbols per second at the 20 MHz downlink bandwidth. Only used to convert
/// symbol counts to airtime in metadata; optimization is bandwidth-free.
inline constexpr double kBandwidthHz = 20e6;

struct ExperimentSpec {
    ScenarioConfig scenario;
    ExperimentKind experiment = ExperimentKind::validate;
    std::vector<double> lambda_t_grid{1, 2, 4, 6, 8, 10};
    std::size_t replications = 200;
    std::uint64_t seed = 1;
    std::vector<PolicyKind> policies{PolicyKind::approx_online, PolicyKind::baseline_user_only,
                                     PolicyKind::baseline_push_all};
    std::string output_path;
    std::size_t fading_samples = 500;
    std::size_t bounds_stages = 8;

    // How scenario.cache_positions were produced; echoed in metadata.
    std::string cache_placement = "annulus";
    std::uint64_t cache_seed = 1;

    /// Keys present in the config file, "section.key".
    std::vector<std::string> explicit_keys;
};

/// Malformed spec. `field` is "section.key" when one is to blame.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// INI-style text: [scenario] and [experiment] sections of `key = value`.
/// Omitted keys keep their defaults; unknown keys are rejected.
ExperimentSpec parse_config(std::istream& in, const std::string& source_name = "<config>");
ExperimentSpec load_config(const std::string& path);

/// Throws ConfigError for malformed specs and TractabilityError when the
/// requested experiment needs the exact solver beyond its guard.
void validate_spec(const ExperimentSpec& spec);

/// Fields whose default is not taken from the paper, with their values.
std::vector<std::pair<std::string, std::string>> non_paper_values(const ExperimentSpec& spec);

enum ExitCode : int { kExitOk = 0, kExitValidationFailure = 1, kExitConfigError = 2 };

/// Runs the experiment and writes `output_path` plus `output_path.meta.json`.
/// Progress and diagnostics go to `log`. Returns an ExitCode.
int run(const ExperimentSpec& spec, std::ostream& log, Execution exec = Execution::parallel);

/// The CSV bodies, exposed for tests.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t seed);
void write_bounds_csv(std::ostream& out, const ScenarioConfig& scenario, std::size_t stages,
                      std::size_t fading_samples, std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace mcache
