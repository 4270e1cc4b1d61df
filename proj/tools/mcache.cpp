// Command-line front end: loads a config, applies flag overrides, runs one experiment.
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mcache/exact_solver.hpp"
#include "mcache/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Downlink caching MDP experiments"};
    std::string config_path;
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> replications;
    bool serial = false;
    app.add_option("--config", config_path, "INI config file; omitted keys take defaults");
    app.add_option("--experiment", experiment, "sweep, bounds or validate")
        ->check(CLI::IsMember({"sweep", "bounds", "validate"}));
    app.add_option("--seed", seed, "Master RNG seed");
    app.add_option("--out", out, "Output CSV path (metadata goes to <out>.meta.json)");
    app.add_option("--replications", replications, "Lifetimes simulated per grid point");
    app.add_flag("--serial", serial, "Disable OpenMP kernels");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : mcache::kExitConfigError;
    }

    mcache::ExperimentSpec spec;
    try {
        if (!config_path.empty()) spec = mcache::load_config(config_path);
    } catch (const mcache::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return mcache::kExitConfigError;
    }
    if (experiment) {
        if (*experiment == "sweep") spec.experiment = mcache::ExperimentKind::sweep;
        else if (*experiment == "bounds") spec.experiment = mcache::ExperimentKind::bounds;
        else spec.experiment = mcache::ExperimentKind::validate;
    }
    if (seed) spec.seed = *seed;
    if (out) spec.output_path = *out;
    if (replications) spec.replications = *replications;

    try {
        return mcache::run(spec, std::cerr, serial ? mcache::Execution::serial : mcache::Execution::parallel);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mcache::kExitValidationFailure;
    }
}
