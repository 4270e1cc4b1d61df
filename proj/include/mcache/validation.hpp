#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcache/core_model.hpp"
#include "mcache/execution.hpp"

namespace mcache {

struct CheckResult {
    std::string property;
    bool passed = false;
    std::string detail;
};

/// 2 caches x 2 segments with disjoint service disks, radio parameters
/// taken from `base`.
ScenarioConfig desk_instance(const ScenarioConfig& base, std::uint64_t seed);

/// Runtime invariant checks over every module. `scenario` is used as is when
/// the exact solver can handle it, otherwise a desk instance replaces it.
std::vector<CheckResult> run_validation_suite(const ScenarioConfig& scenario, std::uint64_t seed,
                                              std::size_t fading_samples, Execution exec = Execution::parallel);

}  // namespace mcache
