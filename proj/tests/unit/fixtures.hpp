#pragma once

#include "mcache/core_model.hpp"

namespace fixture {

// Small instance with non-overlapping service disks; radio defaults untouched.
inline mcache::ScenarioConfig desk(std::size_t caches, std::size_t segments, std::uint64_t seed = 1) {
    mcache::ScenarioConfig sc;
    sc.segment_count = static_cast<int>(segments);
    sc.cache_positions = mcache::place_caches_disjoint(caches, sc.cell_radius, sc.cache_service_radius, seed);
    return sc;
}

}  // namespace fixture
