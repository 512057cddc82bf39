#pragma once

#include <cstdint>

#include "tsc/network.hpp"

namespace tsc {

struct GenParams {
    // signalized (core) intersections; boundary stubs are added on top
    int min_intersections = 2;
    int max_intersections = 6;
    double min_edge_length = 100.0;
    double max_edge_length = 200.0;
    int min_lanes = 1;
    int max_lanes = 4;
    double green_duration = 30.0;  // fixed-time default green, s
};

// Deterministic in (seed, params). Every core intersection ends up with at
// least two approaches, a controller, and a synthesized phase program.
RoadNetwork generate_network(uint64_t seed, const GenParams& params = {});

}  // namespace tsc
