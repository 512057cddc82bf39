#pragma once

#include <cstdint>
#include <vector>

#include "tsc/network.hpp"

namespace tsc {

struct Trip {
    int id = 0;
    double depart = 0.0;     // s
    std::vector<int> route;  // lane ids, >= 2, consecutive lanes joined by a connection
    bool operator==(const Trip&) const = default;
};

struct TripTable {
    std::vector<Trip> trips;  // non-decreasing departure times
    bool operator==(const TripTable&) const = default;
};

void validate(const TripTable& trips, const NetworkIndex& index);

// Introspection for tests: the per-block origin/destination weights.
struct DemandTrace {
    std::vector<std::vector<double>> origin_weights;  // one entry per 120 s block
    std::vector<std::vector<double>> dest_weights;
    std::vector<int> origin_lanes;  // candidate lane ids the weights refer to
    std::vector<int> dest_lanes;
};

// Poisson arrivals at `rate` trips/s over [0, horizon). Origin/destination
// draws follow per-block categorical weights redrawn at every 120 s boundary;
// routes are shortest free-flow-time lane paths. Deterministic in all
// arguments. Throws ValidationError("no routable pairs") when the network has
// no two lanes joined by a connection.
TripTable generate_demand(uint64_t seed, const NetworkIndex& index, double rate, double horizon,
                          DemandTrace* trace = nullptr);

}  // namespace tsc
