#include "tsc/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "tsc/rng.hpp"

namespace tsc {

namespace {

constexpr double kBlockSeconds = 120.0;
constexpr int kRouteRetries = 100;

// shortest path by free-flow traversal time over the lane/connection graph
std::vector<int> shortest_route(const NetworkIndex& index, int origin, int dest) {
    if (origin == dest) return {};
    const RoadNetwork& net = index.net();
    size_t n = net.lanes.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n, -1);
    auto pos = [&](int lane_id) { return static_cast<size_t>(index.lane_position(lane_id)); };

    using Item = std::pair<double, int>;  // (cost, lane id)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const Lane& o = index.lane(origin);
    dist[pos(origin)] = o.length / o.speed_limit;
    heap.push({dist[pos(origin)], origin});
    while (!heap.empty()) {
        auto [d, lane_id] = heap.top();
        heap.pop();
        if (d > dist[pos(lane_id)]) continue;
        if (lane_id == dest) break;
        for (int cid : index.out_connections(lane_id)) {
            int next = index.connection(cid).exit_lane;
            const Lane& nl = index.lane(next);
            double nd = d + nl.length / nl.speed_limit;
            if (nd < dist[pos(next)]) {
                dist[pos(next)] = nd;
                prev[pos(next)] = lane_id;
                heap.push({nd, next});
            }
        }
    }
    if (!std::isfinite(dist[pos(dest)])) return {};
    std::vector<int> route;
    for (int at = dest; at != -1; at = prev[pos(at)]) route.push_back(at);
    std::reverse(route.begin(), route.end());
    return route;
}

}  // namespace

void validate(const TripTable& trips, const NetworkIndex& index) {
    double last_depart = -std::numeric_limits<double>::infinity();
    for (const Trip& t : trips.trips) {
        if (t.depart < last_depart)
            throw ValidationError("departure times non-decreasing: trip " + std::to_string(t.id));
        last_depart = t.depart;
        if (t.route.size() < 2)
            throw ValidationError("route has at least 2 lanes: trip " + std::to_string(t.id));
        for (size_t i = 0; i + 1 < t.route.size(); ++i) {
            if (!index.has_lane(t.route[i]))
                throw ValidationError("route lane exists: trip " + std::to_string(t.id));
            bool linked = false;
            for (int cid : index.out_connections(t.route[i])) {
                if (index.connection(cid).exit_lane == t.route[i + 1]) linked = true;
            }
            if (!linked)
                throw ValidationError("consecutive route lanes joined by a connection: trip " + std::to_string(t.id));
        }
        if (!index.has_lane(t.route.back()))
            throw ValidationError("route lane exists: trip " + std::to_string(t.id));
    }
}

TripTable generate_demand(uint64_t seed, const NetworkIndex& index, double rate, double horizon,
                          DemandTrace* trace) {
    if (rate <= 0.0) throw ValidationError("demand rate must be positive");
    if (horizon < 0.0) throw ValidationError("demand horizon must be nonnegative");

    const RoadNetwork& net = index.net();
    std::vector<int> origins, dests;
    for (const Lane& l : net.lanes) {
        if (!index.out_connections(l.id).empty()) origins.push_back(l.id);
        if (!index.in_connections(l.id).empty()) dests.push_back(l.id);
    }
    if (origins.empty() || dests.empty()) throw ValidationError("no routable pairs");

    Rng rng(mix_seed(seed, 0xDE3A));

    // arrival times first, then per-block weights in block order
    std::vector<double> arrivals;
    double t = 0.0;
    while (true) {
        t += rng.exponential() / rate;
        if (t >= horizon) break;
        arrivals.push_back(t);
    }

    int n_blocks = static_cast<int>(std::ceil(horizon / kBlockSeconds));
    std::vector<std::vector<double>> ow(static_cast<size_t>(n_blocks)), dw(static_cast<size_t>(n_blocks));
    for (int b = 0; b < n_blocks; ++b) {
        ow[static_cast<size_t>(b)] = rng.dirichlet_uniform(origins.size());
        dw[static_cast<size_t>(b)] = rng.dirichlet_uniform(dests.size());
    }
    if (trace) {
        trace->origin_weights = ow;
        trace->dest_weights = dw;
        trace->origin_lanes = origins;
        trace->dest_lanes = dests;
    }

    TripTable table;
    int next_id = 0;
    for (double depart : arrivals) {
        int block = static_cast<int>(depart / kBlockSeconds);
        std::vector<int> route;
        for (int attempt = 0; attempt < kRouteRetries && route.empty(); ++attempt) {
            int o = origins[rng.categorical(ow[static_cast<size_t>(block)])];
            int d = dests[rng.categorical(dw[static_cast<size_t>(block)])];
            route = shortest_route(index, o, d);
        }
        if (route.empty()) continue;  // no path between sampled pairs this block
        Trip trip;
        trip.id = next_id++;
        trip.depart = depart;
        trip.route = std::move(route);
        table.trips.push_back(std::move(trip));
    }
    return table;
}

}  // namespace tsc
