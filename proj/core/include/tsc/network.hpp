#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "tsc/common.hpp"

namespace tsc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

struct Intersection {
    int id = 0;
    Vec2 pos;
    int tsc = -1;  // controller id, -1 = unsignalized
    bool operator==(const Intersection&) const = default;
};

struct Edge {
    int id = 0;
    int from = 0;
    int to = 0;
    double length = 0.0;  // m
    int lane_count = 0;
    bool operator==(const Edge&) const = default;
};

struct Lane {
    int id = 0;
    int edge = 0;
    int index = 0;  // 0 = rightmost
    double length = 0.0;
    double speed_limit = 0.0;  // m/s
    bool operator==(const Lane&) const = default;
};

struct Connection {
    int id = 0;
    int entry_lane = 0;
    int exit_lane = 0;
    int tsc = -1;  // -1 = uncontrolled, behaves as permanently open with priority
    bool operator==(const Connection&) const = default;
};

enum class PhaseKind : uint8_t { Green, Yellow };

struct Phase {
    PhaseKind kind = PhaseKind::Green;
    double duration = 0.0;           // fixed-time duration, s
    std::vector<int> open;           // connection ids open under this phase
    std::vector<uint8_t> priority;   // parallel to `open`
    bool operator==(const Phase&) const = default;
};

struct PhaseProgram {
    int tsc = 0;
    int intersection = 0;
    std::vector<Phase> phases;  // cyclic; greens alternate with 5 s yellows
    bool operator==(const PhaseProgram&) const = default;
};

struct RoadNetwork {
    std::vector<Intersection> intersections;
    std::vector<Edge> edges;
    std::vector<Lane> lanes;
    std::vector<Connection> connections;
    std::vector<PhaseProgram> programs;
    bool operator==(const RoadNetwork&) const = default;
};

// Throws ValidationError naming the violated invariant.
void validate(const RoadNetwork& net);

// Geometric conflict sets between connections at the same intersection.
// Two connections conflict when they come from different entry edges and
// either share the exit lane or their through-paths cross. Deterministic
// function of topology + intersection positions; used both for phase
// synthesis and for priority yielding in the simulator.
std::vector<std::vector<int>> compute_connection_conflicts(const RoadNetwork& net);

// Derived lookups over a validated network. Read-only and shareable.
class NetworkIndex {
public:
    explicit NetworkIndex(const RoadNetwork& net);

    const RoadNetwork& net() const { return *net_; }

    const Intersection& intersection(int id) const { return net_->intersections[at(intersection_pos_, id, "intersection")]; }
    const Edge& edge(int id) const { return net_->edges[at(edge_pos_, id, "edge")]; }
    const Lane& lane(int id) const { return net_->lanes[at(lane_pos_, id, "lane")]; }
    const Connection& connection(int id) const { return net_->connections[at(connection_pos_, id, "connection")]; }
    bool has_lane(int id) const { return lane_pos_.count(id) > 0; }

    const std::vector<int>& tsc_ids() const { return tsc_ids_; }  // sorted
    bool has_tsc(int tsc) const { return program_pos_.count(tsc) > 0; }
    const PhaseProgram& program(int tsc) const { return net_->programs[at(program_pos_, tsc, "tsc")]; }

    const std::vector<int>& out_connections(int lane_id) const { return lane_out_[at(lane_pos_, lane_id, "lane")]; }
    const std::vector<int>& in_connections(int lane_id) const { return lane_in_[at(lane_pos_, lane_id, "lane")]; }
    const std::vector<int>& connections_of(int tsc) const { return tsc_conns_[at(program_pos_, tsc, "tsc")]; }
    const std::vector<int>& inbound_lanes(int tsc) const { return tsc_inbound_lanes_[at(program_pos_, tsc, "tsc")]; }
    // entry + exit lanes of the controller's connections, sorted, deduplicated
    const std::vector<int>& involved_lanes(int tsc) const { return tsc_involved_lanes_[at(program_pos_, tsc, "tsc")]; }

    const std::vector<int>& conflicts(int connection_id) const { return conflicts_[at(connection_pos_, connection_id, "connection")]; }

    // -1 closed, 0 open without priority, 1 open with priority
    int open_state(int connection_id, int phase_index) const;

    // phase switches until the connection next opens; 0 if open now.
    // Returns the program length when the connection never opens.
    int switches_to_open(int connection_id, int phase_index) const;
    // priority flag at that opening (current flag when open now)
    bool next_opening_has_priority(int connection_id, int phase_index) const;

    int lane_position(int lane_id) const { return at(lane_pos_, lane_id, "lane"); }
    int connection_position(int conn_id) const { return at(connection_pos_, conn_id, "connection"); }

private:
    static int at(const std::unordered_map<int, int>& m, int id, const char* what);

    const RoadNetwork* net_;
    std::unordered_map<int, int> intersection_pos_, edge_pos_, lane_pos_, connection_pos_, program_pos_;
    std::vector<int> tsc_ids_;
    std::vector<std::vector<int>> lane_out_, lane_in_;
    std::vector<std::vector<int>> tsc_conns_, tsc_inbound_lanes_, tsc_involved_lanes_;
    std::vector<std::vector<int>> conflicts_;
    // per connection, per phase of its program: open state
    std::vector<std::vector<int8_t>> phase_state_;
};

}  // namespace tsc
