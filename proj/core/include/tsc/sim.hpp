#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsc/demand.hpp"
#include "tsc/network.hpp"

namespace tsc {

enum class TscAction : uint8_t { Prolong = 0, Switch = 1 };

struct Vehicle {
    int trip = 0;
    int lane = 0;          // current lane id
    double pos = 0.0;      // rear bumper offset from lane start, m
    double speed = 0.0;    // m/s
    double max_speed = 0.0;
    int route_index = 0;   // position of `lane` in the trip route
    double depart = 0.0;   // actual insertion time
};

struct ControllerState {
    int phase = 0;                  // index into the program
    double time_since_switch = 0.0; // s, 5 at reset so the first step may switch
    double yellow_left = 0.0;       // remaining yellow seconds, 0 in green
};

struct CompletedTrip {
    int trip = 0;
    double depart = 0.0;  // actual insertion time
    double arrive = 0.0;
};

struct SimState {
    double clock = 0.0;
    std::vector<Vehicle> vehicles;                       // sorted by (lane, -pos)
    std::unordered_map<int, ControllerState> controllers;  // keyed by tsc id
    size_t next_trip = 0;        // first trip not yet due
    std::vector<int> blocked;    // due trips waiting for insertion room (trip indices)
    std::vector<CompletedTrip> completed;
    int64_t inserted_count = 0;
};

struct StepEvents {
    std::vector<std::pair<int, TscAction>> realized;  // per tsc, Switch iff the phase changed
    std::vector<int> inserted;   // trip ids
    std::vector<int> completed;  // trip ids
};

struct ActionFeasibility {
    bool switch_effective = false;
    bool prolong_effective = false;  // false during yellow: the controller is on rails
};

// Car-following constants (shared by every policy under comparison).
struct VehicleModel {
    static constexpr double kDt = 1.0;          // s
    static constexpr double kLength = 5.0;      // m
    static constexpr double kMinGap = 2.5;      // m
    static constexpr double kAccel = 2.6;       // m/s^2
    static constexpr double kDecel = 4.5;       // m/s^2
    static constexpr double kMaxSpeed = 50.0 / 3.6;  // m/s
    static constexpr double kInsertClear = 10.0;     // first meters that must be free
    static constexpr double kYieldHorizon = 3.0;     // s to conflict point
};

// largest speed that still allows a full stop within `gap` at kDecel
double safe_speed(double gap);

class Simulation {
public:
    // Deterministic in (network, trips, seed, action stream).
    Simulation(const NetworkIndex& index, const TripTable& trips, uint64_t seed);

    const SimState& state() const { return state_; }
    const NetworkIndex& index() const { return *index_; }
    const TripTable& trips() const { return *trips_; }

    ActionFeasibility feasibility(int tsc) const;
    static ActionFeasibility feasibility(const ControllerState& cs, const PhaseProgram& prog);

    // one action per controller; missing/extra keys are an error
    StepEvents step(const std::unordered_map<int, TscAction>& actions);

    // stopped (< 0.1 km/h) vehicles within 50 m of the stop line, per inbound lane
    std::vector<std::pair<int, int>> queue_lengths(int tsc) const;
    // negative sum of those queues
    double reward(int tsc) const;
    double total_queued() const;

    double instantaneous_delay() const;

    bool all_trips_done() const;

    // conservation counters: due == driving + completed + blocked
    int64_t due_count() const;

    uint64_t state_hash() const;  // replay-determinism fingerprint

private:
    struct LaneOcc {  // per-lane vehicle indices ordered front (highest pos) first
        std::vector<int> v;
    };

    int next_lane_of(const Vehicle& v) const;
    int next_connection_of(const Vehicle& v) const;  // -1 at route end
    bool connection_passable(int conn_id, const Vehicle& v) const;
    void rebuild_occupancy();
    bool insertion_clear(int lane_id) const;

    const NetworkIndex* index_;
    const TripTable* trips_;
    uint64_t seed_;
    SimState state_;
    std::unordered_map<int, LaneOcc> occupancy_;  // lane id -> ordered vehicle indices
};

// step-metrics CSV: t,total_delay,total_queued,n_vehicles
class StepMetricsLog {
public:
    void record(const Simulation& sim);
    std::string to_csv() const;

private:
    struct Row {
        double t, delay;
        double queued;
        size_t vehicles;
    };
    std::vector<Row> rows_;
};

// trip-completion CSV: trip_id,depart_s,arrive_s,duration_s
std::string completions_to_csv(const SimState& state);

}  // namespace tsc
