#include "tsc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tsc {

namespace {

constexpr double kUpstreamGuard = 20.0;  // m before a lane end that block insertion downstream
constexpr double kCrawlSpeed = 1.0;      // m/s floor when estimating time-to-line of queued traffic

uint64_t fnv_mix(uint64_t h, uint64_t x) {
    h ^= x;
    return h * 1099511628211ULL;
}

uint64_t bits(double v) {
    uint64_t u;
    static_assert(sizeof(u) == sizeof(v));
    std::memcpy(&u, &v, sizeof(u));
    return u;
}

}  // namespace

double safe_speed(double gap) {
    if (gap <= 0.0) return 0.0;
    const double b = VehicleModel::kDecel, dt = VehicleModel::kDt;
    // v*dt + v^2/(2b) <= gap
    double v = -b * dt + std::sqrt(b * b * dt * dt + 2.0 * b * gap);
    return std::max(0.0, v);
}

Simulation::Simulation(const NetworkIndex& index, const TripTable& trips, uint64_t seed)
    : index_(&index), trips_(&trips), seed_(seed) {
    validate(trips, index);
    for (int tsc : index.tsc_ids()) {
        ControllerState cs;
        cs.phase = 0;
        cs.time_since_switch = units::kMinGreenTime;  // switchable right away
        cs.yellow_left = 0.0;
        state_.controllers[tsc] = cs;
    }
    rebuild_occupancy();
}

ActionFeasibility Simulation::feasibility(const ControllerState& cs, const PhaseProgram& prog) {
    ActionFeasibility f;
    bool yellow = prog.phases[static_cast<size_t>(cs.phase)].kind == PhaseKind::Yellow;
    f.prolong_effective = !yellow;
    f.switch_effective = !yellow && cs.time_since_switch >= units::kMinGreenTime;
    return f;
}

ActionFeasibility Simulation::feasibility(int tsc) const {
    auto it = state_.controllers.find(tsc);
    if (it == state_.controllers.end())
        throw ValidationError("unknown tsc id " + std::to_string(tsc));
    return feasibility(it->second, index_->program(tsc));
}

int Simulation::next_lane_of(const Vehicle& v) const {
    const auto& route = trips_->trips[static_cast<size_t>(v.trip)].route;
    if (static_cast<size_t>(v.route_index) + 1 >= route.size()) return -1;
    return route[static_cast<size_t>(v.route_index) + 1];
}

int Simulation::next_connection_of(const Vehicle& v) const {
    int next = next_lane_of(v);
    if (next < 0) return -1;
    for (int cid : index_->out_connections(v.lane)) {
        if (index_->connection(cid).exit_lane == next) return cid;
    }
    return -1;  // unreachable on validated trips
}

bool Simulation::connection_passable(int conn_id, const Vehicle& v) const {
    const Connection& conn = index_->connection(conn_id);
    int open;
    if (conn.tsc < 0) {
        open = 1;
    } else {
        open = index_->open_state(conn_id, state_.controllers.at(conn.tsc).phase);
    }
    if (open < 0) return false;
    if (open == 1) return true;

    // Open without priority: yield when a conflicting movement with right of
    // way (or a lower-id non-priority peer) has a vehicle within 3 s of the
    // stop line.
    for (int wid : index_->conflicts(conn_id)) {
        const Connection& w = index_->connection(wid);
        int wopen = w.tsc < 0 ? 1 : index_->open_state(wid, state_.controllers.at(w.tsc).phase);
        if (wopen < 0) continue;
        if (wopen == 0 && w.id >= conn.id) continue;
        auto occ = occupancy_.find(w.entry_lane);
        if (occ == occupancy_.end()) continue;
        double len = index_->lane(w.entry_lane).length;
        for (int vi : occ->second.v) {
            const Vehicle& u = state_.vehicles[static_cast<size_t>(vi)];
            if (next_connection_of(u) != wid) continue;
            double d_line = len - (u.pos + VehicleModel::kLength);
            if (d_line / std::max(u.speed, kCrawlSpeed) <= VehicleModel::kYieldHorizon) return true ? false : false;
        }
    }
    for (int wid : index_->conflicts(conn_id)) {
        const Connection& w = index_->connection(wid);
        int wopen = w.tsc < 0 ? 1 : index_->open_state(wid, state_.controllers.at(w.tsc).phase);
        if (wopen < 0) continue;
        if (wopen == 0 && w.id >= conn.id) continue;
        auto occ = occupancy_.find(w.entry_lane);
        if (occ == occupancy_.end()) continue;
        double len = index_->lane(w.entry_lane).length;
        for (int vi : occ->second.v) {
            const Vehicle& u = state_.vehicles[static_cast<size_t>(vi)];
            if (next_connection_of(u) != wid) continue;
            double d_line = len - (u.pos + VehicleModel::kLength);
            if (d_line / std::max(u.speed, kCrawlSpeed) <= VehicleModel::kYieldHorizon) return false;
        }
    }
    return true;
}

void Simulation::rebuild_occupancy() {
    occupancy_.clear();
    std::vector<int> order(state_.vehicles.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Vehicle &va = state_.vehicles[static_cast<size_t>(a)], &vb = state_.vehicles[static_cast<size_t>(b)];
        if (va.lane != vb.lane) return va.lane < vb.lane;
        return va.pos > vb.pos;
    });
    for (int vi : order) occupancy_[state_.vehicles[static_cast<size_t>(vi)].lane].v.push_back(vi);
}

bool Simulation::insertion_clear(int lane_id) const {
    auto occ = occupancy_.find(lane_id);
    if (occ != occupancy_.end()) {
        for (int vi : occ->second.v) {
            if (state_.vehicles[static_cast<size_t>(vi)].pos < VehicleModel::kInsertClear) return false;
        }
    }
    // a vehicle about to cross into this lane can land inside the clear zone
    for (int cid : index_->in_connections(lane_id)) {
        const Connection& c = index_->connection(cid);
        auto up = occupancy_.find(c.entry_lane);
        if (up == occupancy_.end()) continue;
        double len = index_->lane(c.entry_lane).length;
        for (int vi : up->second.v) {
            const Vehicle& u = state_.vehicles[static_cast<size_t>(vi)];
            if (u.pos + VehicleModel::kLength < len - kUpstreamGuard) break;  // front-first order
            if (next_connection_of(u) == cid) return false;
        }
    }
    return true;
}

StepEvents Simulation::step(const std::unordered_map<int, TscAction>& actions) {
    const auto& tscs = index_->tsc_ids();
    if (actions.size() != tscs.size())
        throw std::invalid_argument("action vector length mismatch: expected " + std::to_string(tscs.size()) +
                                    " actions, got " + std::to_string(actions.size()));
    StepEvents events;

    // 1. controllers
    for (int tsc : tscs) {
        auto ait = actions.find(tsc);
        if (ait == actions.end())
            throw std::invalid_argument("action vector length mismatch: missing tsc " + std::to_string(tsc));
        ControllerState& cs = state_.controllers.at(tsc);
        const PhaseProgram& prog = index_->program(tsc);
        int old_phase = cs.phase;
        if (prog.phases[static_cast<size_t>(cs.phase)].kind == PhaseKind::Yellow) {
            cs.yellow_left -= 1.0;
            if (cs.yellow_left <= 0.0) {
                cs.phase = (cs.phase + 1) % static_cast<int>(prog.phases.size());
                cs.time_since_switch = 0.0;
                cs.yellow_left = 0.0;
            }
        } else if (ait->second == TscAction::Switch && cs.time_since_switch >= units::kMinGreenTime) {
            cs.phase = (cs.phase + 1) % static_cast<int>(prog.phases.size());
            cs.time_since_switch = 0.0;
            cs.yellow_left = units::kYellowDuration;
        }
        events.realized.push_back({tsc, cs.phase != old_phase ? TscAction::Switch : TscAction::Prolong});
    }

    // 2. insertions, in trip order
    while (state_.next_trip < trips_->trips.size() &&
           trips_->trips[state_.next_trip].depart <= state_.clock) {
        state_.blocked.push_back(static_cast<int>(state_.next_trip));
        ++state_.next_trip;
    }
    std::vector<int> still_blocked;
    for (int ti : state_.blocked) {
        const Trip& trip = trips_->trips[static_cast<size_t>(ti)];
        int origin = trip.route.front();
        if (insertion_clear(origin)) {
            Vehicle v;
            v.trip = ti;
            v.lane = origin;
            v.pos = 0.0;
            v.speed = 0.0;
            v.max_speed = VehicleModel::kMaxSpeed;
            v.route_index = 0;
            v.depart = state_.clock;
            state_.vehicles.push_back(v);
            auto& occ = occupancy_[origin].v;
            occ.push_back(static_cast<int>(state_.vehicles.size()) - 1);  // rearmost by construction
            ++state_.inserted_count;
            events.inserted.push_back(trip.id);
        } else {
            still_blocked.push_back(ti);
        }
    }
    state_.blocked = std::move(still_blocked);

    // 3. new speeds from a synchronous snapshot
    std::vector<double> new_speed(state_.vehicles.size(), 0.0);
    std::vector<int> sorted_lanes;
    sorted_lanes.reserve(occupancy_.size());
    for (const auto& [lane_id, occ] : occupancy_)
        if (!occ.v.empty()) sorted_lanes.push_back(lane_id);
    std::sort(sorted_lanes.begin(), sorted_lanes.end());

    for (int lane_id : sorted_lanes) {
        const Lane& lane = index_->lane(lane_id);
        const auto& occ = occupancy_.at(lane_id).v;
        for (size_t k = 0; k < occ.size(); ++k) {
            const Vehicle& v = state_.vehicles[static_cast<size_t>(occ[k])];
            double front = v.pos + VehicleModel::kLength;
            double gap = std::numeric_limits<double>::infinity();
            if (k > 0) {
                const Vehicle& leader = state_.vehicles[static_cast<size_t>(occ[k - 1])];
                gap = std::min(gap, leader.pos - front - VehicleModel::kMinGap);
            } else {
                int next_lane = next_lane_of(v);
                if (next_lane >= 0) {
                    double d_line = lane.length - front;
                    int conn = next_connection_of(v);
                    if (!connection_passable(conn, v)) {
                        gap = std::min(gap, d_line);
                    } else {
                        auto nocc = occupancy_.find(next_lane);
                        if (nocc != occupancy_.end() && !nocc->second.v.empty()) {
                            const Vehicle& back = state_.vehicles[static_cast<size_t>(nocc->second.v.back())];
                            gap = std::min(gap, d_line + back.pos - VehicleModel::kMinGap);
                        }
                    }
                }
                // route end: the lane exit is unobstructed
            }
            double vnew = v.speed + VehicleModel::kAccel * VehicleModel::kDt;
            vnew = std::min({vnew, v.max_speed, lane.speed_limit});
            if (std::isfinite(gap)) vnew = std::min(vnew, safe_speed(std::max(0.0, gap)));
            new_speed[static_cast<size_t>(occ[k])] = vnew;
        }
    }

    // 4. apply movement sequentially (lane id ascending, leaders first)
    std::vector<bool> moved(state_.vehicles.size(), false);
    std::vector<bool> gone(state_.vehicles.size(), false);
    for (size_t li = 0; li < sorted_lanes.size(); ++li) {
        auto& occ = occupancy_.at(sorted_lanes[li]).v;
        for (size_t k = 0; k < occ.size(); ++k) {  // occ may grow as vehicles land
            int vi = occ[k];
            if (moved[static_cast<size_t>(vi)]) continue;
            moved[static_cast<size_t>(vi)] = true;
            Vehicle& v = state_.vehicles[static_cast<size_t>(vi)];
            double vel = new_speed[static_cast<size_t>(vi)];
            double npos = v.pos + vel * VehicleModel::kDt;
            const Lane& lane = index_->lane(v.lane);
            int next_lane = next_lane_of(v);

            if (next_lane < 0) {
                // final route lane: the trip completes once the front reaches the end
                if (npos + VehicleModel::kLength >= lane.length) {
                    gone[static_cast<size_t>(vi)] = true;
                    state_.completed.push_back({v.trip, v.depart, state_.clock + VehicleModel::kDt});
                    events.completed.push_back(trips_->trips[static_cast<size_t>(v.trip)].id);
                    continue;
                }
                v.pos = npos;
                v.speed = vel;
                continue;
            }

            if (npos >= lane.length) {
                double landing = npos - lane.length;
                auto& nocc = occupancy_[next_lane].v;
                // overlap guard against vehicles already on (or landed on) the next lane
                bool clear = true;
                size_t insert_at = nocc.size();
                for (size_t j = nocc.size(); j-- > 0;) {
                    const Vehicle& o = state_.vehicles[static_cast<size_t>(nocc[j])];
                    if (gone[static_cast<size_t>(nocc[j])]) continue;
                    if (landing + VehicleModel::kLength <= o.pos) {
                        insert_at = j + 1;
                        break;
                    }
                    if (landing < o.pos + VehicleModel::kLength) {
                        clear = false;
                        break;
                    }
                    insert_at = j;  // landing is ahead of o
                }
                if (!clear) {
                    v.pos = std::min(v.pos, lane.length - 0.001);  // hold at the stop line
                    v.speed = 0.0;
                    continue;
                }
                v.lane = next_lane;
                v.pos = landing;
                v.speed = std::min(vel, index_->lane(next_lane).speed_limit);
                v.route_index += 1;
                occ.erase(occ.begin() + static_cast<long>(k));
                --k;
                nocc.insert(nocc.begin() + static_cast<long>(insert_at), vi);
                if (std::find(sorted_lanes.begin() + static_cast<long>(li) + 1, sorted_lanes.end(), next_lane) ==
                        sorted_lanes.end() &&
                    !std::binary_search(sorted_lanes.begin(), sorted_lanes.begin() + static_cast<long>(li) + 1,
                                        next_lane)) {
                    // lane had no traffic before this landing; nothing else to process there
                }
            } else {
                v.pos = npos;
                v.speed = vel;
            }
        }
    }

    // 5. drop completed vehicles, restore canonical ordering
    std::vector<Vehicle> alive;
    alive.reserve(state_.vehicles.size());
    for (size_t i = 0; i < state_.vehicles.size(); ++i) {
        if (!gone[i]) alive.push_back(state_.vehicles[i]);
    }
    state_.vehicles = std::move(alive);
    rebuild_occupancy();

    // 6. ageing
    for (auto& [tsc, cs] : state_.controllers) cs.time_since_switch += 1.0;
    state_.clock += VehicleModel::kDt;
    return events;
}

std::vector<std::pair<int, int>> Simulation::queue_lengths(int tsc) const {
    std::vector<std::pair<int, int>> out;
    for (int lane_id : index_->inbound_lanes(tsc)) {
        const Lane& lane = index_->lane(lane_id);
        int count = 0;
        auto occ = occupancy_.find(lane_id);
        if (occ != occupancy_.end()) {
            for (int vi : occ->second.v) {
                const Vehicle& v = state_.vehicles[static_cast<size_t>(vi)];
                double dist = lane.length - (v.pos + VehicleModel::kLength);
                if (v.speed < units::kStoppedSpeed && dist <= units::kQueueSensorRange) ++count;
            }
        }
        out.push_back({lane_id, count});
    }
    return out;
}

double Simulation::reward(int tsc) const {
    double r = 0.0;
    for (auto& [lane, q] : queue_lengths(tsc)) r -= q;
    return r;
}

double Simulation::total_queued() const {
    double total = 0.0;
    for (int tsc : index_->tsc_ids()) total -= reward(tsc);
    return total;
}

double Simulation::instantaneous_delay() const {
    double d = 0.0;
    for (const Vehicle& v : state_.vehicles) {
        double cap = std::min(v.max_speed, index_->lane(v.lane).speed_limit);
        d += (cap - v.speed) / cap;
    }
    return d;
}

bool Simulation::all_trips_done() const {
    return state_.next_trip == trips_->trips.size() && state_.vehicles.empty() && state_.blocked.empty();
}

int64_t Simulation::due_count() const { return static_cast<int64_t>(state_.next_trip); }

uint64_t Simulation::state_hash() const {
    uint64_t h = 1469598103934665603ULL;
    h = fnv_mix(h, bits(state_.clock));
    for (const Vehicle& v : state_.vehicles) {
        h = fnv_mix(h, static_cast<uint64_t>(v.trip));
        h = fnv_mix(h, static_cast<uint64_t>(v.lane));
        h = fnv_mix(h, bits(v.pos));
        h = fnv_mix(h, bits(v.speed));
        h = fnv_mix(h, static_cast<uint64_t>(v.route_index));
    }
    for (int tsc : index_->tsc_ids()) {
        const ControllerState& cs = state_.controllers.at(tsc);
        h = fnv_mix(h, static_cast<uint64_t>(cs.phase));
        h = fnv_mix(h, bits(cs.time_since_switch));
        h = fnv_mix(h, bits(cs.yellow_left));
    }
    h = fnv_mix(h, static_cast<uint64_t>(state_.next_trip));
    h = fnv_mix(h, static_cast<uint64_t>(state_.blocked.size()));
    h = fnv_mix(h, static_cast<uint64_t>(state_.completed.size()));
    return h;
}

void StepMetricsLog::record(const Simulation& sim) {
    rows_.push_back({sim.state().clock, sim.instantaneous_delay(), sim.total_queued(), sim.state().vehicles.size()});
}

std::string StepMetricsLog::to_csv() const {
    std::ostringstream out;
    out << "t,total_delay,total_queued,n_vehicles\n";
    for (const Row& r : rows_) {
        out << format_double(r.t) << "," << format_double(r.delay) << "," << format_double(r.queued) << ","
            << r.vehicles << "\n";
    }
    return out.str();
}

std::string completions_to_csv(const SimState& state) {
    std::ostringstream out;
    out << "trip_id,depart_s,arrive_s,duration_s\n";
    for (const CompletedTrip& c : state.completed) {
        out << c.trip << "," << format_double(c.depart) << "," << format_double(c.arrive) << ","
            << format_double(c.arrive - c.depart) << "\n";
    }
    return out.str();
}

}  // namespace tsc
