#include "tsc/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace tsc {

namespace {

constexpr double kLaneWidth = 3.2;  // m, geometry only

std::string err(const std::string& invariant, const std::string& detail) {
    return invariant + ": " + detail;
}

template <typename T>
std::unordered_map<int, int> index_by_id(const std::vector<T>& items, const char* what) {
    std::unordered_map<int, int> m;
    m.reserve(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        if (!m.emplace(items[i].id, static_cast<int>(i)).second)
            throw ValidationError(err("unique ids", std::string(what) + " id " + std::to_string(items[i].id) + " duplicated"));
    }
    return m;
}

struct Geom {
    // per lane: direction unit vector and stop-line / start points
    std::vector<Vec2> lane_end;    // end of lane at edge.to
    std::vector<Vec2> lane_start;  // start of lane at edge.from
};

Geom lane_geometry(const RoadNetwork& net, const std::unordered_map<int, int>& ipos,
                   const std::unordered_map<int, int>& epos) {
    Geom g;
    g.lane_end.resize(net.lanes.size());
    g.lane_start.resize(net.lanes.size());
    for (size_t i = 0; i < net.lanes.size(); ++i) {
        const Lane& l = net.lanes[i];
        const Edge& e = net.edges[epos.at(l.edge)];
        Vec2 a = net.intersections[ipos.at(e.from)].pos;
        Vec2 b = net.intersections[ipos.at(e.to)].pos;
        double dx = b.x - a.x, dy = b.y - a.y;
        double norm = std::hypot(dx, dy);
        if (norm <= 0.0) norm = 1.0;
        double ux = dx / norm, uy = dy / norm;
        // right-hand offset, lane 0 nearest the curb
        double off = (static_cast<double>(l.index) + 0.5) * kLaneWidth;
        double nx = uy, ny = -ux;
        g.lane_start[i] = {a.x + nx * off, a.y + ny * off};
        g.lane_end[i] = {b.x + nx * off, b.y + ny * off};
    }
    return g;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// strict interior crossing (shared endpoints do not count)
bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    double d1 = cross(q1, q2, p1);
    double d2 = cross(q1, q2, p2);
    double d3 = cross(p1, p2, q1);
    double d4 = cross(p1, p2, q2);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

void validate(const RoadNetwork& net) {
    auto ipos = index_by_id(net.intersections, "intersection");
    auto epos = index_by_id(net.edges, "edge");
    auto lpos = index_by_id(net.lanes, "lane");
    auto cpos = index_by_id(net.connections, "connection");

    std::unordered_map<int, int> tsc_intersection;  // tsc id -> intersection id
    for (const auto& in : net.intersections) {
        if (in.tsc >= 0 && !tsc_intersection.emplace(in.tsc, in.id).second)
            throw ValidationError(err("unique controller", "tsc " + std::to_string(in.tsc) + " assigned to two intersections"));
    }

    for (const auto& e : net.edges) {
        if (!ipos.count(e.from) || !ipos.count(e.to))
            throw ValidationError(err("edge endpoints exist", "edge " + std::to_string(e.id)));
        if (e.from == e.to)
            throw ValidationError(err("edge endpoints distinct", "edge " + std::to_string(e.id)));
        if (e.length < 100.0 || e.length > 200.0)
            throw ValidationError(err("edge length in [100, 200] m", "edge " + std::to_string(e.id) + " has length " + format_double(e.length)));
        if (e.lane_count < 1 || e.lane_count > 4)
            throw ValidationError(err("lanes per edge in [1, 4]", "edge " + std::to_string(e.id)));
    }

    std::vector<std::set<int>> edge_lane_indices(net.edges.size());
    for (const auto& l : net.lanes) {
        if (!epos.count(l.edge))
            throw ValidationError(err("lane parent edge exists", "lane " + std::to_string(l.id)));
        const Edge& e = net.edges[epos.at(l.edge)];
        if (l.index < 0 || l.index >= e.lane_count)
            throw ValidationError(err("lane index within edge lane count", "lane " + std::to_string(l.id)));
        if (!edge_lane_indices[epos.at(l.edge)].insert(l.index).second)
            throw ValidationError(err("one lane per edge index", "lane " + std::to_string(l.id)));
        if (l.length != e.length)
            throw ValidationError(err("lane length equals edge length", "lane " + std::to_string(l.id)));
        if (l.speed_limit <= 0.0)
            throw ValidationError(err("positive speed limit", "lane " + std::to_string(l.id)));
    }
    for (size_t i = 0; i < net.edges.size(); ++i) {
        if (static_cast<int>(edge_lane_indices[i].size()) != net.edges[i].lane_count)
            throw ValidationError(err("edge has all its lanes", "edge " + std::to_string(net.edges[i].id)));
    }

    for (const auto& c : net.connections) {
        if (!lpos.count(c.entry_lane))
            throw ValidationError(err("connection entry lane exists", "connection " + std::to_string(c.id) + " references lane " + std::to_string(c.entry_lane)));
        if (!lpos.count(c.exit_lane))
            throw ValidationError(err("connection exit lane exists", "connection " + std::to_string(c.id) + " references lane " + std::to_string(c.exit_lane)));
        const Lane& in = net.lanes[lpos.at(c.entry_lane)];
        const Lane& out = net.lanes[lpos.at(c.exit_lane)];
        if (in.edge == out.edge)
            throw ValidationError(err("connection spans distinct edges", "connection " + std::to_string(c.id)));
        const Edge& ein = net.edges[epos.at(in.edge)];
        const Edge& eout = net.edges[epos.at(out.edge)];
        if (ein.to != eout.from)
            throw ValidationError(err("connection lanes meet at one intersection", "connection " + std::to_string(c.id)));
        if (c.tsc >= 0) {
            auto it = tsc_intersection.find(c.tsc);
            if (it == tsc_intersection.end())
                throw ValidationError(err("connection controller exists", "connection " + std::to_string(c.id)));
            if (it->second != ein.to)
                throw ValidationError(err("connection controlled by its own intersection", "connection " + std::to_string(c.id)));
        }
    }

    std::set<int> tscs_with_program;
    for (const auto& p : net.programs) {
        auto it = tsc_intersection.find(p.tsc);
        if (it == tsc_intersection.end())
            throw ValidationError(err("program controller exists", "tsc " + std::to_string(p.tsc)));
        if (it->second != p.intersection)
            throw ValidationError(err("program bound to controller intersection", "tsc " + std::to_string(p.tsc)));
        if (!tscs_with_program.insert(p.tsc).second)
            throw ValidationError(err("one program per controller", "tsc " + std::to_string(p.tsc)));
        if (p.phases.empty())
            throw ValidationError(err("program is cyclic and nonempty", "tsc " + std::to_string(p.tsc)));
        for (size_t i = 0; i < p.phases.size(); ++i) {
            const Phase& ph = p.phases[i];
            if (ph.open.size() != ph.priority.size())
                throw ValidationError(err("phase open/priority parallel", "tsc " + std::to_string(p.tsc)));
            std::set<int> seen;
            for (int cid : ph.open) {
                if (!cpos.count(cid))
                    throw ValidationError(err("phase references existing connection", "tsc " + std::to_string(p.tsc) + " connection " + std::to_string(cid)));
                if (net.connections[cpos.at(cid)].tsc != p.tsc)
                    throw ValidationError(err("phase opens only its own connections", "tsc " + std::to_string(p.tsc) + " connection " + std::to_string(cid)));
                if (!seen.insert(cid).second)
                    throw ValidationError(err("phase lists each connection once", "tsc " + std::to_string(p.tsc)));
            }
            if (ph.kind == PhaseKind::Green) {
                const Phase& next = p.phases[(i + 1) % p.phases.size()];
                if (next.kind != PhaseKind::Yellow)
                    throw ValidationError(err("green followed by exactly one yellow", "tsc " + std::to_string(p.tsc)));
                if (ph.duration < units::kMinGreenTime)
                    throw ValidationError(err("green duration at least 5 s", "tsc " + std::to_string(p.tsc)));
            } else {
                const Phase& next = p.phases[(i + 1) % p.phases.size()];
                if (next.kind != PhaseKind::Green)
                    throw ValidationError(err("green followed by exactly one yellow", "tsc " + std::to_string(p.tsc) + " has consecutive yellow phases"));
                if (ph.duration != units::kYellowDuration)
                    throw ValidationError(err("yellow lasts 5 s", "tsc " + std::to_string(p.tsc)));
            }
        }
        if (p.phases.front().kind != PhaseKind::Green)
            throw ValidationError(err("program starts with a green phase", "tsc " + std::to_string(p.tsc)));
    }
    for (const auto& [tsc, inter] : tsc_intersection) {
        if (!tscs_with_program.count(tsc))
            throw ValidationError(err("every controller has a program", "tsc " + std::to_string(tsc)));
    }
}

std::vector<std::vector<int>> compute_connection_conflicts(const RoadNetwork& net) {
    auto ipos = index_by_id(net.intersections, "intersection");
    auto epos = index_by_id(net.edges, "edge");
    auto lpos = index_by_id(net.lanes, "lane");
    Geom g = lane_geometry(net, ipos, epos);

    // group connections by intersection
    std::unordered_map<int, std::vector<int>> by_intersection;
    for (size_t i = 0; i < net.connections.size(); ++i) {
        const Connection& c = net.connections[i];
        const Lane& in = net.lanes[lpos.at(c.entry_lane)];
        by_intersection[net.edges[epos.at(in.edge)].to].push_back(static_cast<int>(i));
    }

    std::vector<std::vector<int>> out(net.connections.size());
    for (auto& [inter, conns] : by_intersection) {
        for (size_t a = 0; a < conns.size(); ++a) {
            for (size_t b = a + 1; b < conns.size(); ++b) {
                const Connection& ca = net.connections[conns[a]];
                const Connection& cb = net.connections[conns[b]];
                int ea = net.lanes[lpos.at(ca.entry_lane)].edge;
                int eb = net.lanes[lpos.at(cb.entry_lane)].edge;
                if (ea == eb) continue;
                bool conflict = ca.exit_lane == cb.exit_lane;
                if (!conflict) {
                    conflict = segments_cross(g.lane_end[lpos.at(ca.entry_lane)], g.lane_start[lpos.at(ca.exit_lane)],
                                              g.lane_end[lpos.at(cb.entry_lane)], g.lane_start[lpos.at(cb.exit_lane)]);
                }
                if (conflict) {
                    out[conns[a]].push_back(cb.id);
                    out[conns[b]].push_back(ca.id);
                }
            }
        }
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

int NetworkIndex::at(const std::unordered_map<int, int>& m, int id, const char* what) {
    auto it = m.find(id);
    if (it == m.end())
        throw ValidationError(std::string("unknown ") + what + " id " + std::to_string(id));
    return it->second;
}

NetworkIndex::NetworkIndex(const RoadNetwork& net) : net_(&net) {
    validate(net);
    intersection_pos_ = index_by_id(net.intersections, "intersection");
    edge_pos_ = index_by_id(net.edges, "edge");
    lane_pos_ = index_by_id(net.lanes, "lane");
    connection_pos_ = index_by_id(net.connections, "connection");

    for (size_t i = 0; i < net.programs.size(); ++i) {
        program_pos_[net.programs[i].tsc] = static_cast<int>(i);
        tsc_ids_.push_back(net.programs[i].tsc);
    }
    std::sort(tsc_ids_.begin(), tsc_ids_.end());

    lane_out_.resize(net.lanes.size());
    lane_in_.resize(net.lanes.size());
    for (const auto& c : net.connections) {
        lane_out_[lane_pos_.at(c.entry_lane)].push_back(c.id);
        lane_in_[lane_pos_.at(c.exit_lane)].push_back(c.id);
    }
    for (auto& v : lane_out_) std::sort(v.begin(), v.end());
    for (auto& v : lane_in_) std::sort(v.begin(), v.end());

    tsc_conns_.resize(net.programs.size());
    tsc_inbound_lanes_.resize(net.programs.size());
    tsc_involved_lanes_.resize(net.programs.size());
    for (const auto& c : net.connections) {
        if (c.tsc >= 0 && program_pos_.count(c.tsc))
            tsc_conns_[program_pos_.at(c.tsc)].push_back(c.id);
    }
    for (auto& v : tsc_conns_) std::sort(v.begin(), v.end());

    for (const auto& p : net.programs) {
        int pi = program_pos_.at(p.tsc);
        for (const auto& l : net.lanes) {
            if (net.edges[edge_pos_.at(l.edge)].to == p.intersection)
                tsc_inbound_lanes_[pi].push_back(l.id);
        }
        std::sort(tsc_inbound_lanes_[pi].begin(), tsc_inbound_lanes_[pi].end());
        std::set<int> involved;
        for (int cid : tsc_conns_[pi]) {
            involved.insert(net.connections[connection_pos_.at(cid)].entry_lane);
            involved.insert(net.connections[connection_pos_.at(cid)].exit_lane);
        }
        tsc_involved_lanes_[pi].assign(involved.begin(), involved.end());
    }

    conflicts_ = compute_connection_conflicts(net);

    phase_state_.resize(net.connections.size());
    for (size_t ci = 0; ci < net.connections.size(); ++ci) {
        const Connection& c = net.connections[ci];
        if (c.tsc < 0 || !program_pos_.count(c.tsc)) continue;
        const PhaseProgram& prog = net.programs[program_pos_.at(c.tsc)];
        phase_state_[ci].assign(prog.phases.size(), -1);
        for (size_t pi = 0; pi < prog.phases.size(); ++pi) {
            const Phase& ph = prog.phases[pi];
            for (size_t k = 0; k < ph.open.size(); ++k) {
                if (ph.open[k] == c.id) phase_state_[ci][pi] = ph.priority[k] ? 1 : 0;
            }
        }
    }
}

int NetworkIndex::open_state(int connection_id, int phase_index) const {
    int ci = at(connection_pos_, connection_id, "connection");
    const Connection& c = net_->connections[ci];
    if (c.tsc < 0) return 1;  // uncontrolled: always open with priority
    return phase_state_[ci][static_cast<size_t>(phase_index)];
}

int NetworkIndex::switches_to_open(int connection_id, int phase_index) const {
    int ci = at(connection_pos_, connection_id, "connection");
    const Connection& c = net_->connections[ci];
    if (c.tsc < 0) return 0;
    int n = static_cast<int>(phase_state_[ci].size());
    for (int k = 0; k < n; ++k) {
        if (phase_state_[ci][(phase_index + k) % n] >= 0) return k;
    }
    return n;  // never opens
}

bool NetworkIndex::next_opening_has_priority(int connection_id, int phase_index) const {
    int ci = at(connection_pos_, connection_id, "connection");
    const Connection& c = net_->connections[ci];
    if (c.tsc < 0) return true;
    int n = static_cast<int>(phase_state_[ci].size());
    for (int k = 0; k < n; ++k) {
        int s = phase_state_[ci][(phase_index + k) % n];
        if (s >= 0) return s == 1;
    }
    return false;
}

}  // namespace tsc
