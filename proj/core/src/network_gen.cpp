#include "tsc/network_gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "tsc/rng.hpp"

namespace tsc {

namespace {

constexpr double kGridSpacing = 160.0;       // m between grid cells, geometry only
const double kSpeedChoices[3] = {30.0 / 3.6, 40.0 / 3.6, 50.0 / 3.6};

struct Cell {
    int x, y;
    bool operator<(const Cell& o) const { return x != o.x ? x < o.x : y < o.y; }
};

const Cell kDirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

void check_params(const GenParams& p) {
    if (p.min_intersections < 1 || p.max_intersections < p.min_intersections)
        throw ValidationError("generation bounds: need at least one intersection");
    if (p.min_edge_length < 100.0 || p.max_edge_length > 200.0 || p.min_edge_length > p.max_edge_length)
        throw ValidationError("generation bounds: edge length must stay within [100, 200] m");
    if (p.min_lanes < 1 || p.max_lanes > 4 || p.min_lanes > p.max_lanes)
        throw ValidationError("generation bounds: lanes per edge must stay within [1, 4]");
    if (p.green_duration < units::kMinGreenTime)
        throw ValidationError("generation bounds: green duration must be at least 5 s");
}

struct Movement {
    int out_edge;
    double angle;  // signed turn angle, negative = right
};

}  // namespace

RoadNetwork generate_network(uint64_t seed, const GenParams& params) {
    check_params(params);
    Rng rng(mix_seed(seed, 0xA11));

    int n_core = static_cast<int>(rng.uniform_int(params.min_intersections, params.max_intersections));

    // Grow a connected cluster of core cells on the grid.
    std::map<Cell, int> occupied;  // cell -> intersection id
    std::vector<Cell> core_cells;
    std::vector<std::pair<int, int>> roads;  // intersection id pairs
    occupied[{0, 0}] = 0;
    core_cells.push_back({0, 0});
    for (int i = 1; i < n_core; ++i) {
        std::vector<std::pair<Cell, Cell>> slots;  // (parent cell, free neighbor)
        for (const Cell& c : core_cells) {
            for (const Cell& d : kDirs) {
                Cell n{c.x + d.x, c.y + d.y};
                if (!occupied.count(n)) slots.push_back({c, n});
            }
        }
        auto [parent, cell] = slots[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(slots.size()) - 1))];
        occupied[cell] = i;
        core_cells.push_back(cell);
        roads.push_back({occupied[parent], i});
    }
    // extra roads between adjacent cores
    std::set<std::pair<int, int>> have(roads.begin(), roads.end());
    for (size_t i = 0; i < core_cells.size(); ++i) {
        for (const Cell& d : kDirs) {
            Cell n{core_cells[i].x + d.x, core_cells[i].y + d.y};
            auto it = occupied.find(n);
            if (it == occupied.end() || it->second <= static_cast<int>(i)) continue;
            std::pair<int, int> key{static_cast<int>(i), it->second};
            std::pair<int, int> rkey{it->second, static_cast<int>(i)};
            if (have.count(key) || have.count(rkey)) continue;
            if (rng.uniform() < 0.5) {
                roads.push_back(key);
                have.insert(key);
            }
        }
    }

    // Boundary stubs until every core has 3 approaches, sometimes 4.
    std::vector<Cell> all_cells = core_cells;
    std::vector<int> degree(static_cast<size_t>(n_core), 0);
    for (auto& [a, b] : roads) {
        degree[static_cast<size_t>(a)]++;
        degree[static_cast<size_t>(b)]++;
    }
    int next_id = n_core;
    for (int i = 0; i < n_core; ++i) {
        int want = 3 + (rng.uniform() < 0.4 ? 1 : 0);
        while (degree[static_cast<size_t>(i)] < want) {
            std::vector<Cell> free;
            for (const Cell& d : kDirs) {
                Cell n{core_cells[static_cast<size_t>(i)].x + d.x, core_cells[static_cast<size_t>(i)].y + d.y};
                if (!occupied.count(n)) free.push_back(n);
            }
            if (free.empty()) break;
            Cell cell = free[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(free.size()) - 1))];
            occupied[cell] = next_id;
            all_cells.push_back(cell);
            roads.push_back({i, next_id});
            degree[static_cast<size_t>(i)]++;
            ++next_id;
        }
    }

    RoadNetwork net;
    for (int i = 0; i < next_id; ++i) {
        Intersection in;
        in.id = i;
        in.pos = {all_cells[static_cast<size_t>(i)].x * kGridSpacing, all_cells[static_cast<size_t>(i)].y * kGridSpacing};
        in.tsc = -1;
        net.intersections.push_back(in);
    }

    // Two directed edges per road; length and speed shared, lane counts independent.
    int edge_id = 0, lane_id = 0;
    for (auto& [a, b] : roads) {
        double len = rng.uniform(params.min_edge_length, params.max_edge_length);
        double speed = kSpeedChoices[rng.uniform_int(0, 2)];
        for (int dir = 0; dir < 2; ++dir) {
            Edge e;
            e.id = edge_id++;
            e.from = dir == 0 ? a : b;
            e.to = dir == 0 ? b : a;
            e.length = len;
            e.lane_count = static_cast<int>(rng.uniform_int(params.min_lanes, params.max_lanes));
            net.edges.push_back(e);
            for (int k = 0; k < e.lane_count; ++k) {
                Lane l;
                l.id = lane_id++;
                l.edge = e.id;
                l.index = k;
                l.length = len;
                l.speed_limit = speed;
                net.lanes.push_back(l);
            }
        }
    }

    // Controllers on every core (all have >= 2 approaches by construction).
    int tsc_id = 0;
    for (int i = 0; i < n_core; ++i) net.intersections[static_cast<size_t>(i)].tsc = tsc_id++;

    // Connections at controlled intersections.
    std::unordered_map<int, std::vector<int>> in_edges, out_edges;  // intersection -> edge ids
    for (const auto& e : net.edges) {
        in_edges[e.to].push_back(e.id);
        out_edges[e.from].push_back(e.id);
    }
    std::map<std::pair<int, int>, int> edge_by_ends;
    for (const auto& e : net.edges) edge_by_ends[{e.from, e.to}] = e.id;
    auto edge_dir = [&](const Edge& e) {
        Vec2 a = net.intersections[static_cast<size_t>(e.from)].pos;
        Vec2 b = net.intersections[static_cast<size_t>(e.to)].pos;
        double n = std::hypot(b.x - a.x, b.y - a.y);
        return Vec2{(b.x - a.x) / n, (b.y - a.y) / n};
    };
    std::vector<std::vector<int>> lanes_of_edge(net.edges.size());
    for (const auto& l : net.lanes) lanes_of_edge[static_cast<size_t>(l.edge)].push_back(l.id);

    int conn_id = 0;
    for (int i = 0; i < n_core; ++i) {
        const Intersection& inter = net.intersections[static_cast<size_t>(i)];
        for (int ie : in_edges[i]) {
            const Edge& entry = net.edges[static_cast<size_t>(ie)];
            int reverse = -1;
            auto rit = edge_by_ends.find({entry.to, entry.from});
            if (rit != edge_by_ends.end()) reverse = rit->second;

            std::vector<Movement> moves;
            Vec2 u = edge_dir(entry);
            for (int oe : out_edges[i]) {
                if (oe == reverse) continue;  // no U-turns at controlled intersections
                Vec2 w = edge_dir(net.edges[static_cast<size_t>(oe)]);
                double ang = std::atan2(u.x * w.y - u.y * w.x, u.x * w.x + u.y * w.y);
                moves.push_back({oe, ang});
            }
            if (moves.empty()) continue;
            // rightmost lane serves the sharpest right turn
            std::sort(moves.begin(), moves.end(), [](const Movement& a, const Movement& b) { return a.angle < b.angle; });

            int L = entry.lane_count;
            int m = static_cast<int>(moves.size());
            for (int k = 0; k < m; ++k) {
                std::vector<int> entry_lanes;
                if (L >= m) {
                    int lo = k * L / m, hi = (k + 1) * L / m;
                    for (int idx = lo; idx < hi; ++idx) entry_lanes.push_back(idx);
                } else {
                    entry_lanes.push_back(std::min(k, L - 1));
                }
                const Edge& exit = net.edges[static_cast<size_t>(moves[static_cast<size_t>(k)].out_edge)];
                for (size_t j = 0; j < entry_lanes.size(); ++j) {
                    Connection c;
                    c.id = conn_id++;
                    c.entry_lane = lanes_of_edge[static_cast<size_t>(entry.id)][static_cast<size_t>(entry_lanes[j])];
                    c.exit_lane = lanes_of_edge[static_cast<size_t>(exit.id)][std::min(j, static_cast<size_t>(exit.lane_count) - 1)];
                    c.tsc = inter.tsc;
                    net.connections.push_back(c);
                }
            }
        }
    }

    // Phase synthesis: greedy coloring of the geometric conflict graph gives
    // the protected groups; other movements from the same approaches reopen
    // without priority. Each green is trailed by a 5 s yellow with the same
    // open set.
    auto conflicts = compute_connection_conflicts(net);
    std::unordered_map<int, int> conn_pos;
    for (size_t ci = 0; ci < net.connections.size(); ++ci) conn_pos[net.connections[ci].id] = static_cast<int>(ci);
    std::unordered_map<int, int> lane_pos;
    for (size_t li = 0; li < net.lanes.size(); ++li) lane_pos[net.lanes[li].id] = static_cast<int>(li);

    for (int t = 0; t < tsc_id; ++t) {
        std::vector<int> conns;
        for (const auto& c : net.connections)
            if (c.tsc == t) conns.push_back(c.id);

        std::vector<int> color(conns.size(), -1);
        int n_colors = 0;
        for (size_t a = 0; a < conns.size(); ++a) {
            std::set<int> used;
            const auto& conf = conflicts[static_cast<size_t>(conn_pos.at(conns[a]))];
            for (size_t b = 0; b < a; ++b) {
                if (std::binary_search(conf.begin(), conf.end(), conns[b])) used.insert(color[b]);
            }
            int col = 0;
            while (used.count(col)) ++col;
            color[a] = col;
            n_colors = std::max(n_colors, col + 1);
        }

        PhaseProgram prog;
        prog.tsc = t;
        for (const auto& in : net.intersections)
            if (in.tsc == t) prog.intersection = in.id;

        for (int col = 0; col < n_colors; ++col) {
            Phase green;
            green.kind = PhaseKind::Green;
            green.duration = params.green_duration;
            std::set<int> green_entry_edges;
            for (size_t a = 0; a < conns.size(); ++a) {
                if (color[a] == col) {
                    green.open.push_back(conns[a]);
                    green.priority.push_back(1);
                    const Connection& c = net.connections[static_cast<size_t>(conn_pos.at(conns[a]))];
                    green_entry_edges.insert(net.lanes[static_cast<size_t>(lane_pos.at(c.entry_lane))].edge);
                }
            }
            for (size_t a = 0; a < conns.size(); ++a) {
                if (color[a] == col) continue;
                const Connection& c = net.connections[static_cast<size_t>(conn_pos.at(conns[a]))];
                if (green_entry_edges.count(net.lanes[static_cast<size_t>(lane_pos.at(c.entry_lane))].edge)) {
                    green.open.push_back(conns[a]);
                    green.priority.push_back(0);
                }
            }
            Phase yellow = green;
            yellow.kind = PhaseKind::Yellow;
            yellow.duration = units::kYellowDuration;
            prog.phases.push_back(std::move(green));
            prog.phases.push_back(std::move(yellow));
        }
        net.programs.push_back(std::move(prog));
    }

    validate(net);
    return net;
}

}  // namespace tsc
