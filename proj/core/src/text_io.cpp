#include "tsc/text_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace tsc {

namespace {

struct Record {
    int line;
    std::map<std::string, std::string> kv;
};

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

int parse_int(const std::string& v, int line, const std::string& key) {
    int x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ParseError("expected integer for '" + key + "', got '" + v + "'", line);
    return x;
}

double parse_double(const std::string& v, int line, const std::string& key) {
    double x = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ParseError("expected number for '" + key + "', got '" + v + "'", line);
    return x;
}

const std::string& need(const Record& r, const std::string& key) {
    auto it = r.kv.find(key);
    if (it == r.kv.end()) throw ParseError("missing field '" + key + "'", r.line);
    return it->second;
}

// section name -> records, preserving order
std::map<std::string, std::vector<Record>> parse_sections(const std::string& text,
                                                          const std::vector<std::string>& known) {
    std::map<std::string, std::vector<Record>> sections;
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = strip_comment(raw);
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0].front() == '[') {
            if (toks.size() != 1 || toks[0].back() != ']')
                throw ParseError("malformed section header", line_no);
            current = toks[0].substr(1, toks[0].size() - 2);
            if (std::find(known.begin(), known.end(), current) == known.end())
                throw ParseError("unknown section '" + current + "'", line_no);
            sections[current];
            continue;
        }
        if (current.empty()) throw ParseError("record before any section header", line_no);
        Record rec;
        rec.line = line_no;
        for (const auto& tok : toks) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw ParseError("expected key=value, got '" + tok + "'", line_no);
            rec.kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        sections[current].push_back(std::move(rec));
    }
    return sections;
}

}  // namespace

std::string network_to_text(const RoadNetwork& net) {
    std::ostringstream out;
    out << "# tsclab network v1\n";
    out << "[intersection]\n";
    for (const auto& i : net.intersections) {
        out << "id=" << i.id << " x=" << format_double(i.pos.x) << " y=" << format_double(i.pos.y)
            << " tsc=" << (i.tsc < 0 ? std::string("none") : std::to_string(i.tsc)) << "\n";
    }
    out << "[edge]\n";
    for (const auto& e : net.edges) {
        out << "id=" << e.id << " from=" << e.from << " to=" << e.to
            << " length=" << format_double(e.length) << " lanes=" << e.lane_count << "\n";
    }
    out << "[lane]\n";
    for (const auto& l : net.lanes) {
        out << "id=" << l.id << " edge=" << l.edge << " index=" << l.index
            << " length=" << format_double(l.length) << " speed=" << format_double(l.speed_limit) << "\n";
    }
    out << "[connection]\n";
    for (const auto& c : net.connections) {
        out << "id=" << c.id << " entry=" << c.entry_lane << " exit=" << c.exit_lane
            << " tsc=" << (c.tsc < 0 ? std::string("none") : std::to_string(c.tsc)) << "\n";
    }
    out << "[phase]\n";
    for (const auto& p : net.programs) {
        for (size_t i = 0; i < p.phases.size(); ++i) {
            const Phase& ph = p.phases[i];
            out << "tsc=" << p.tsc << " index=" << i
                << " kind=" << (ph.kind == PhaseKind::Green ? "green" : "yellow")
                << " duration=" << format_double(ph.duration) << " open=";
            for (size_t k = 0; k < ph.open.size(); ++k) {
                if (k) out << ",";
                out << ph.open[k] << ":" << (ph.priority[k] ? "p" : "n");
            }
            if (ph.open.empty()) out << "-";
            out << "\n";
        }
    }
    return out.str();
}

RoadNetwork network_from_text(const std::string& text) {
    auto sections = parse_sections(text, {"intersection", "edge", "lane", "connection", "phase"});
    RoadNetwork net;
    for (const auto& r : sections["intersection"]) {
        Intersection i;
        i.id = parse_int(need(r, "id"), r.line, "id");
        i.pos.x = parse_double(need(r, "x"), r.line, "x");
        i.pos.y = parse_double(need(r, "y"), r.line, "y");
        const std::string& t = need(r, "tsc");
        i.tsc = t == "none" ? -1 : parse_int(t, r.line, "tsc");
        net.intersections.push_back(i);
    }
    for (const auto& r : sections["edge"]) {
        Edge e;
        e.id = parse_int(need(r, "id"), r.line, "id");
        e.from = parse_int(need(r, "from"), r.line, "from");
        e.to = parse_int(need(r, "to"), r.line, "to");
        e.length = parse_double(need(r, "length"), r.line, "length");
        e.lane_count = parse_int(need(r, "lanes"), r.line, "lanes");
        net.edges.push_back(e);
    }
    for (const auto& r : sections["lane"]) {
        Lane l;
        l.id = parse_int(need(r, "id"), r.line, "id");
        l.edge = parse_int(need(r, "edge"), r.line, "edge");
        l.index = parse_int(need(r, "index"), r.line, "index");
        l.length = parse_double(need(r, "length"), r.line, "length");
        l.speed_limit = parse_double(need(r, "speed"), r.line, "speed");
        net.lanes.push_back(l);
    }
    for (const auto& r : sections["connection"]) {
        Connection c;
        c.id = parse_int(need(r, "id"), r.line, "id");
        c.entry_lane = parse_int(need(r, "entry"), r.line, "entry");
        c.exit_lane = parse_int(need(r, "exit"), r.line, "exit");
        const std::string& t = need(r, "tsc");
        c.tsc = t == "none" ? -1 : parse_int(t, r.line, "tsc");
        net.connections.push_back(c);
    }

    std::map<int, std::map<int, std::pair<int, Phase>>> programs;  // tsc -> index -> (line, phase)
    for (const auto& r : sections["phase"]) {
        int tsc = parse_int(need(r, "tsc"), r.line, "tsc");
        int index = parse_int(need(r, "index"), r.line, "index");
        Phase ph;
        const std::string& kind = need(r, "kind");
        if (kind == "green")
            ph.kind = PhaseKind::Green;
        else if (kind == "yellow")
            ph.kind = PhaseKind::Yellow;
        else
            throw ParseError("phase kind must be green or yellow", r.line);
        ph.duration = parse_double(need(r, "duration"), r.line, "duration");
        const std::string& open = need(r, "open");
        if (open != "-") {
            std::istringstream items(open);
            std::string item;
            while (std::getline(items, item, ',')) {
                auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw ParseError("open entries look like <connection>:<p|n>", r.line);
                ph.open.push_back(parse_int(item.substr(0, colon), r.line, "open"));
                std::string flag = item.substr(colon + 1);
                if (flag != "p" && flag != "n") throw ParseError("priority flag must be p or n", r.line);
                ph.priority.push_back(flag == "p" ? 1 : 0);
            }
        }
        if (!programs[tsc].emplace(index, std::make_pair(r.line, std::move(ph))).second)
            throw ParseError("duplicate phase index " + std::to_string(index), r.line);
    }
    std::map<int, int> tsc_intersection;
    for (const auto& i : net.intersections)
        if (i.tsc >= 0) tsc_intersection[i.tsc] = i.id;
    for (auto& [tsc, phases] : programs) {
        PhaseProgram prog;
        prog.tsc = tsc;
        auto it = tsc_intersection.find(tsc);
        if (it == tsc_intersection.end())
            throw ParseError("phase references unknown tsc " + std::to_string(tsc), phases.begin()->second.first);
        prog.intersection = it->second;
        int expected = 0;
        for (auto& [index, entry] : phases) {
            if (index != expected++)
                throw ParseError("phase indices must be contiguous from 0", entry.first);
            prog.phases.push_back(std::move(entry.second));
        }
        net.programs.push_back(std::move(prog));
    }

    validate(net);
    return net;
}

std::string trips_to_text(const TripTable& trips) {
    std::ostringstream out;
    out << "# tsclab trips v1\n";
    for (const auto& t : trips.trips) {
        out << "trip " << t.id << " " << format_double(t.depart) << " route=";
        for (size_t i = 0; i < t.route.size(); ++i) {
            if (i) out << ",";
            out << t.route[i];
        }
        out << "\n";
    }
    return out.str();
}

TripTable trips_from_text(const std::string& text) {
    TripTable table;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto toks = split_ws(strip_comment(raw));
        if (toks.empty()) continue;
        if (toks[0] != "trip" || toks.size() != 4)
            throw ParseError("expected 'trip <id> <depart> route=...'", line_no);
        Trip t;
        t.id = parse_int(toks[1], line_no, "id");
        t.depart = parse_double(toks[2], line_no, "depart");
        if (toks[3].rfind("route=", 0) != 0) throw ParseError("expected route=...", line_no);
        std::istringstream items(toks[3].substr(6));
        std::string item;
        while (std::getline(items, item, ',')) t.route.push_back(parse_int(item, line_no, "route"));
        if (t.route.size() < 2) throw ParseError("route has at least 2 lanes", line_no);
        table.trips.push_back(std::move(t));
    }
    return table;
}

void save_network(const RoadNetwork& net, const std::string& path) { write_file(path, network_to_text(net)); }

RoadNetwork load_network(const std::string& path) { return network_from_text(read_file(path)); }

void save_trips(const TripTable& trips, const std::string& path) { write_file(path, trips_to_text(trips)); }

TripTable load_trips(const std::string& path, const NetworkIndex* index) {
    TripTable t = trips_from_text(read_file(path));
    if (index) validate(t, *index);
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace tsc
