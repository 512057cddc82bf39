#pragma once

#include <string>

#include "tsc/demand.hpp"
#include "tsc/network.hpp"

namespace tsc {

// Line-oriented text formats. Network files carry [intersection] [edge]
// [lane] [connection] [phase] sections with one key=value record per line;
// trip files carry one `trip <id> <depart> route=a,b,c` line per trip.
// '#' starts a comment. Loading validates all structural invariants.

std::string network_to_text(const RoadNetwork& net);
RoadNetwork network_from_text(const std::string& text);  // ParseError / ValidationError
void save_network(const RoadNetwork& net, const std::string& path);
RoadNetwork load_network(const std::string& path);

std::string trips_to_text(const TripTable& trips);
TripTable trips_from_text(const std::string& text);  // structural checks only
void save_trips(const TripTable& trips, const std::string& path);
// validates against the network when an index is supplied
TripTable load_trips(const std::string& path, const NetworkIndex* index = nullptr);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace tsc
