#pragma once

#include <string>
#include <vector>

#include "cpnav/sim.hpp"
#include "cpnav/world.hpp"

namespace cpnav::harness {

// Top-down view: map bounds, obstacles (true radius solid, inflated ring
// dashed), walls, start/goal markers and one polyline per trace.
void write_map_svg(const world::Map& m, const std::vector<std::vector<TraceRow>>& traces,
                   double inflation, const std::string& path);

}  // namespace cpnav::harness
