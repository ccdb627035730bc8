#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpnav/control.hpp"
#include "cpnav/executor.hpp"
#include "cpnav/planners.hpp"
#include "cpnav/sensing.hpp"
#include "cpnav/sim.hpp"
#include "cpnav/vehicle.hpp"
#include "cpnav/world.hpp"

namespace cpnav::harness {

// Full run description. Every physical constant and tolerance used anywhere
// in the pipeline appears here as a named default so runs are reproducible
// from the echoed config alone.
struct RunConfig {
  std::string scenario = "wall_collision";
  std::string variant = "compliant";  // compliant | rigid | both
  std::string planner = "cp";         // cp | astar | rrt | all
  std::uint64_t seed = 1;
  int seeds = 10;   // batch width for suites
  int trials = 10;  // repeats of a single scenario
  std::string out = "out";
  bool plot = false;

  std::vector<double> heights{0.3, 0.5, 0.7};  // drop tip heights
  double height = 0.7;
  double speed = 3.0;                           // wall/pole approach speed
  std::vector<double> forces{30, 40, 50};       // static estimator loads
  double dynamic_peak = 90.0;                   // half-sine impact peak
  std::string map_file;                         // overrides the built-in map

  vehicle::RobotParams robot;
  control::Gains gains;
  sensing::SensorModel sensor;
  double force_threshold = 25.0;
  SimParams sim;
  planners::CpParams cp;
  planners::AstarParams astar;
  planners::RrtStarParams rrt;
  ExecParams exec;
  OnlineParams online;
  world::RandomMapSpec cluttered;
};

// Parse a JSON config file over the defaults. Unknown keys are rejected with
// the offending dotted path; missing fields keep their defaults.
RunConfig load_config(const std::string& path);

// Merge a JSON fragment into an existing config (flag overrides reuse this).
void apply_config_json(RunConfig& cfg, const std::string& json_text);

// Sanity limits; throws ConfigError naming the field.
void validate_config(const RunConfig& cfg);

// Human-readable echo of the effective configuration for run summaries.
std::string config_echo(const RunConfig& cfg);

}  // namespace cpnav::harness
