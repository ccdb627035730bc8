#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpnav/config.hpp"
#include "cpnav/metrics.hpp"
#include "cpnav/sim.hpp"
#include "cpnav/world.hpp"

namespace cpnav::harness {

// Built-in maps.

// Four-pole benchmark: one pole dead ahead on the start-goal axis, one
// pinching the detour corridor below, two squeezing the corridor above.
world::Map experimental_map();
// Flat wall across the flight direction for head-on collision trials.
world::Map wall_map();
// Single pole between start and goal.
world::Map pole_map();

// One static load trial: hold the deflection for a constant force, run the
// sensing chain for `window` seconds, report the mean force estimate.
double estimator_static_trial(const RunConfig& cfg, double force_n, std::uint64_t seed,
                              double window = 2.0);

struct DynamicEstimate {
  double true_peak = 0;
  double est_peak = 0;          // detector's recorded maximum
  double detect_latency_s = -1; // first-detection time minus pulse onset; -1 if missed
  bool detected = false;
  bool handling_started = false;
};
// Half-sine impact at the shield tip (quasi-static deflection profile).
DynamicEstimate estimator_dynamic_trial(const RunConfig& cfg, double peak_n,
                                        double pulse_s, std::uint64_t seed);

// Passive drop, arm down. peak_accel is the per-sample acceleration maximum.
MetricsRecord run_drop_once(const RunConfig& cfg, vehicle::Variant variant, double height,
                            int trial);

// Full-speed flight into the wall, recovery, hover at the recovery setpoint.
MetricsRecord run_wall_once(const RunConfig& cfg, vehicle::Variant variant, double speed,
                            std::uint64_t seed, int trial,
                            std::vector<TraceRow>* trace_out = nullptr);

// One planner mission on one map, offline or online.
MetricsRecord run_plan_once(const RunConfig& cfg, const world::Map& map,
                            const std::string& planner, vehicle::Variant variant,
                            std::uint64_t seed, int trial, bool online,
                            double recovery_hold,
                            std::vector<TraceRow>* trace_out = nullptr);

// Dispatch on cfg.scenario; writes metrics CSVs, traces, the run summary and
// optional plots under cfg.out.
std::vector<MetricsRecord> run_scenario(const RunConfig& cfg);

// Batch suites: "experimental" (Table-style planner comparison on the
// four-pole map), "cluttered" (offline, 4 planner settings x cfg.seeds maps),
// "online" (CP vs grid search under partial sensing), "drop", "wall".
std::vector<MetricsRecord> run_suite(const RunConfig& cfg, const std::string& suite);

// Per (scenario, planner, variant) mean +/- std table over the records.
std::string aggregate_table(const std::vector<MetricsRecord>& rows);

// Write metrics.csv (with wall-clock columns), metrics_deterministic.csv
// (reproducible projection) and summary.txt under dir.
void write_run_outputs(const RunConfig& cfg, const std::vector<MetricsRecord>& rows,
                       const std::string& dir);

}  // namespace cpnav::harness
