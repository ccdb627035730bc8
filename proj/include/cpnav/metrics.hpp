#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cpnav::harness {

struct MetricsRecord {
  std::string scenario;
  std::string planner;   // empty for non-planning scenarios
  std::string variant;   // compliant / rigid
  std::uint64_t seed = 0;
  int trial = 0;
  bool success = false;
  double plan_time_ms = 0;      // wall clock (excluded from determinism checks)
  double traj_gen_time_s = 0;   // wall clock (excluded from determinism checks)
  double traj_time_s = 0;
  double path_length_m = 0;
  double clearance_m = 0;
  double peak_accel = 0;
  double f_hat_max = 0;
  double settle_time_s = 0;
  double rebound_speed = 0;
  double max_tilt_deg = 0;
  std::uint64_t planner_work = 0;
  int collisions = 0;

  // include_walltime=false is the deterministic projection: identical
  // (scenario, seed, config) runs reproduce it byte for byte.
  static std::string csv_header(bool include_walltime = true);
  std::string csv_row(bool include_walltime = true) const;
};

void write_metrics_csv(const std::vector<MetricsRecord>& rows, const std::string& path,
                       bool include_walltime = true);

struct Aggregate {
  double mean = 0;
  double stddev = 0;  // sample standard deviation
  int n = 0;
};

Aggregate aggregate(const std::vector<double>& xs);

}  // namespace cpnav::harness
