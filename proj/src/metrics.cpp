#include "cpnav/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cpnav/types.hpp"

namespace cpnav::harness {

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}
}  // namespace

std::string MetricsRecord::csv_header(bool include_walltime) {
  std::string h = "scenario,planner,variant,seed,trial,success";
  if (include_walltime) h += ",plan_time_ms,traj_gen_time_s";
  h += ",traj_time_s,path_length_m,clearance_m,peak_accel,f_hat_max,settle_time_s,"
       "rebound_speed,max_tilt_deg,planner_work,collisions";
  return h;
}

std::string MetricsRecord::csv_row(bool include_walltime) const {
  std::string r = scenario + "," + planner + "," + variant + "," + std::to_string(seed) +
                  "," + std::to_string(trial) + "," + (success ? "1" : "0");
  if (include_walltime)
    r += "," + fmt(plan_time_ms) + "," + fmt(traj_gen_time_s);
  r += "," + fmt(traj_time_s) + "," + fmt(path_length_m) + "," + fmt(clearance_m) + "," +
       fmt(peak_accel) + "," + fmt(f_hat_max) + "," + fmt(settle_time_s) + "," +
       fmt(rebound_speed) + "," + fmt(max_tilt_deg) + "," + std::to_string(planner_work) +
       "," + std::to_string(collisions);
  return r;
}

void write_metrics_csv(const std::vector<MetricsRecord>& rows, const std::string& path,
                       bool include_walltime) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write metrics file: " + path);
  out << MetricsRecord::csv_header(include_walltime) << "\n";
  for (const auto& r : rows) out << r.csv_row(include_walltime) << "\n";
}

Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  a.n = static_cast<int>(xs.size());
  if (a.n == 0) return a;
  double sum = 0;
  for (double x : xs) sum += x;
  a.mean = sum / a.n;
  if (a.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / (a.n - 1));
  }
  return a;
}

}  // namespace cpnav::harness
