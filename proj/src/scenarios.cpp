#include "cpnav/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "cpnav/executor.hpp"
#include "cpnav/planners.hpp"
#include "cpnav/sensing.hpp"
#include "cpnav/svg.hpp"
#include "cpnav/trajgen.hpp"

namespace cpnav::harness {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9E3779B97F4A7C15ull + b + 0x7F4A7C15ull;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  return x;
}

vehicle::Variant variant_of(const std::string& s) {
  if (s == "compliant") return vehicle::Variant::compliant;
  if (s == "rigid") return vehicle::Variant::rigid;
  throw ConfigError("unknown variant: " + s);
}

const char* variant_name(vehicle::Variant v) {
  return v == vehicle::Variant::compliant ? "compliant" : "rigid";
}

std::vector<vehicle::Variant> variants_of(const std::string& s) {
  if (s == "both") return {vehicle::Variant::compliant, vehicle::Variant::rigid};
  return {variant_of(s)};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

world::Map experimental_map() {
  world::Map m;
  m.xmin = -2.2;
  m.xmax = 2.4;
  m.ymin = -1.5;
  m.ymax = 1.5;
  m.altitude = 1.0;
  m.start = Vec2(-2.0, 0.0);
  m.goal = Vec2(2.0, -0.2);
  m.obstacles = {{0, Vec2(0.0, 0.0), 0.15},
                 {1, Vec2(0.0, -1.15), 0.15},
                 {2, Vec2(-1.0, 0.75), 0.15},
                 {3, Vec2(1.0, 0.75), 0.15}};
  return m;
}

world::Map wall_map() {
  world::Map m;
  m.xmin = -2.0;
  m.xmax = 3.0;
  m.ymin = -2.0;
  m.ymax = 2.0;
  m.altitude = 1.0;
  m.start = Vec2(-1.0, 0.0);
  m.goal = Vec2(-1.0, 0.0);  // the mission ends at the recovery point, not a goal
  m.walls = {{Vec2(2.45, -2.0), Vec2(2.45, 2.0)}};
  return m;
}

world::Map pole_map() {
  world::Map m;
  m.xmin = -2.0;
  m.xmax = 4.0;
  m.ymin = -2.0;
  m.ymax = 2.0;
  m.altitude = 1.0;
  m.start = Vec2(-1.0, 0.0);
  m.goal = Vec2(3.0, 0.0);
  m.obstacles = {{0, Vec2(1.0, 0.0), 0.15}};
  return m;
}

double estimator_static_trial(const RunConfig& cfg, double force_n, std::uint64_t seed,
                              double window) {
  const auto& arm = cfg.robot.arm;
  const double l_true =
      std::clamp(arm.l_max + arm.l_0 - force_n / arm.k_l, arm.l_min, arm.l_max);
  sensing::ForceEstimator est(cfg.sensor, arm, cfg.force_threshold, Rng(seed));
  double sum = 0;
  long n = 0;
  for (double t = 0; t < window; t += cfg.sim.dt) {
    est.update(t, l_true);
    sum += est.f_hat();
    ++n;
  }
  return sum / static_cast<double>(n);
}

DynamicEstimate estimator_dynamic_trial(const RunConfig& cfg, double peak_n,
                                        double pulse_s, std::uint64_t seed) {
  const auto& arm = cfg.robot.arm;
  const double t_on = 0.5, t_end = t_on + pulse_s + 1.0;
  sensing::ForceEstimator est(cfg.sensor, arm, cfg.force_threshold, Rng(seed));

  DynamicEstimate out;
  out.true_peak = peak_n;
  double t_cross = -1;  // first time the true force crosses the threshold
  double l_prev = arm.l_max;
  for (double t = 0; t < t_end; t += cfg.sim.dt) {
    double f = 0;
    if (t >= t_on && t <= t_on + pulse_s)
      f = peak_n * std::sin(std::numbers::pi * (t - t_on) / pulse_s);
    if (t_cross < 0 && f >= cfg.force_threshold) t_cross = t;
    double l_true =
        std::clamp(arm.l_max + arm.l_0 - f / arm.k_l, arm.l_min, arm.l_max);
    if (arm.extend_rate > 0)  // re-extension after the pulse is rate-limited
      l_true = std::min(l_true, l_prev + arm.extend_rate * cfg.sim.dt);
    l_prev = l_true;
    const auto ev = est.update(t, l_true);
    if (ev == sensing::ContactEvent::collision_detected && !out.detected) {
      out.detected = true;
      out.detect_latency_s = t_cross >= 0 ? t - t_cross : 0.0;
    }
    if (ev == sensing::ContactEvent::handling_start) out.handling_started = true;
  }
  out.est_peak = est.f_hat_max();
  return out;
}

MetricsRecord run_drop_once(const RunConfig& cfg, vehicle::Variant variant, double height,
                            int trial) {
  vehicle::RobotParams robot = cfg.robot;
  robot.variant = variant;
  auto samples =
      vehicle::run_drop_test(robot, height, cfg.sim.dt, cfg.sim.contact_substeps);

  MetricsRecord rec;
  rec.scenario = "drop_" + fmt("%.2f", height) + "m";
  rec.variant = variant_name(variant);
  rec.seed = cfg.seed;
  rec.trial = trial;
  rec.success = !samples.empty();
  double peak = 0, len = 0, f_peak = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    peak = std::max(peak, samples[i].a.norm());
    f_peak = std::max(f_peak, samples[i].f_true);
    if (i) len += (samples[i].r - samples[i - 1].r).norm();
  }
  rec.peak_accel = peak;
  rec.f_hat_max = f_peak;  // true contact force; the passive drop runs unsensed
  rec.path_length_m = len;
  rec.traj_time_s = samples.empty() ? 0 : samples.back().t;
  rec.clearance_m = std::numeric_limits<double>::infinity();
  return rec;
}

MetricsRecord run_wall_once(const RunConfig& cfg, vehicle::Variant variant, double speed,
                            std::uint64_t seed, int trial,
                            std::vector<TraceRow>* trace_out) {
  world::Map map = wall_map();
  vehicle::RobotParams robot = cfg.robot;
  robot.variant = variant;

  SimParams sp = cfg.sim;
  sp.noise_seed = seed;
  const auto init =
      vehicle::RobotState::hover(map.start, map.altitude, 0.0, robot.arm);
  Simulator sim(robot, cfg.sensor, cfg.gains, cfg.force_threshold, map, sp, init);

  ExecParams ep = cfg.exec;
  ep.max_sim_time = 15.0;
  ep.fail_on_contact = false;

  // End the reference at the tip-touch position so the impact arrives at full
  // speed but the parked setpoint does not keep driving the body into the wall
  // while the estimate decays toward the handling threshold.
  planners::Plan plan;
  plan.planner = "wall";
  plan.segments.push_back(planners::PlanSegment{
      planners::SegmentKind::collide, Vec2(2.45 - robot.arm.l_max, 0.0), speed, -2});

  MissionRunner runner(sim, ep, map.goal);
  runner.set_plan(plan);
  const double cap = 12.0;
  double hold_until = -1;
  while (sim.t() < cap) {
    auto st = runner.advance(std::min(sim.t() + 0.25, cap));
    if (st == MissionRunner::Status::failed) break;
    if (runner.recoveries() >= 1 && !runner.recovering()) {
      if (hold_until < 0) hold_until = sim.t() + 2.0;
      if (sim.t() >= hold_until) break;
    }
  }

  const auto& res = runner.result();
  MetricsRecord rec;
  rec.scenario = "wall_collision";
  rec.planner = fmt("%.1f", speed) + "mps";
  rec.variant = variant_name(variant);
  rec.seed = seed;
  rec.trial = trial;
  const double miss = (sim.state().r - res.last_recovery_target).norm();
  rec.success = runner.recoveries() >= 1 && res.settle_time <= 5.0 &&
                miss <= cfg.exec.settle_tol;
  rec.traj_time_s = sim.t();
  rec.path_length_m = trace_path_length(sim.trace());
  rec.clearance_m = std::numeric_limits<double>::infinity();
  rec.peak_accel = sim.peak_accel();
  rec.f_hat_max = res.f_hat_max;
  rec.settle_time_s = res.settle_time;
  rec.rebound_speed = res.rebound_speed;
  rec.max_tilt_deg = sim.max_tilt() * 180.0 / std::numbers::pi;
  rec.collisions = res.collisions;
  rec.traj_gen_time_s = res.traj_gen_time_s;
  if (trace_out) *trace_out = sim.trace();
  return rec;
}

MetricsRecord run_plan_once(const RunConfig& cfg, const world::Map& map,
                            const std::string& planner, vehicle::Variant variant,
                            std::uint64_t seed, int trial, bool online,
                            double recovery_hold, std::vector<TraceRow>* trace_out) {
  vehicle::RobotParams robot = cfg.robot;
  robot.variant = variant;

  SimParams sp = cfg.sim;
  sp.noise_seed = mix_seed(seed, static_cast<std::uint64_t>(trial) + 101);
  const Vec2 d0 = map.goal - map.start;
  const double yaw0 = std::atan2(d0.y(), d0.x());
  const auto init = vehicle::RobotState::hover(map.start, map.altitude, yaw0, robot.arm);
  Simulator sim(robot, cfg.sensor, cfg.gains, cfg.force_threshold, map, sp, init);

  ExecParams ep = cfg.exec;
  ep.inflation = cfg.cp.inflation;
  ep.recovery_hold = recovery_hold;
  ep.fail_on_contact = planner != "cp";

  int rrt_calls = 0;
  PlanFn fn = [&](const Vec2& from, const world::Map& on) -> planners::Plan {
    if (planner == "cp") return planners::cp_plan(from, on.goal, on, cfg.cp);
    if (planner == "astar") return planners::astar_plan(from, on.goal, on, cfg.astar);
    if (planner == "rrt")
      return planners::rrt_star_plan(
          from, on.goal, on, cfg.rrt,
          mix_seed(seed, static_cast<std::uint64_t>(rrt_calls++)));
    throw ConfigError("unknown planner: " + planner);
  };

  MissionResult res = online ? run_mission_online(sim, ep, cfg.online, map, fn)
                             : run_mission_offline(sim, ep, map, fn);

  MetricsRecord rec;
  rec.scenario = online ? "plan_online" : "plan_offline";
  rec.planner = planner;
  rec.variant = variant_name(variant);
  rec.seed = seed;
  rec.trial = trial;
  rec.success = res.success;
  rec.plan_time_ms = res.plan_time_ms;
  rec.traj_gen_time_s = res.traj_gen_time_s;
  rec.traj_time_s = res.traj_time;
  rec.path_length_m = trace_path_length(sim.trace());
  rec.clearance_m =
      trace_clearance(sim.trace(), map, ep.inflation, sim.contacted_obstacles());
  rec.peak_accel = sim.peak_accel();
  rec.f_hat_max = res.f_hat_max;
  rec.settle_time_s = res.settle_time;
  rec.rebound_speed = res.rebound_speed;
  rec.max_tilt_deg = sim.max_tilt() * 180.0 / std::numbers::pi;
  rec.planner_work = res.planner_work;
  rec.collisions = res.collisions;
  if (trace_out) *trace_out = sim.trace();
  return rec;
}

std::vector<MetricsRecord> run_scenario(const RunConfig& cfg) {
  std::vector<MetricsRecord> rows;
  const std::string dir = cfg.out;
  std::filesystem::create_directories(dir);

  if (cfg.scenario == "estimator_static") {
    std::ofstream extra(dir + "/estimator_static.csv");
    extra << "force_true,trial,estimate\n";
    for (size_t fi = 0; fi < cfg.forces.size(); ++fi) {
      const double F = cfg.forces[fi];
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const double est = estimator_static_trial(
            cfg, F, mix_seed(cfg.seed, fi * 1000 + static_cast<std::uint64_t>(trial)));
        extra << fmt("%.9g", F) << "," << trial << "," << fmt("%.9g", est) << "\n";
        MetricsRecord rec;
        rec.scenario = "estimator_static";
        rec.planner = "load_" + fmt("%.0f", F) + "N";
        rec.variant = "compliant";
        rec.seed = cfg.seed;
        rec.trial = trial;
        rec.success = true;
        rec.f_hat_max = est;
        rows.push_back(rec);
      }
    }
  } else if (cfg.scenario == "estimator_dynamic") {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto dyn = estimator_dynamic_trial(
          cfg, cfg.dynamic_peak, 0.1, mix_seed(cfg.seed, 7000 + trial));
      MetricsRecord rec;
      rec.scenario = "estimator_dynamic";
      rec.planner = "halfsine_" + fmt("%.0f", cfg.dynamic_peak) + "N";
      rec.variant = "compliant";
      rec.seed = cfg.seed;
      rec.trial = trial;
      rec.success = dyn.detected && dyn.handling_started;
      rec.f_hat_max = dyn.est_peak;
      rec.settle_time_s = dyn.detect_latency_s;
      rows.push_back(rec);
    }
  } else if (cfg.scenario == "drop") {
    for (auto variant : variants_of(cfg.variant))
      for (double h : cfg.heights)
        for (int trial = 0; trial < cfg.trials; ++trial)
          rows.push_back(run_drop_once(cfg, variant, h, trial));
  } else if (cfg.scenario == "wall_collision") {
    std::vector<std::vector<TraceRow>> traces;
    for (auto variant : variants_of(cfg.variant))
      for (int trial = 0; trial < cfg.trials; ++trial) {
        std::vector<TraceRow> tr;
        rows.push_back(run_wall_once(cfg, variant, cfg.speed,
                                     mix_seed(cfg.seed, 300 + trial), trial, &tr));
        if (trial == 0) {
          write_trace_csv(tr, dir + "/trace_wall_" + variant_name(variant) + ".csv");
          traces.push_back(std::move(tr));
        }
      }
    if (cfg.plot) write_map_svg(wall_map(), traces, cfg.cp.inflation, dir + "/wall.svg");
  } else if (cfg.scenario == "pole_collision") {
    world::Map map = cfg.map_file.empty() ? pole_map() : world::load_map(cfg.map_file);
    std::vector<std::vector<TraceRow>> traces;
    for (auto variant : variants_of(cfg.variant))
      for (int trial = 0; trial < cfg.trials; ++trial) {
        std::vector<TraceRow> tr;
        rows.push_back(run_plan_once(cfg, map, "cp", variant, cfg.seed, trial, false,
                                     cfg.exec.recovery_hold, &tr));
        if (trial == 0) {
          write_trace_csv(tr, dir + "/trace_pole_" + std::string(variant_name(variant)) +
                                  ".csv");
          traces.push_back(std::move(tr));
        }
      }
    if (cfg.plot) write_map_svg(map, traces, cfg.cp.inflation, dir + "/pole.svg");
  } else if (cfg.scenario == "plan_offline" || cfg.scenario == "plan_online") {
    const bool online = cfg.scenario == "plan_online";
    world::Map map =
        cfg.map_file.empty() ? experimental_map() : world::load_map(cfg.map_file);
    std::vector<std::string> planners =
        cfg.planner == "all" ? std::vector<std::string>{"cp", "astar", "rrt"}
                             : std::vector<std::string>{cfg.planner};
    std::vector<std::vector<TraceRow>> traces;
    for (const auto& pl : planners)
      for (auto variant : variants_of(cfg.variant))
        for (int trial = 0; trial < cfg.trials; ++trial) {
          std::vector<TraceRow> tr;
          rows.push_back(run_plan_once(cfg, map, pl, variant, cfg.seed, trial, online,
                                       cfg.exec.recovery_hold, &tr));
          if (trial == 0) {
            write_trace_csv(tr, dir + "/trace_" + pl + "_" + variant_name(variant) +
                                    ".csv");
            traces.push_back(std::move(tr));
          }
        }
    if (cfg.plot) write_map_svg(map, traces, cfg.cp.inflation, dir + "/plan.svg");
  } else {
    throw ConfigError("unknown scenario: " + cfg.scenario);
  }

  write_run_outputs(cfg, rows, dir);
  return rows;
}

std::vector<MetricsRecord> run_suite(const RunConfig& cfg, const std::string& suite) {
  std::vector<MetricsRecord> rows;
  const std::string dir = cfg.out;
  std::filesystem::create_directories(dir);

  if (suite == "experimental") {
    const world::Map map = experimental_map();
    std::vector<std::vector<TraceRow>> traces(3);
    rows.push_back(run_plan_once(cfg, map, "cp", vehicle::Variant::compliant, cfg.seed, 0,
                                 false, 0.0, &traces[0]));
    rows.push_back(run_plan_once(cfg, map, "astar", vehicle::Variant::compliant, cfg.seed,
                                 0, false, 0.0, &traces[1]));
    for (int s = 1; s <= cfg.seeds; ++s)
      rows.push_back(run_plan_once(cfg, map, "rrt", vehicle::Variant::compliant,
                                   static_cast<std::uint64_t>(s), 0, false, 0.0,
                                   s == 1 ? &traces[2] : nullptr));
    for (size_t i = 0; i < traces.size(); ++i) {
      static const char* names[] = {"cp", "astar", "rrt"};
      write_trace_csv(traces[i], dir + "/trace_experimental_" + names[i] + ".csv");
    }
    if (cfg.plot)
      write_map_svg(map, traces, cfg.cp.inflation, dir + "/experimental.svg");
  } else if (suite == "cluttered" || suite == "online") {
    const bool online = suite == "online";
    RunConfig fast = cfg;  // CP_compliant batch settings
    fast.cp.collide_speed = 3.0;
    fast.cp.nominal_f_max = 90.0;
    fast.exec.v_max = 3.0;
    RunConfig slow = cfg;  // CP_rigid batch settings
    slow.cp.collide_speed = 2.5;
    slow.cp.nominal_f_max = 80.0;
    slow.exec.v_max = 2.5;
    for (int s = 1; s <= cfg.seeds; ++s) {
      const auto seed = static_cast<std::uint64_t>(s);
      const world::Map map = world::generate_random_map(cfg.cluttered, seed);
      std::vector<std::vector<TraceRow>> traces;
      traces.emplace_back();
      rows.push_back(run_plan_once(fast, map, "cp", vehicle::Variant::compliant, seed, 0,
                                   online, 2.5, &traces.back()));
      if (!online) {
        traces.emplace_back();
        rows.push_back(run_plan_once(slow, map, "cp", vehicle::Variant::rigid, seed, 0,
                                     online, 3.3, &traces.back()));
      }
      traces.emplace_back();
      rows.push_back(run_plan_once(cfg, map, "astar", vehicle::Variant::compliant, seed,
                                   0, online, 0.0, &traces.back()));
      if (!online) {
        traces.emplace_back();
        rows.push_back(run_plan_once(cfg, map, "rrt", vehicle::Variant::compliant, seed,
                                     0, online, 0.0, &traces.back()));
      }
      if (cfg.plot)
        write_map_svg(map, traces, cfg.cp.inflation,
                      dir + "/" + suite + "_seed" + std::to_string(s) + ".svg");
    }
  } else if (suite == "drop") {
    for (auto variant : {vehicle::Variant::compliant, vehicle::Variant::rigid})
      for (double h : cfg.heights)
        for (int trial = 0; trial < cfg.trials; ++trial)
          rows.push_back(run_drop_once(cfg, variant, h, trial));
  } else if (suite == "wall") {
    for (auto variant : variants_of(cfg.variant))
      for (int trial = 0; trial < cfg.trials; ++trial)
        rows.push_back(run_wall_once(cfg, variant, cfg.speed,
                                     mix_seed(cfg.seed, 300 + trial), trial, nullptr));
  } else {
    throw ConfigError("unknown suite: " + suite);
  }

  write_run_outputs(cfg, rows, dir);
  return rows;
}

std::string aggregate_table(const std::vector<MetricsRecord>& rows) {
  struct Group {
    std::string key;
    std::vector<const MetricsRecord*> recs;
  };
  std::vector<Group> groups;
  for (const auto& r : rows) {
    const std::string key = r.scenario + " / " + (r.planner.empty() ? "-" : r.planner) +
                            " / " + r.variant;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.key == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->recs.push_back(&r);
  }

  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-38s %5s %8s  %-18s %-18s %-18s %-14s %-12s\n",
                "group", "n", "success", "traj_time_s", "path_length_m", "clearance_m",
                "peak_accel", "work");
  out += line;
  for (const auto& g : groups) {
    std::vector<double> tt, pl, cl, pa, wk;
    int ok = 0;
    for (const auto* r : g.recs) {
      if (r->success) {
        ++ok;
        tt.push_back(r->traj_time_s);
        pl.push_back(r->path_length_m);
        cl.push_back(r->clearance_m);
        pa.push_back(r->peak_accel);
      }
      wk.push_back(static_cast<double>(r->planner_work));
    }
    auto cell = [](const Aggregate& a) {
      if (a.n == 0) return std::string("-");
      return fmt("%.3f", a.mean) + " +/- " + fmt("%.3f", a.stddev);
    };
    std::snprintf(line, sizeof line, "%-38s %5zu %7d%%  %-18s %-18s %-18s %-14s %-12s\n",
                  g.key.c_str(), g.recs.size(),
                  static_cast<int>(std::lround(100.0 * ok / g.recs.size())),
                  cell(aggregate(tt)).c_str(), cell(aggregate(pl)).c_str(),
                  cell(aggregate(cl)).c_str(), cell(aggregate(pa)).c_str(),
                  fmt("%.1f", aggregate(wk).mean).c_str());
    out += line;
  }
  return out;
}

void write_run_outputs(const RunConfig& cfg, const std::vector<MetricsRecord>& rows,
                       const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_metrics_csv(rows, dir + "/metrics.csv", true);
  write_metrics_csv(rows, dir + "/metrics_deterministic.csv", false);
  std::ofstream sum(dir + "/summary.txt");
  sum << "== aggregates ==\n" << aggregate_table(rows) << "\n";
  sum << "== effective config ==\n" << config_echo(cfg) << "\n";
}

}  // namespace cpnav::harness
