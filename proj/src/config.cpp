#include "cpnav/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cpnav::harness {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::string& scope,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw ConfigError("unknown config key: " + (scope.empty() ? key : scope + "." + key));
  }
}

void get(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}
void get(const json& j, const char* key, int& out) {
  if (j.contains(key)) out = j.at(key).get<int>();
}
void get(const json& j, const char* key, std::uint64_t& out) {
  if (j.contains(key)) out = j.at(key).get<std::uint64_t>();
}
void get(const json& j, const char* key, bool& out) {
  if (j.contains(key)) out = j.at(key).get<bool>();
}
void get(const json& j, const char* key, std::string& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}
void get(const json& j, const char* key, std::vector<double>& out) {
  if (j.contains(key)) out = j.at(key).get<std::vector<double>>();
}
void get(const json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(std::string(key) + " must have 3 entries");
  out = Vec3(v[0], v[1], v[2]);
}
void get(const json& j, const char* key, Vec2& out) {
  if (!j.contains(key)) return;
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw ConfigError(std::string(key) + " must have 2 entries");
  out = Vec2(v[0], v[1]);
}

void apply_fields(RunConfig& c, const json& j) {
  expect_keys(j, "", {"scenario", "variant", "planner", "seed", "seeds", "trials", "out",
                      "plot", "heights", "height", "speed", "forces", "dynamic_peak",
                      "map_file", "robot", "gains", "sensor", "force_threshold", "sim",
                      "cp", "astar", "rrt", "exec", "online", "cluttered"});
  get(j, "scenario", c.scenario);
  get(j, "variant", c.variant);
  get(j, "planner", c.planner);
  get(j, "seed", c.seed);
  get(j, "seeds", c.seeds);
  get(j, "trials", c.trials);
  get(j, "out", c.out);
  get(j, "plot", c.plot);
  get(j, "heights", c.heights);
  get(j, "height", c.height);
  get(j, "speed", c.speed);
  get(j, "forces", c.forces);
  get(j, "dynamic_peak", c.dynamic_peak);
  get(j, "map_file", c.map_file);
  get(j, "force_threshold", c.force_threshold);

  if (j.contains("robot")) {
    const json& r = j.at("robot");
    expect_keys(r, "robot", {"mass", "inertia", "gravity", "max_thrust_factor", "k_l",
                             "l_max", "l_min", "l_0", "c_arm", "extend_rate",
                             "rigid_stiffness"});
    get(r, "mass", c.robot.mass);
    get(r, "inertia", c.robot.inertia_diag);
    get(r, "gravity", c.robot.gravity);
    get(r, "max_thrust_factor", c.robot.max_thrust_factor);
    get(r, "k_l", c.robot.arm.k_l);
    get(r, "l_max", c.robot.arm.l_max);
    get(r, "l_min", c.robot.arm.l_min);
    get(r, "l_0", c.robot.arm.l_0);
    get(r, "c_arm", c.robot.arm.c_arm);
    get(r, "extend_rate", c.robot.arm.extend_rate);
    get(r, "rigid_stiffness", c.robot.arm.rigid_stiffness);
  }
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    expect_keys(g, "gains", {"kp", "kd", "k_att", "k_rate", "torque_limit"});
    get(g, "kp", c.gains.kp);
    get(g, "kd", c.gains.kd);
    get(g, "k_att", c.gains.k_att);
    get(g, "k_rate", c.gains.k_rate);
    get(g, "torque_limit", c.gains.torque_limit);
  }
  if (j.contains("sensor")) {
    const json& s = j.at("sensor");
    expect_keys(s, "sensor", {"rate_hz", "precision", "accuracy", "filter_weight"});
    get(s, "rate_hz", c.sensor.rate_hz);
    get(s, "precision", c.sensor.precision);
    get(s, "accuracy", c.sensor.accuracy);
    get(s, "filter_weight", c.sensor.filter_weight);
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    expect_keys(s, "sim", {"dt", "contact_substeps", "control_rate_hz", "trace_rate_hz",
                           "feedback_delay"});
    get(s, "dt", c.sim.dt);
    get(s, "contact_substeps", c.sim.contact_substeps);
    get(s, "control_rate_hz", c.sim.control_rate_hz);
    get(s, "trace_rate_hz", c.sim.trace_rate_hz);
    get(s, "feedback_delay", c.sim.feedback_delay);
  }
  if (j.contains("cp")) {
    const json& p = j.at("cp");
    expect_keys(p, "cp", {"collide_speed", "nominal_f_max", "eta", "d0", "inflation"});
    get(p, "collide_speed", c.cp.collide_speed);
    get(p, "nominal_f_max", c.cp.nominal_f_max);
    get(p, "eta", c.cp.eta);
    get(p, "d0", c.cp.d0);
    get(p, "inflation", c.cp.inflation);
  }
  if (j.contains("astar")) {
    const json& p = j.at("astar");
    expect_keys(p, "astar", {"resolution", "inflation", "prune_max_leg"});
    get(p, "resolution", c.astar.resolution);
    get(p, "inflation", c.astar.inflation);
    get(p, "prune_max_leg", c.astar.prune_max_leg);
  }
  if (j.contains("rrt")) {
    const json& p = j.at("rrt");
    expect_keys(p, "rrt", {"max_iters", "step", "goal_bias", "rewire_radius", "inflation",
                           "max_leg"});
    get(p, "max_iters", c.rrt.max_iters);
    get(p, "step", c.rrt.step);
    get(p, "goal_bias", c.rrt.goal_bias);
    get(p, "rewire_radius", c.rrt.rewire_radius);
    get(p, "inflation", c.rrt.inflation);
    get(p, "max_leg", c.rrt.max_leg);
  }
  if (j.contains("exec")) {
    const json& e = j.at("exec");
    expect_keys(e, "exec",
                {"goal_pos_tol", "goal_vel_tol", "settle_tol", "settle_vel_tol",
                 "recovery_hold", "max_sim_time", "v_max", "a_max", "recovery_v_max",
                 "recovery_a_max", "recovery_min_duration", "recovery_duration_scale",
                 "eta", "d0", "rigid_f_hat"});
    get(e, "goal_pos_tol", c.exec.goal_pos_tol);
    get(e, "goal_vel_tol", c.exec.goal_vel_tol);
    get(e, "settle_tol", c.exec.settle_tol);
    get(e, "settle_vel_tol", c.exec.settle_vel_tol);
    get(e, "recovery_hold", c.exec.recovery_hold);
    get(e, "max_sim_time", c.exec.max_sim_time);
    get(e, "v_max", c.exec.v_max);
    get(e, "a_max", c.exec.a_max);
    get(e, "recovery_v_max", c.exec.recovery.v_max);
    get(e, "recovery_a_max", c.exec.recovery.a_max);
    get(e, "recovery_min_duration", c.exec.recovery.min_duration);
    get(e, "recovery_duration_scale", c.exec.recovery.duration_scale);
    get(e, "eta", c.exec.eta);
    get(e, "d0", c.exec.d0);
    get(e, "rigid_f_hat", c.exec.rigid_f_hat);
  }
  if (j.contains("online")) {
    const json& o = j.at("online");
    expect_keys(o, "online", {"sensing_range", "replan_interval", "max_stall_intervals",
                              "progress_eps"});
    get(o, "sensing_range", c.online.sensing_range);
    get(o, "replan_interval", c.online.replan_interval);
    get(o, "max_stall_intervals", c.online.max_stall_intervals);
    get(o, "progress_eps", c.online.progress_eps);
  }
  if (j.contains("cluttered")) {
    const json& m = j.at("cluttered");
    expect_keys(m, "cluttered",
                {"xmin", "xmax", "ymin", "ymax", "altitude", "start", "goal", "count",
                 "radius", "min_center_spacing", "endpoint_keepout"});
    get(m, "xmin", c.cluttered.xmin);
    get(m, "xmax", c.cluttered.xmax);
    get(m, "ymin", c.cluttered.ymin);
    get(m, "ymax", c.cluttered.ymax);
    get(m, "altitude", c.cluttered.altitude);
    get(m, "start", c.cluttered.start);
    get(m, "goal", c.cluttered.goal);
    get(m, "count", c.cluttered.count);
    get(m, "radius", c.cluttered.radius);
    get(m, "min_center_spacing", c.cluttered.min_center_spacing);
    get(m, "endpoint_keepout", c.cluttered.endpoint_keepout);
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("config: ") + what);
}

}  // namespace

void apply_config_json(RunConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (j.is_null()) return;  // empty file keeps all defaults
  if (!j.is_object()) throw ConfigError("config root must be an object");
  apply_fields(cfg, j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return cfg;
  apply_config_json(cfg, text);
  return cfg;
}

void validate_config(const RunConfig& c) {
  require(c.robot.mass > 0, "mass must be positive");
  require(c.robot.gravity > 0, "gravity must be positive");
  require((c.robot.inertia_diag.array() > 0).all(), "inertia must be positive");
  require(c.robot.max_thrust_factor > 1, "max_thrust_factor must exceed 1");
  require(c.robot.arm.k_l > 0, "k_l must be positive");
  require(c.robot.arm.l_max > 0, "l_max must be positive");
  require(c.robot.arm.l_min > 0 && c.robot.arm.l_min < c.robot.arm.l_max,
          "l_min must lie in (0, l_max)");
  require(c.robot.arm.l_0 >= 0, "l_0 must be non-negative");
  require(c.robot.arm.c_arm >= 0, "c_arm must be non-negative");
  require(c.robot.arm.extend_rate >= 0, "extend_rate must be non-negative");
  require(c.robot.arm.rigid_stiffness > 0, "rigid_stiffness must be positive");
  require(c.sensor.rate_hz > 0, "sensor rate_hz must be positive");
  require(c.sensor.precision > 0, "sensor precision must be positive");
  require(c.sensor.accuracy >= 0, "sensor accuracy must be non-negative");
  require(c.sensor.filter_weight > 0 && c.sensor.filter_weight <= 1,
          "filter_weight must lie in (0, 1]");
  require(c.force_threshold > 0, "force_threshold must be positive");
  require(c.sim.dt > 0, "sim dt must be positive");
  require(c.sim.contact_substeps >= 1, "contact_substeps must be at least 1");
  require(c.sim.control_rate_hz > 0, "control_rate_hz must be positive");
  require(c.sim.trace_rate_hz > 0, "trace_rate_hz must be positive");
  require(c.sim.feedback_delay >= 0, "feedback_delay must be non-negative");
  require(c.cp.collide_speed > 0, "cp collide_speed must be positive");
  require(c.cp.nominal_f_max > 0, "cp nominal_f_max must be positive");
  require(c.astar.resolution > 0, "astar resolution must be positive");
  require(c.rrt.max_iters > 0, "rrt max_iters must be positive");
  require(c.rrt.step > 0, "rrt step must be positive");
  require(c.rrt.goal_bias >= 0 && c.rrt.goal_bias < 1, "rrt goal_bias must lie in [0, 1)");
  require(c.exec.v_max > 0 && c.exec.a_max > 0, "exec limits must be positive");
  require(c.exec.recovery.duration_scale >= 1, "recovery_duration_scale must be at least 1");
  require(c.exec.max_sim_time > 0, "max_sim_time must be positive");
  require(c.online.sensing_range > 0, "sensing_range must be positive");
  require(c.online.replan_interval > 0, "replan_interval must be positive");
  require(c.trials > 0, "trials must be positive");
  require(c.seeds > 0, "seeds must be positive");
  for (double h : c.heights) require(h > 0, "heights must be positive");
  require(c.height > 0, "height must be positive");
  require(c.speed > 0, "speed must be positive");
}

std::string config_echo(const RunConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["variant"] = c.variant;
  j["planner"] = c.planner;
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  j["trials"] = c.trials;
  j["out"] = c.out;
  j["plot"] = c.plot;
  j["heights"] = c.heights;
  j["height"] = c.height;
  j["speed"] = c.speed;
  j["forces"] = c.forces;
  j["dynamic_peak"] = c.dynamic_peak;
  j["map_file"] = c.map_file;
  j["force_threshold"] = c.force_threshold;
  j["robot"] = {{"mass", c.robot.mass},
                {"inertia", {c.robot.inertia_diag.x(), c.robot.inertia_diag.y(),
                             c.robot.inertia_diag.z()}},
                {"gravity", c.robot.gravity},
                {"max_thrust_factor", c.robot.max_thrust_factor},
                {"k_l", c.robot.arm.k_l},
                {"l_max", c.robot.arm.l_max},
                {"l_min", c.robot.arm.l_min},
                {"l_0", c.robot.arm.l_0},
                {"c_arm", c.robot.arm.c_arm},
                {"extend_rate", c.robot.arm.extend_rate},
                {"rigid_stiffness", c.robot.arm.rigid_stiffness}};
  j["gains"] = {{"kp", {c.gains.kp.x(), c.gains.kp.y(), c.gains.kp.z()}},
                {"kd", {c.gains.kd.x(), c.gains.kd.y(), c.gains.kd.z()}},
                {"k_att", c.gains.k_att},
                {"k_rate", {c.gains.k_rate.x(), c.gains.k_rate.y(), c.gains.k_rate.z()}},
                {"torque_limit", {c.gains.torque_limit.x(), c.gains.torque_limit.y(),
                                  c.gains.torque_limit.z()}}};
  j["sensor"] = {{"rate_hz", c.sensor.rate_hz},
                 {"precision", c.sensor.precision},
                 {"accuracy", c.sensor.accuracy},
                 {"filter_weight", c.sensor.filter_weight}};
  j["sim"] = {{"dt", c.sim.dt},
              {"contact_substeps", c.sim.contact_substeps},
              {"control_rate_hz", c.sim.control_rate_hz},
              {"trace_rate_hz", c.sim.trace_rate_hz},
              {"feedback_delay", c.sim.feedback_delay}};
  j["cp"] = {{"collide_speed", c.cp.collide_speed},
             {"nominal_f_max", c.cp.nominal_f_max},
             {"eta", c.cp.eta},
             {"d0", c.cp.d0},
             {"inflation", c.cp.inflation}};
  j["astar"] = {{"resolution", c.astar.resolution},
                {"inflation", c.astar.inflation},
                {"prune_max_leg", c.astar.prune_max_leg}};
  j["rrt"] = {{"max_iters", c.rrt.max_iters},
              {"step", c.rrt.step},
              {"goal_bias", c.rrt.goal_bias},
              {"rewire_radius", c.rrt.rewire_radius},
              {"inflation", c.rrt.inflation},
              {"max_leg", c.rrt.max_leg}};
  j["exec"] = {{"goal_pos_tol", c.exec.goal_pos_tol},
               {"goal_vel_tol", c.exec.goal_vel_tol},
               {"settle_tol", c.exec.settle_tol},
               {"settle_vel_tol", c.exec.settle_vel_tol},
               {"recovery_hold", c.exec.recovery_hold},
               {"max_sim_time", c.exec.max_sim_time},
               {"v_max", c.exec.v_max},
               {"a_max", c.exec.a_max},
               {"recovery_v_max", c.exec.recovery.v_max},
               {"recovery_a_max", c.exec.recovery.a_max},
               {"recovery_min_duration", c.exec.recovery.min_duration},
               {"recovery_duration_scale", c.exec.recovery.duration_scale},
               {"eta", c.exec.eta},
               {"d0", c.exec.d0},
               {"rigid_f_hat", c.exec.rigid_f_hat}};
  j["online"] = {{"sensing_range", c.online.sensing_range},
                 {"replan_interval", c.online.replan_interval},
                 {"max_stall_intervals", c.online.max_stall_intervals},
                 {"progress_eps", c.online.progress_eps}};
  j["cluttered"] = {{"xmin", c.cluttered.xmin},
                    {"xmax", c.cluttered.xmax},
                    {"ymin", c.cluttered.ymin},
                    {"ymax", c.cluttered.ymax},
                    {"altitude", c.cluttered.altitude},
                    {"start", {c.cluttered.start.x(), c.cluttered.start.y()}},
                    {"goal", {c.cluttered.goal.x(), c.cluttered.goal.y()}},
                    {"count", c.cluttered.count},
                    {"radius", c.cluttered.radius},
                    {"min_center_spacing", c.cluttered.min_center_spacing},
                    {"endpoint_keepout", c.cluttered.endpoint_keepout}};
  return j.dump(2);
}

}  // namespace cpnav::harness
