#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>

#include "cpnav/planners.hpp"
#include "cpnav/sim.hpp"
#include "cpnav/trajgen.hpp"

namespace cpnav::harness {

struct ExecParams {
  double goal_pos_tol = 0.1;
  double goal_vel_tol = 0.1;
  double settle_tol = 0.05;
  double settle_vel_tol = 0.1;
  double recovery_hold = 0.0;  // minimum time between handling start and resume
  double max_sim_time = 120.0;
  double v_max = 1.5;          // cruise cap used for time allocation
  double a_max = 3.0;
  trajgen::RecoveryLimits recovery;
  double eta = 0.01;
  double d0 = 0.2;
  double rigid_f_hat = 80.0;   // constant force magnitude assumed by the rigid variant
  double inflation = 0.28;     // for clearance accounting
  bool fail_on_contact = false;  // baselines treat any contact as a failure
};

struct MissionResult {
  bool success = false;
  std::string failure_reason;
  double traj_time = 0;
  double plan_time_ms = 0;     // accumulated planner wall time (replans included)
  double traj_gen_time_s = 0;  // accumulated polynomial-fit wall time
  std::uint64_t planner_work = 0;
  int collisions = 0;
  double f_hat_max = 0;
  double settle_time = 0;      // most recent handling-to-settled interval
  double rebound_speed = 0;
  Vec3 last_recovery_target{0, 0, 0};
  int replans = 0;
};

// Drives one plan through the closed loop: flies free runs, expects contact on
// collide legs, reacts to detector events with the recovery machinery, and
// reports when an unplanned contact requires replanning.
class MissionRunner {
 public:
  enum class Status { running, reached_goal, failed, want_replan };

  MissionRunner(Simulator& sim, const ExecParams& ep, const Vec2& goal,
                const world::Map* map = nullptr);

  void set_plan(const planners::Plan& plan);
  Status advance(double t_limit);

  MissionResult& result() { return result_; }
  const MissionResult& result() const { return result_; }
  int recoveries() const { return recoveries_; }
  bool recovering() const { return phase_ == Phase::recover; }
  // True while a contact is being ridden out or an approach is committed; a
  // replacement plan installed now would fight the contact handling.
  bool busy() const {
    return phase_ == Phase::recover || braced_ || expecting_contact_;
  }
  // Remaining route crosses an inflated obstacle in the given map, ignoring
  // the obstacle a collide leg is aimed at.
  bool plan_conflicts(const world::Map& m) const;
  // The installed plan has been flown to its end.
  bool plan_consumed() const;

 private:
  bool build_next_trajectory();
  void fail(const std::string& why);

  Simulator& sim_;
  ExecParams ep_;
  Vec2 goal_;
  const world::Map* map_;
  double altitude_;
  planners::Plan plan_;
  size_t cursor_ = 0;

  enum class Phase { fly, recover } phase_ = Phase::fly;
  std::optional<trajgen::PolynomialTrajectory> traj_;
  double traj_t0_ = 0;
  std::vector<Vec2> active_pts_;     // waypoints baked into the active trajectory
  std::vector<double> active_cum_t_;  // cumulative leg end times for active_pts_
  int active_exclude_ = -1;           // obstacle a collide trajectory targets
  trajgen::PolynomialTrajectory recovery_traj_;
  double recover_t0_ = 0, handling_t_ = 0;
  Vec3 r_n_{0, 0, 0};
  bool expecting_contact_ = false;
  bool unexpected_contact_ = false;
  FlatSetpoint park_;

  bool contact_seen_ = false;
  double contact_t_ = 0, rebound_window_end_ = 0;
  Vec2 approach_dir_{1, 0};
  Vec3 anchor_r_{0, 0, 0};  // body pose when the collision was sensed
  Mat3 anchor_R_ = Mat3::Identity();
  bool anchor_valid_ = false;
  bool braced_ = false;

  MissionResult result_;
  int recoveries_ = 0;
  bool terminal_ = false;
  Status status_ = Status::running;
};

// Plans once on the full map and flies the plan to the goal; unplanned
// contacts trigger a replan from the recovered state (the planner callback is
// invoked again).
using PlanFn = std::function<planners::Plan(const Vec2& from, const world::Map& on)>;

MissionResult run_mission_offline(Simulator& sim, const ExecParams& ep,
                                  const world::Map& full, const PlanFn& plan_fn);

struct OnlineParams {
  double sensing_range = 5.0;
  double replan_interval = 0.5;
  int max_stall_intervals = 30;
  double progress_eps = 0.05;
};

// Receding-horizon loop over a partially known map: discover within sensing
// range, plan on the known subset, fly for one interval, repeat. Contacted
// obstacles become known; stalled progress fails the run.
MissionResult run_mission_online(Simulator& sim, const ExecParams& ep,
                                 const OnlineParams& op, const world::Map& full,
                                 const PlanFn& plan_fn);

// Executed-path statistics from the recorded trace.
double trace_path_length(const std::vector<TraceRow>& trace);
double trace_clearance(const std::vector<TraceRow>& trace, const world::Map& m,
                       double inflation, const std::set<int>& exclude);

}  // namespace cpnav::harness
