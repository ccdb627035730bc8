#include "cpnav/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace cpnav::harness {

namespace {

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Waypoint headings follow the legs: interior points take the circular mean of
// the two adjacent leg bearings, then the sequence is unwrapped so the fit
// never spins the long way round.
std::vector<double> leg_yaws(const std::vector<Vec3>& pts, double yaw0) {
  const size_t n = pts.size();
  std::vector<double> bearing(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    Vec2 d = (pts[i + 1] - pts[i]).head<2>();
    bearing[i] = d.norm() > 1e-9 ? std::atan2(d.y(), d.x()) : (i ? bearing[i - 1] : yaw0);
  }
  std::vector<double> yaw(n);
  yaw[0] = yaw0;
  for (size_t i = 1; i + 1 < n; ++i) {
    double a = bearing[i - 1], b = bearing[i];
    yaw[i] = a + 0.5 * wrap_angle(b - a);
  }
  yaw[n - 1] = bearing[n - 2];
  for (size_t i = 1; i < n; ++i) yaw[i] = yaw[i - 1] + wrap_angle(yaw[i] - yaw[i - 1]);
  return yaw;
}

bool trace_events() {
  static const bool on = std::getenv("CPNAV_EXEC_DEBUG") != nullptr;
  return on;
}

}  // namespace

MissionRunner::MissionRunner(Simulator& sim, const ExecParams& ep, const Vec2& goal,
                             const world::Map* map)
    : sim_(sim), ep_(ep), goal_(goal), map_(map), altitude_(sim.state().r.z()) {
  park_.r = sim.state().r;
  park_.yaw = yaw_of(sim.state().R);
}

void MissionRunner::set_plan(const planners::Plan& plan) {
  if (trace_events()) {
    std::fprintf(stderr, "[%7.3f] set_plan:", sim_.t());
    for (const auto& g : plan.segments)
      std::fprintf(stderr, " %s(%.2f,%.2f)",
                   g.kind == planners::SegmentKind::collide   ? "collide"
                   : g.kind == planners::SegmentKind::recover ? "recover"
                                                              : "free",
                   g.target.x(), g.target.y());
    std::fprintf(stderr, "\n");
  }
  plan_ = plan;
  cursor_ = 0;
  result_.planner_work += plan.work;
  traj_.reset();
  expecting_contact_ = false;
  braced_ = false;
  if (phase_ == Phase::fly) build_next_trajectory();
}

void MissionRunner::fail(const std::string& why) {
  result_.success = false;
  result_.failure_reason = why;
  terminal_ = true;
  status_ = Status::failed;
}

bool MissionRunner::build_next_trajectory() {
  const auto& segs = plan_.segments;
  while (cursor_ < segs.size() && segs[cursor_].kind == planners::SegmentKind::recover)
    ++cursor_;
  traj_.reset();
  active_pts_.clear();
  active_cum_t_.clear();
  active_exclude_ = -1;
  if (cursor_ >= segs.size()) {
    if (trace_events())
      std::fprintf(stderr, "[%7.3f] plan consumed, parking at (%.2f,%.2f)\n",
                   sim_.t(), sim_.state().r.x(), sim_.state().r.y());
    park_.r = sim_.state().r;
    park_.v = Vec3::Zero();
    park_.a = Vec3::Zero();
    park_.yaw = yaw_of(sim_.state().R);
    return false;
  }

  const vehicle::RobotState& s = sim_.state();
  const double yaw0 = yaw_of(s.R);
  std::vector<trajgen::TrajWaypoint> wps;

  if (segs[cursor_].kind == planners::SegmentKind::collide) {
    const auto& seg = segs[cursor_++];
    Vec2 d2 = seg.target - s.r.head<2>();
    if (d2.norm() < 1e-6) return build_next_trajectory();
    Vec2 dir = d2.normalized();
    // End the reference at the tip-touch point: the impact still arrives at
    // full speed, but the parked setpoint afterwards holds the body at the
    // surface instead of pressing it into the obstacle while the force
    // estimate decays toward the handling threshold.
    double stop = 0.0;
    if (map_ && seg.obstacle_id >= 0)
      if (const auto* ob = map_->find(seg.obstacle_id))
        stop = ob->radius + sim_.robot().arm.l_max;
    stop = std::min(stop, std::max(0.0, d2.norm() - 0.05));
    Vec2 end2 = seg.target - stop * dir;
    Vec3 tgt(end2.x(), end2.y(), altitude_);
    const double speed = seg.speed.value_or(ep_.v_max);
    const double yaw_t = yaw0 + wrap_angle(std::atan2(dir.y(), dir.x()) - yaw0);

    trajgen::TrajWaypoint w0{s.r};
    w0.velocity = s.v;
    w0.yaw = yaw0;
    trajgen::TrajWaypoint w1{tgt};
    w1.velocity = Vec3(speed * dir.x(), speed * dir.y(), 0.0);
    w1.yaw = yaw_t;
    wps = {w0, w1};
    auto durations = trajgen::allocate_times({s.r, tgt}, speed, ep_.a_max);
    auto t0 = std::chrono::steady_clock::now();
    traj_ = trajgen::min_snap(wps, durations, /*free_start_accel=*/true);
    result_.traj_gen_time_s += wall_seconds(t0);
    expecting_contact_ = true;
    active_pts_ = {s.r.head<2>(), seg.target};
    active_cum_t_ = {durations[0]};
    active_exclude_ = seg.obstacle_id;
  } else {
    std::vector<Vec3> pts = {s.r};
    while (cursor_ < segs.size() && segs[cursor_].kind == planners::SegmentKind::free_flight) {
      Vec3 p(segs[cursor_].target.x(), segs[cursor_].target.y(), altitude_);
      if ((p - pts.back()).norm() > 1e-6) pts.push_back(p);
      ++cursor_;
    }
    if (pts.size() < 2) return build_next_trajectory();
    auto yaws = leg_yaws(pts, yaw0);
    for (size_t i = 0; i < pts.size(); ++i) {
      trajgen::TrajWaypoint w{pts[i]};
      w.yaw = yaws[i];
      if (i == 0) w.velocity = s.v;
      wps.push_back(w);
    }
    auto durations = trajgen::allocate_times(pts, ep_.v_max, ep_.a_max);
    auto t0 = std::chrono::steady_clock::now();
    traj_ = trajgen::min_snap(wps, durations, /*free_start_accel=*/true);
    result_.traj_gen_time_s += wall_seconds(t0);
    expecting_contact_ = false;
    double cum = 0;
    for (const auto& p : pts) active_pts_.push_back(p.head<2>());
    for (double d : durations) active_cum_t_.push_back(cum += d);
  }
  traj_t0_ = sim_.t();
  if (trace_events())
    std::fprintf(stderr, "[%7.3f] traj built: %s, %.2fs, cursor %zu\n", sim_.t(),
                 expecting_contact_ ? "collide" : "free", traj_->total_time(), cursor_);
  return true;
}

MissionRunner::Status MissionRunner::advance(double t_limit) {
  if (terminal_) return status_;
  status_ = Status::running;
  const double t_end = std::min(t_limit, ep_.max_sim_time);

  while (sim_.t() < t_end) {
    FlatSetpoint sp;
    if (phase_ == Phase::recover) {
      sp = recovery_traj_.sample(sim_.t() - recover_t0_);
    } else if (braced_) {
      // Between detection and handling the collide reference has done its job;
      // chasing it would press the arm back into the surface, and braking the
      // bounce would tilt the thrust vector and smear the retreat. Track the
      // body state itself so the vehicle levels out and coasts off the surface.
      sp.r = sim_.state().r;
      sp.v = sim_.state().v;
      sp.a = Vec3::Zero();
      sp.yaw = yaw_of(sim_.state().R);
    } else if (traj_) {
      sp = traj_->sample(sim_.t() - traj_t0_);
    } else {
      sp = park_;
    }

    const sensing::ContactEvent ev = sim_.step(sp);
    const vehicle::RobotState& s = sim_.state();

    // Restitution bookkeeping: strongest backward velocity along the approach
    // direction, from first touch until recovery flight begins (the commanded
    // retreat would otherwise mask the passive bounce).
    if (!contact_seen_ && sim_.contact().in_contact) {
      contact_seen_ = true;
      contact_t_ = s.t;
      rebound_window_end_ = s.t + 1.0;
      Vec2 fwd = s.R.col(0).head<2>();
      approach_dir_ = fwd.norm() > 1e-9 ? Vec2(fwd.normalized()) : Vec2(1, 0);
    }
    if (contact_seen_ && s.t <= rebound_window_end_) {
      result_.rebound_speed =
          std::max(result_.rebound_speed, -s.v.head<2>().dot(approach_dir_));
    }

    // Collision-avoidance baselines fail on physical contact (ground truth),
    // not on the estimator, whose noise floor grazes the detection threshold
    // roughly once per hundred seconds of flight.
    if (ep_.fail_on_contact && sim_.contact().in_contact) {
      fail("contact");
      return status_;
    }

    if (ev == sensing::ContactEvent::collision_detected && phase_ == Phase::fly) {
      ++result_.collisions;
      // The retreat distance is anchored where the collision was sensed; by
      // the time the force estimate decays below the handling threshold the
      // bounce has already carried the body away from the surface.
      anchor_r_ = s.r;
      anchor_R_ = s.R;
      anchor_valid_ = true;
      braced_ = true;
    }

    if (ev == sensing::ContactEvent::handling_start && phase_ == Phase::recover) {
      // Already handling this collision; momentum can re-press the arm right
      // after recovery starts. Re-arm the detector and let the retreat play out.
      sim_.begin_handling();
    } else if (ev == sensing::ContactEvent::handling_start) {
      if (trace_events())
        std::fprintf(stderr, "[%7.3f] handling_start at (%.2f,%.2f) expecting=%d\n",
                     s.t, s.r.x(), s.r.y(), int(expecting_contact_));
      braced_ = false;
      const bool rigid = sim_.robot().variant == vehicle::Variant::rigid;
      if (rigid) ++result_.collisions;
      const double f = rigid ? ep_.rigid_f_hat : sim_.f_hat_max();
      result_.f_hat_max = std::max(result_.f_hat_max, f);
      const Vec3& r_c = anchor_valid_ ? anchor_r_ : s.r;
      const Mat3& R_c = anchor_valid_ ? anchor_R_ : s.R;
      anchor_valid_ = false;
      r_n_ = trajgen::recovery_setpoint(r_c, R_c, f, ep_.eta, ep_.d0, altitude_);
      result_.last_recovery_target = r_n_;
      auto t0 = std::chrono::steady_clock::now();
      recovery_traj_ =
          trajgen::recovery_trajectory(s.r, s.v, yaw_of(s.R), r_n_, ep_.recovery);
      result_.traj_gen_time_s += wall_seconds(t0);
      rebound_window_end_ = std::min(rebound_window_end_, s.t);
      phase_ = Phase::recover;
      recover_t0_ = s.t;
      handling_t_ = s.t;
      unexpected_contact_ = !expecting_contact_;
      expecting_contact_ = false;
      sim_.begin_handling();
      continue;
    }

    if (phase_ == Phase::recover) {
      const bool settled = (s.r - r_n_).norm() <= ep_.settle_tol &&
                           s.v.norm() <= ep_.settle_vel_tol;
      const bool traj_done = s.t - recover_t0_ >= recovery_traj_.total_time();
      const bool held = s.t - handling_t_ >= ep_.recovery_hold;
      if (settled && traj_done && held) {
        if (trace_events())
          std::fprintf(stderr, "[%7.3f] recovery settled at (%.2f,%.2f), r_n (%.2f,%.2f)\n",
                       s.t, s.r.x(), s.r.y(), r_n_.x(), r_n_.y());
        result_.settle_time = s.t - handling_t_;
        ++recoveries_;
        sim_.rearm();
        phase_ = Phase::fly;
        contact_seen_ = false;
        if (unexpected_contact_) {
          unexpected_contact_ = false;
          traj_.reset();
          park_.r = s.r;
          park_.v = Vec3::Zero();
          park_.a = Vec3::Zero();
          park_.yaw = yaw_of(s.R);
          status_ = Status::want_replan;
          return status_;
        }
        // With the plan consumed, hold the commanded stabilization point
        // rather than wherever the settle check happened to trip.
        if (!build_next_trajectory()) park_.r = r_n_;
      }
      continue;
    }

    // Flying: roll over to the next run when the current one is exhausted,
    // tolerate a collide leg that never met its obstacle.
    if (traj_) {
      const double elapsed = s.t - traj_t0_;
      if (expecting_contact_) {
        if (elapsed > traj_->total_time() + 2.0) {
          if (trace_events())
            std::fprintf(stderr, "[%7.3f] collide leg missed, moving on\n", s.t);
          expecting_contact_ = false;
          braced_ = false;
          build_next_trajectory();
        }
      } else if (elapsed >= traj_->total_time() && cursor_ < plan_.segments.size()) {
        build_next_trajectory();
      }
    }

    if (!expecting_contact_ && cursor_ >= plan_.segments.size()) {
      Vec3 g3(goal_.x(), goal_.y(), altitude_);
      if ((s.r - g3).norm() <= ep_.goal_pos_tol && s.v.norm() <= ep_.goal_vel_tol) {
        result_.success = true;
        result_.traj_time = s.t;
        terminal_ = true;
        status_ = Status::reached_goal;
        return status_;
      }
    }
  }

  if (sim_.t() >= ep_.max_sim_time) {
    fail("timeout");
    return status_;
  }
  return status_;
}

MissionResult run_mission_offline(Simulator& sim, const ExecParams& ep,
                                  const world::Map& full, const PlanFn& plan_fn) {
  MissionRunner runner(sim, ep, full.goal, &full);
  auto plan_from = [&](const Vec2& from) {
    auto t0 = std::chrono::steady_clock::now();
    planners::Plan p = plan_fn(from, full);
    runner.result().plan_time_ms += 1e3 * wall_seconds(t0);
    return p;
  };
  try {
    runner.set_plan(plan_from(full.start));
    for (;;) {
      auto st = runner.advance(ep.max_sim_time);
      if (st == MissionRunner::Status::want_replan) {
        ++runner.result().replans;
        runner.set_plan(plan_from(sim.state().r.head<2>()));
        continue;
      }
      break;
    }
  } catch (const PlanningError& e) {
    runner.result().success = false;
    runner.result().failure_reason = std::string("planning: ") + e.what();
  }
  return runner.result();
}

MissionResult run_mission_online(Simulator& sim, const ExecParams& ep,
                                 const OnlineParams& op, const world::Map& full,
                                 const PlanFn& plan_fn) {
  world::KnownMap known = world::KnownMap::none_of(full);
  MissionRunner runner(sim, ep, full.goal, &full);
  auto plan_from = [&](const Vec2& from) {
    auto t0 = std::chrono::steady_clock::now();
    planners::Plan p = plan_fn(from, known.map);
    runner.result().plan_time_ms += 1e3 * wall_seconds(t0);
    return p;
  };

  try {
    world::discover_visible(full.start, op.sensing_range, full, known);
    runner.set_plan(plan_from(full.start));

    double prev_dist = (full.start - full.goal).norm();
    int stalls = 0;
    for (;;) {
      // Boundaries stay on the interval grid even if a contact interrupts one.
      const double horizon =
          (std::floor(sim.t() / op.replan_interval + 1e-9) + 1.0) * op.replan_interval;
      auto st = runner.advance(horizon);
      if (st == MissionRunner::Status::reached_goal ||
          st == MissionRunner::Status::failed)
        break;

      const Vec2 here = sim.state().r.head<2>();
      for (int id : sim.contacted_obstacles())
        if (const auto* ob = full.find(id)) known.discover(*ob);
      world::discover_visible(here, op.sensing_range, full, known);

      // Contact handling owns the vehicle until it settles; installing a new
      // plan mid-brace or mid-recovery would yank the reference out from
      // under it. Progress is not expected during handling either.
      if (st == MissionRunner::Status::running && runner.busy()) continue;

      if (st == MissionRunner::Status::running) {
        const double dist = (here - full.goal).norm();
        if (prev_dist - dist < op.progress_eps) {
          if (++stalls >= op.max_stall_intervals) {
            runner.result().success = false;
            runner.result().failure_reason = "stalled";
            break;
          }
        } else {
          stalls = 0;
        }
        prev_dist = dist;
      }
      ++runner.result().replans;
      runner.set_plan(plan_from(here));
    }
  } catch (const PlanningError& e) {
    runner.result().success = false;
    runner.result().failure_reason = std::string("planning: ") + e.what();
  }
  return runner.result();
}

double trace_path_length(const std::vector<TraceRow>& trace) {
  double len = 0;
  for (size_t i = 1; i < trace.size(); ++i) len += (trace[i].r - trace[i - 1].r).norm();
  return len;
}

double trace_clearance(const std::vector<TraceRow>& trace, const world::Map& m,
                       double inflation, const std::set<int>& exclude) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : trace) {
    Vec2 p = row.r.head<2>();
    for (const auto& ob : m.obstacles) {
      if (exclude.count(ob.id)) continue;
      best = std::min(best, (p - ob.center).norm() - ob.radius - inflation);
    }
  }
  return best;
}

}  // namespace cpnav::harness
