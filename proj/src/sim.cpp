#include "cpnav/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cpnav::harness {

Simulator::Simulator(const vehicle::RobotParams& robot, const sensing::SensorModel& sensor,
                     const control::Gains& gains, double force_threshold,
                     const world::Map& map, const SimParams& sp,
                     const vehicle::RobotState& init)
    : robot_(robot),
      gains_(gains),
      map_(map),
      sp_(sp),
      state_(init),
      controller_(gains, robot),
      estimator_(sensor, robot.arm, force_threshold, Rng(sp.noise_seed)) {
  ctrl_every_ = std::max(1L, std::lround(1.0 / (sp_.dt * sp_.control_rate_hz)));
  trace_every_ = std::max(1L, std::lround(1.0 / (sp_.dt * sp_.trace_rate_hz)));
}

double Simulator::f_hat() const { return estimator_.f_hat(); }
double Simulator::f_hat_max() const { return estimator_.f_hat_max(); }

void Simulator::begin_handling() { estimator_.begin_handling(); }
void Simulator::rearm() { rigid_armed_ = true; }

sensing::ContactEvent Simulator::step(const FlatSetpoint& sp) {
  if (step_count_ % ctrl_every_ == 0) {
    const vehicle::RobotState* fb = &state_;
    if (sp_.feedback_delay > 0) {
      delay_buffer_.push_back(state_);
      const size_t lag =
          static_cast<size_t>(std::lround(sp_.feedback_delay / sp_.dt)) / ctrl_every_;
      while (delay_buffer_.size() > lag + 1) delay_buffer_.pop_front();
      fb = &delay_buffer_.front();
    }
    held_cmd_ = controller_.update(*fb, sp);
  }

  vehicle::ContactResult contact;
  step_dynamics(state_, held_cmd_, map_, robot_, sp_.dt, sp_.contact_substeps, &contact);
  contact_ = contact;
  if (contact.in_contact && contact.surface_id >= 0) {
    last_contact_obstacle_ = contact.surface_id;
    contacted_.insert(contact.surface_id);
  }
  peak_accel_ = std::max(peak_accel_, state_.accel.norm());
  max_tilt_ = std::max(max_tilt_, std::acos(std::clamp(state_.R(2, 2), -1.0, 1.0)));

  sensing::ContactEvent ev = sensing::ContactEvent::none;
  if (robot_.variant == vehicle::Variant::compliant) {
    ev = estimator_.update(state_.t, state_.l);
  } else if (rigid_armed_ && sensing::detect_rigid(state_.accel, robot_.gravity)) {
    rigid_armed_ = false;
    ev = sensing::ContactEvent::handling_start;
  }

  ++step_count_;
  if (step_count_ % trace_every_ == 0) {
    TraceRow row;
    row.t = state_.t;
    row.r = state_.r;
    row.v = state_.v;
    row.q = quat_wxyz(state_.R);
    row.l = state_.l;
    row.f_true = contact.force;
    row.f_hat = (robot_.variant == vehicle::Variant::compliant) ? estimator_.f_hat() : 0.0;
    trace_.push_back(row);
  }
  return ev;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace file: " + path);
  out << "t,x,y,z,vx,vy,vz,qw,qx,qy,qz,l,f_e_true,f_e_hat\n";
  char line[320];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof(line),
                  "%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.7f,%.7f,%.7f,%.7f,"
                  "%.6f,%.4f,%.4f\n",
                  r.t, r.r.x(), r.r.y(), r.r.z(), r.v.x(), r.v.y(), r.v.z(), r.q(0),
                  r.q(1), r.q(2), r.q(3), r.l, r.f_true, r.f_hat);
    out << line;
  }
}

}  // namespace cpnav::harness
