#pragma once

#include <deque>
#include <set>
#include <vector>

#include "cpnav/control.hpp"
#include "cpnav/sensing.hpp"
#include "cpnav/trajgen.hpp"
#include "cpnav/vehicle.hpp"
#include "cpnav/world.hpp"

namespace cpnav::harness {

struct SimParams {
  double dt = 1e-3;
  int contact_substeps = 10;
  double control_rate_hz = 100.0;
  double trace_rate_hz = 100.0;
  double feedback_delay = 0.0;  // control loop sees state this many seconds old
  std::uint64_t noise_seed = 1;
};

struct TraceRow {
  double t = 0;
  Vec3 r{0, 0, 0}, v{0, 0, 0};
  Vec4 q{1, 0, 0, 0};
  double l = 0, f_true = 0, f_hat = 0;
};

// Closed loop around one robot: dynamics at dt, controller zero-order-held at
// its own rate, arm sensing chain on the sensor clock. The compliant variant
// reports detector events from the force estimate; the rigid variant trips on
// the inertial-acceleration threshold and must be re-armed after handling.
class Simulator {
 public:
  Simulator(const vehicle::RobotParams& robot, const sensing::SensorModel& sensor,
            const control::Gains& gains, double force_threshold, const world::Map& map,
            const SimParams& sp, const vehicle::RobotState& init);

  sensing::ContactEvent step(const FlatSetpoint& sp);

  void begin_handling();  // acknowledge handling_start
  void rearm();           // rigid detector ready again after recovery

  const vehicle::RobotState& state() const { return state_; }
  const vehicle::ContactResult& contact() const { return contact_; }
  double t() const { return state_.t; }
  double f_hat() const;
  double f_hat_max() const;
  double peak_accel() const { return peak_accel_; }
  double max_tilt() const { return max_tilt_; }
  int last_contact_obstacle() const { return last_contact_obstacle_; }
  const std::set<int>& contacted_obstacles() const { return contacted_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  const world::Map& map() const { return map_; }
  const vehicle::RobotParams& robot() const { return robot_; }

 private:
  vehicle::RobotParams robot_;
  control::Gains gains_;
  world::Map map_;
  SimParams sp_;
  vehicle::RobotState state_;
  control::TrackingController controller_;
  sensing::ForceEstimator estimator_;
  vehicle::ContactResult contact_;
  vehicle::WrenchCommand held_cmd_;
  std::deque<vehicle::RobotState> delay_buffer_;

  long step_count_ = 0;
  long ctrl_every_ = 1, trace_every_ = 1;
  bool rigid_armed_ = true;
  double rigid_f_floor_ = 0;
  double peak_accel_ = 0, max_tilt_ = 0;
  int last_contact_obstacle_ = -1;
  std::set<int> contacted_;
  std::vector<TraceRow> trace_;
};

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace cpnav::harness
