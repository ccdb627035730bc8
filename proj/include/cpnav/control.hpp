#pragma once

#include <optional>

#include "cpnav/trajgen.hpp"
#include "cpnav/types.hpp"
#include "cpnav/vehicle.hpp"

namespace cpnav::control {

struct Gains {
  Vec3 kp{30, 30, 32};
  Vec3 kd{13.5, 13.5, 14.5};
  double k_att = 6.0;
  Vec3 k_rate{0.4, 0.4, 0.15};
  Vec3 torque_limit{2.0, 2.0, 1.0};
};

// Desired total force in the world frame (includes weight compensation).
Vec3 position_control(const Vec3& r, const Vec3& v, const FlatSetpoint& sp,
                      const Gains& g, double mass, double gravity);

// Attitude whose body z carries F_des while the body x heading tracks yaw.
// Empty when the thrust direction or the yaw cross product degenerates.
std::optional<Mat3> desired_attitude(const Vec3& f_des, double yaw);

// Quaternion-error attitude loop with gyroscopic feedforward; thrust is the
// projection of F_des onto the current body z.
vehicle::WrenchCommand attitude_control(const Mat3& R, const Mat3& R_des,
                                        const Vec3& omega, const Vec3& f_des,
                                        const Gains& g, const Vec3& inertia_diag,
                                        double max_thrust);

// Stateful wrapper: remembers the last valid desired attitude so degenerate
// setpoints hold attitude instead of faulting.
class TrackingController {
 public:
  TrackingController(const Gains& g, const vehicle::RobotParams& p)
      : gains_(g), mass_(p.mass), gravity_(p.gravity), inertia_(p.inertia_diag),
        max_thrust_(p.max_thrust()) {}

  vehicle::WrenchCommand update(const vehicle::RobotState& s, const FlatSetpoint& sp);

  const Mat3& last_attitude_target() const { return last_R_des_; }

 private:
  Gains gains_;
  double mass_, gravity_;
  Vec3 inertia_;
  double max_thrust_;
  Mat3 last_R_des_ = Mat3::Identity();
};

}  // namespace cpnav::control
