#include "cpnav/control.hpp"

#include <algorithm>
#include <cmath>

namespace cpnav::control {

Vec3 position_control(const Vec3& r, const Vec3& v, const FlatSetpoint& sp,
                      const Gains& g, double mass, double gravity) {
  return -g.kd.cwiseProduct(v - sp.v) - g.kp.cwiseProduct(r - sp.r) + mass * sp.a +
         mass * gravity * Vec3::UnitZ();
}

std::optional<Mat3> desired_attitude(const Vec3& f_des, double yaw) {
  const double fn = f_des.norm();
  if (fn < 1e-9) return std::nullopt;
  const Vec3 zb = f_des / fn;
  const Vec3 heading(std::cos(yaw), std::sin(yaw), 0);
  Vec3 yb = zb.cross(heading);
  const double yn = yb.norm();
  if (yn < 1e-6) return std::nullopt;
  yb /= yn;
  Mat3 r;
  r.col(0) = yb.cross(zb);
  r.col(1) = yb;
  r.col(2) = zb;
  return r;
}

vehicle::WrenchCommand attitude_control(const Mat3& R, const Mat3& R_des,
                                        const Vec3& omega, const Vec3& f_des,
                                        const Gains& g, const Vec3& inertia_diag,
                                        double max_thrust) {
  const Eigen::Quaterniond q(R), q_des(R_des);
  Eigen::Quaterniond q_err = q.conjugate() * q_des;
  const double sign = q_err.w() >= 0 ? 1.0 : -1.0;
  const Vec3 omega_des = 2.0 * g.k_att * sign * q_err.vec();

  vehicle::WrenchCommand cmd;
  const Vec3 raw = g.k_rate.cwiseProduct(omega_des - omega) +
                   omega.cross(inertia_diag.cwiseProduct(omega));
  cmd.torque = raw.cwiseMax(-g.torque_limit).cwiseMin(g.torque_limit);
  cmd.thrust = std::clamp(f_des.dot(R.col(2)), 0.0, max_thrust);
  return cmd;
}

vehicle::WrenchCommand TrackingController::update(const vehicle::RobotState& s,
                                                  const FlatSetpoint& sp) {
  const Vec3 f_des = position_control(s.r, s.v, sp, gains_, mass_, gravity_);
  if (f_des.norm() >= 0.05 * mass_ * gravity_) {
    if (auto r_des = desired_attitude(f_des, sp.yaw)) last_R_des_ = *r_des;
  }
  // Degenerate thrust demand: hold the previous attitude target.
  return attitude_control(s.R, last_R_des_, s.omega, f_des, gains_, inertia_,
                          max_thrust_);
}

}  // namespace cpnav::control
