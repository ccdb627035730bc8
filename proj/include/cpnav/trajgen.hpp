#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpnav/types.hpp"

namespace cpnav {
// Flat reference consumed by the tracking controller.
struct FlatSetpoint {
  Vec3 r{0, 0, 0};
  Vec3 v{0, 0, 0};
  Vec3 a{0, 0, 0};
  double yaw = 0;
};
}  // namespace cpnav

namespace cpnav::trajgen {

// One waypoint of a polynomial trajectory. Endpoint velocity/acceleration
// default to rest when left unset; unset interior derivatives stay free and
// are chosen by the optimizer. Yaw values must be pre-unwrapped.
struct TrajWaypoint {
  Vec3 position{0, 0, 0};
  std::optional<Vec3> velocity;
  std::optional<Vec3> accel;
  std::optional<double> yaw;
};

// Piecewise degree-7 polynomial in scaled segment time tau = t/T.
// Row order of coeffs: x, y, z, yaw.
struct PolynomialTrajectory {
  struct Segment {
    double duration = 0;
    Eigen::Matrix<double, 4, 8> coeffs = Eigen::Matrix<double, 4, 8>::Zero();
  };
  std::vector<Segment> segments;

  double total_time() const;
  // Clamps t into [0, total]; beyond the end returns the final position at
  // rest so a finished trajectory parks the vehicle.
  FlatSetpoint sample(double t) const;
  bool empty() const { return segments.empty(); }
};

// Rest-to-rest trapezoidal duration per leg:
//   T = v_max/a_max + L/v_max   when L >= v_max^2/a_max
//   T = 2 sqrt(L / a_max)       otherwise
// Throws PlanningError on zero-length legs or non-positive limits.
std::vector<double> allocate_times(const std::vector<Vec3>& waypoints, double v_max,
                                   double a_max);

// Minimum-snap fit through the waypoints with the given per-segment
// durations. Position is interpolated exactly; velocity, acceleration and
// jerk are continuous across joints. Unset endpoint derivatives are pinned
// to rest, except acceleration explicitly marked free via `free_start_accel`
// (used by recovery trajectories that begin mid-flight).
PolynomialTrajectory min_snap(const std::vector<TrajWaypoint>& waypoints,
                              const std::vector<double>& durations,
                              bool free_start_accel = false);

// Post-impact stabilization point: back off from r_c along the body x axis
// at contact, proportional to the peak estimated force; altitude coerced.
Vec3 recovery_setpoint(const Vec3& r_c, const Mat3& R_c, double f_hat_max, double eta,
                       double d0, double altitude);

struct RecoveryLimits {
  double v_max = 2.0;
  double a_max = 6.0;
  double min_duration = 0.3;
  // Stretch over the trapezoidal estimate: the single-segment fit peaks well
  // above the average rate, and a hot start steepens it further.
  double duration_scale = 1.5;
};

// Single-segment stop trajectory from the in-flight state (r_c, v_c) to rest
// at r_n. Start acceleration is left free; yaw is held.
PolynomialTrajectory recovery_trajectory(const Vec3& r_c, const Vec3& v_c, double yaw,
                                         const Vec3& r_n, const RecoveryLimits& lim);

// Sampled flat states at a fixed rate, CSV with header
// t,x,y,z,vx,vy,vz,ax,ay,az,yaw.
void write_trajectory_csv(const PolynomialTrajectory& traj, const std::string& path,
                          double rate_hz = 100.0);

}  // namespace cpnav::trajgen
