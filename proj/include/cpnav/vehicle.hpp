#pragma once

#include <vector>

#include "cpnav/types.hpp"
#include "cpnav/world.hpp"

namespace cpnav::vehicle {

enum class Variant { compliant, rigid };

// Prismatic shield arm along body x. The spring carries a small preload so
// the at-rest force estimate sits at k_l * l_0; compression damping engages
// only while the arm shortens. Re-extension is rate-limited by the joint's
// seal drag, so after a bounce the arm stays compressed while the body
// recedes; the tip transmits no force once it leaves the surface. Beyond the
// stroke limit a stiff penalty spring models the mechanical stop (also the
// whole arm for the rigid variant).
struct ArmParams {
  double k_l = 3800.0;           // spring rate, N/m
  double l_max = 0.28;           // fully extended length, m
  double l_min = 0.2546;         // fully compressed length, m
  double l_0 = 0.002;            // preload offset, m
  double c_arm = 55.0;           // compression damping, N s/m (calibrated)
  double extend_rate = 0.05;     // re-extension speed, m/s; 0 = instant (calibrated)
  double rigid_stiffness = 1.21e6;  // stop / rigid contact stiffness, N/m (calibrated)
};

struct RobotParams {
  double mass = 1.25;
  Vec3 inertia_diag{0.01, 0.01, 0.02};
  double gravity = kGravity;
  double max_thrust_factor = 4.0;  // thrust ceiling as multiple of weight
  ArmParams arm;
  Variant variant = Variant::compliant;

  double max_thrust() const { return max_thrust_factor * mass * gravity; }
};

struct RobotState {
  Vec3 r{0, 0, 0};
  Vec3 v{0, 0, 0};
  Mat3 R = Mat3::Identity();
  Vec3 omega{0, 0, 0};
  double l = 0.28;       // current arm length
  double l_dot = 0;
  double t = 0;
  Vec3 accel{0, 0, 0};   // inertial acceleration from the last step

  static RobotState hover(const Vec2& pos, double altitude, double yaw,
                          const ArmParams& arm);
};

struct WrenchCommand {
  double thrust = 0;       // body z force, N
  Vec3 torque{0, 0, 0};    // body torques, N m
};

struct ContactResult {
  bool in_contact = false;
  double force = 0;        // magnitude, applied along -x_b
  double l = 0;
  double l_dot = 0;
  int surface_id = -1;     // obstacle id; -2 wall, -3 ground
};

// Distance along the arm ray from the body origin to the nearest physical
// surface (poles at true radius, walls, ground). +inf when nothing ahead.
double arm_ray_distance(const RobotState& s, const world::Map& m, int* surface_id = nullptr);

// Kinematic arm update against the map surfaces over one substep of length dt.
ContactResult resolve_contact(const RobotState& s, const world::Map& m,
                              const RobotParams& p, double dt);

// Semi-implicit Euler step; switches to contact substepping (dt/substeps)
// whenever a surface is within reach of the arm during the step. Throws
// SimulationFault on non-finite state.
void step_dynamics(RobotState& s, const WrenchCommand& cmd, const world::Map& m,
                   const RobotParams& p, double dt, int contact_substeps = 10,
                   ContactResult* contact_out = nullptr);

struct DropSample {
  double t = 0;
  Vec3 r{0, 0, 0}, v{0, 0, 0}, a{0, 0, 0};
  double l = 0;
  double f_true = 0;
};

// Passive drop onto the ground plane, arm down (body x facing -e3), from a
// given shield-tip height. Integrates until the first rebound apex.
std::vector<DropSample> run_drop_test(const RobotParams& p, double tip_height,
                                      double dt = 1e-3, int contact_substeps = 10);

}  // namespace cpnav::vehicle
