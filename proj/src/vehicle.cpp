#include "cpnav/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpnav::vehicle {

RobotState RobotState::hover(const Vec2& pos, double altitude, double yaw,
                             const ArmParams& arm) {
  RobotState s;
  s.r = Vec3(pos.x(), pos.y(), altitude);
  s.R = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  s.l = arm.l_max;
  return s;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Smallest t >= 0 with |p + t d - c| = r in the plane; NaN when the ray
// misses. A start inside the disk returns 0.
double ray_circle(const Vec2& p, const Vec2& d, const Vec2& c, double r) {
  const Vec2 f = p - c;
  if (f.squaredNorm() <= r * r) return 0.0;
  const double A = d.squaredNorm();
  if (A < 1e-16) return std::numeric_limits<double>::quiet_NaN();
  const double B = 2.0 * f.dot(d);
  const double C = f.squaredNorm() - r * r;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return std::numeric_limits<double>::quiet_NaN();
  const double t = (-B - std::sqrt(disc)) / (2 * A);
  return t >= 0 ? t : std::numeric_limits<double>::quiet_NaN();
}

double ray_wall(const Vec2& p, const Vec2& d, const world::Wall& w) {
  const Vec2 e = w.b - w.a;
  const double denom = cross2(d, e);
  if (std::abs(denom) < 1e-12) return std::numeric_limits<double>::quiet_NaN();
  const double t = cross2(w.a - p, e) / denom;
  const double s = cross2(w.a - p, d) / denom;
  if (t < 0 || s < 0 || s > 1) return std::numeric_limits<double>::quiet_NaN();
  return t;
}

}  // namespace

double arm_ray_distance(const RobotState& s, const world::Map& m, int* surface_id) {
  const Vec3 u = s.R * Vec3::UnitX();
  const Vec2 p(s.r.x(), s.r.y());
  const Vec2 uxy(u.x(), u.y());
  double best = std::numeric_limits<double>::infinity();
  int id = -1;

  const double uxy_norm = uxy.norm();
  if (uxy_norm > 1e-9) {
    const Vec2 dir = uxy / uxy_norm;
    for (const auto& o : m.obstacles) {
      const double t2d = ray_circle(p, dir, o.center, o.radius);
      if (std::isnan(t2d)) continue;
      const double t3d = t2d / uxy_norm;  // planar distance back to arm length
      if (t3d < best) {
        best = t3d;
        id = o.id;
      }
    }
    for (const auto& w : m.walls) {
      const double t2d = ray_wall(p, dir, w);
      if (std::isnan(t2d)) continue;
      const double t3d = t2d / uxy_norm;
      if (t3d < best) {
        best = t3d;
        id = -2;
      }
    }
  }
  if (m.ground && u.z() < -1e-9) {
    const double t = s.r.z() / (-u.z());
    if (t >= 0 && t < best) {
      best = t;
      id = -3;
    }
  }
  if (surface_id) *surface_id = id;
  return best;
}

namespace {

// Distance from the body centre to the nearest contact surface. Unlike the
// arm ray this is invariant to attitude, so it bounds where the tip could be
// after any rotation within the step.
double centre_surface_distance(const RobotState& s, const world::Map& m) {
  const Vec2 p(s.r.x(), s.r.y());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : m.obstacles)
    best = std::min(best, (p - o.center).norm() - o.radius);
  for (const auto& w : m.walls)
    best = std::min(best, world::point_segment_distance(p, w.a, w.b));
  if (m.ground) best = std::min(best, s.r.z());
  return best;
}

// Bounds the backstop penalty if the tip ever lands deep inside a surface
// (e.g. after a violent tumble); legitimate impacts stay well under this.
constexpr double kContactForceCap = 2.0e4;

}  // namespace

ContactResult resolve_contact(const RobotState& s, const world::Map& m,
                              const RobotParams& p, double dt) {
  ContactResult c;
  int id = -1;
  const double surf = arm_ray_distance(s, m, &id);
  const auto& arm = p.arm;

  if (p.variant == Variant::rigid) {
    c.l = arm.l_max;
    c.l_dot = 0;
    if (surf < arm.l_max) {
      c.in_contact = true;
      c.surface_id = id;
      c.force = std::min(arm.rigid_stiffness * (arm.l_max - surf), kContactForceCap);
    }
    return c;
  }

  // Re-extension is rate-limited; the tip can track a receding surface only
  // up to extend_rate and separates beyond that.
  const double reachable =
      arm.extend_rate > 0 ? std::min(arm.l_max, s.l + arm.extend_rate * dt)
                          : arm.l_max;
  if (surf > reachable) {
    // Tip off the surface: no load path to the body while the arm relaxes.
    c.l = reachable;
    c.l_dot = (c.l - s.l) / dt;
    return c;
  }
  c.in_contact = true;
  c.surface_id = id;
  c.l = std::clamp(surf, arm.l_min, arm.l_max);
  c.l_dot = (c.l - s.l) / dt;
  const double penetration = std::max(0.0, arm.l_min - surf);
  c.force = std::min(arm.k_l * (arm.l_max - c.l + arm.l_0) +
                         arm.c_arm * std::max(0.0, -c.l_dot) +
                         arm.rigid_stiffness * penetration,
                     kContactForceCap);
  return c;
}

void step_dynamics(RobotState& s, const WrenchCommand& cmd, const world::Map& m,
                   const RobotParams& p, double dt, int contact_substeps,
                   ContactResult* contact_out) {
  // Substep when a surface could engage the arm during this step. The test
  // uses the centre distance rather than the arm ray: a rotating body sweeps
  // the ray across surfaces discontinuously, but the tip always stays within
  // l_max of the centre.
  const double reach = centre_surface_distance(s, m);
  const bool near = reach < p.arm.l_max + s.v.norm() * dt + 0.05;
  const int nsub = near ? std::max(1, contact_substeps) : 1;
  const double h = dt / nsub;

  const Vec3 inertia = p.inertia_diag;
  ContactResult contact;
  for (int k = 0; k < nsub; ++k) {
    contact = resolve_contact(s, m, p, h);
    const Vec3 f_body(-contact.force, 0, cmd.thrust);
    const Vec3 accel = Vec3(0, 0, -p.gravity) + (s.R * f_body) / p.mass;
    s.v += accel * h;
    s.r += s.v * h;
    const Vec3 I_omega = inertia.cwiseProduct(s.omega);
    const Vec3 omega_dot =
        (I_omega.cross(s.omega) + cmd.torque).cwiseQuotient(inertia);
    s.omega += omega_dot * h;
    s.R = orthonormalize(s.R * exp_so3(s.omega * h));
    s.l = contact.l;
    s.l_dot = contact.l_dot;
    s.accel = accel;
    s.t += h;
  }
  if (!s.r.allFinite() || !s.v.allFinite() || !s.R.allFinite() || !s.omega.allFinite())
    throw SimulationFault("step_dynamics: non-finite state at t=" + std::to_string(s.t));
  if (contact_out) *contact_out = contact;
}

std::vector<DropSample> run_drop_test(const RobotParams& p, double tip_height,
                                      double dt, int contact_substeps) {
  world::Map ground_only;
  ground_only.xmin = -5;
  ground_only.xmax = 5;
  ground_only.ymin = -5;
  ground_only.ymax = 5;
  ground_only.ground = true;

  RobotState s;
  s.r = Vec3(0, 0, tip_height + p.arm.l_max);
  // Arm down: body x maps to -e3 (body z then faces +e1).
  s.R = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitY()).toRotationMatrix();
  s.l = p.arm.l_max;

  std::vector<DropSample> trace;
  bool touched = false;
  WrenchCommand idle;  // motors off
  while (s.t < 5.0) {
    ContactResult c;
    step_dynamics(s, idle, ground_only, p, dt, contact_substeps, &c);
    trace.push_back(DropSample{s.t, s.r, s.v, s.accel, s.l, c.force});
    if (c.in_contact) touched = true;
    if (touched && !c.in_contact && s.v.z() <= 0) break;  // rebound apex
  }
  return trace;
}

}  // namespace cpnav::vehicle
