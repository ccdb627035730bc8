#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace cpnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.81;

// Thrown when the integrator or a solver produces non-finite state.
struct SimulationFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a planner cannot produce a plan (blocked goal, iteration cap, ...).
struct PlanningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on malformed config / map files and bad CLI arguments.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return s;
}

// Rotation exponential exp([w]x), stable near zero angle.
inline Mat3 exp_so3(const Vec3& w) {
  const double th = w.norm();
  if (th < 1e-12) return Mat3::Identity() + skew(w);
  const Vec3 axis = w / th;
  return Eigen::AngleAxisd(th, axis).toRotationMatrix();
}

// Nearest rotation matrix (polar decomposition via quaternion round-trip is
// not drift-free; use one Gram-Schmidt-like symmetric correction instead).
inline Mat3 orthonormalize(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec4 quat_wxyz(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;  // canonical sign for stable traces
  return Vec4(q.w(), q.x(), q.y(), q.z());
}

inline double yaw_of(const Mat3& r) {
  // Heading of the body x axis projected to the horizontal plane.
  return std::atan2(r(1, 0), r(0, 0));
}

inline double wrap_angle(double a) {
  while (a > M_PI) a -= 2 * M_PI;
  while (a < -M_PI) a += 2 * M_PI;
  return a;
}

// Deterministic uniform generator: raw mt19937_64 bits mapped to [0,1) so the
// stream is pinned independent of library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed), seed_(seed) {}

  double uniform01() { return std::ldexp(static_cast<double>(eng_() >> 11), -53); }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  std::uint64_t bits() { return eng_(); }

  // Derive an independent deterministic stream for sub-task `index`.
  Rng fork(std::uint64_t index) const {
    std::uint64_t s = (seed_ + 0xD1B54A32D192ED03ULL) + (index + 1) * 0x9E3779B97F4A7C15ULL;
    s ^= s >> 31;
    s *= 0xBF58476D1CE4E5B9ULL;
    s ^= s >> 27;
    return Rng(s);
  }

 private:
  std::mt19937_64 eng_;
  std::uint64_t seed_;
};

}  // namespace cpnav
