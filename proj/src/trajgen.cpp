#include "cpnav/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cpnav::trajgen {

namespace {

// d-th derivative of tau^k, as a row of coefficients over c_0..c_7,
// in segment-local scaled time (divide by T^d for real time units).
Eigen::Matrix<double, 1, 8> basis_row(double tau, int d) {
  Eigen::Matrix<double, 1, 8> row = Eigen::Matrix<double, 1, 8>::Zero();
  for (int k = d; k < 8; ++k) {
    double c = 1.0;
    for (int j = 0; j < d; ++j) c *= (k - j);
    row(k) = c * std::pow(tau, k - d);
  }
  return row;
}

// Integral over tau in [0,1] of the product of 4th derivatives of the basis:
// the snap cost Hessian for a unit-duration segment.
Eigen::Matrix<double, 8, 8> snap_hessian_unit() {
  Eigen::Matrix<double, 8, 8> h = Eigen::Matrix<double, 8, 8>::Zero();
  for (int j = 4; j < 8; ++j) {
    for (int k = 4; k < 8; ++k) {
      double cj = 1, ck = 1;
      for (int d = 0; d < 4; ++d) {
        cj *= (j - d);
        ck *= (k - d);
      }
      h(j, k) = cj * ck / (j + k - 7);
    }
  }
  return h;
}

struct AxisPins {
  // One entry per waypoint; unset position means "free joint value"
  // (only meaningful for yaw at interior waypoints).
  std::vector<std::optional<double>> pos, vel, acc;
};

struct Row {
  Eigen::RowVectorXd a;
  double b = 0;
};

// Builds the equality constraints for one axis and solves the KKT system
// for the stacked right-hand sides sharing that constraint pattern.
Eigen::MatrixXd solve_axis_group(const std::vector<AxisPins>& axes,
                                 const std::vector<double>& T, bool free_start_accel) {
  const int n = static_cast<int>(T.size());
  const int nv = 8 * n;
  const int naxes = static_cast<int>(axes.size());

  // All axes in a group must share the pin pattern; build rows from axes[0]
  // and collect per-axis values.
  const AxisPins& p0 = axes[0];
  const int nw = n + 1;
  std::vector<Row> rows;
  Eigen::MatrixXd bvals;  // filled after row count is known

  std::vector<std::vector<double>> vals(naxes);
  auto add_row = [&](const Eigen::RowVectorXd& a, const std::vector<double>& per_axis_b) {
    rows.push_back(Row{a, 0});
    for (int ax = 0; ax < naxes; ++ax) vals[ax].push_back(per_axis_b[ax]);
  };
  auto seg_row = [&](int seg, double tau, int d) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(nv);
    r.segment<8>(8 * seg) = basis_row(tau, d) / std::pow(T[seg], d);
    return r;
  };
  auto axis_values = [&](auto getter) {
    std::vector<double> v(naxes);
    for (int ax = 0; ax < naxes; ++ax) v[ax] = getter(axes[ax]);
    return v;
  };

  for (int j = 0; j < nw; ++j) {
    const bool first = (j == 0), last = (j == nw - 1);
    // Position: pin on both adjacent segments, or tie them together if free.
    if (p0.pos[j]) {
      auto b = axis_values([&](const AxisPins& a) { return *a.pos[j]; });
      if (!first) add_row(seg_row(j - 1, 1.0, 0), b);
      if (!last) add_row(seg_row(j, 0.0, 0), b);
    } else if (!first && !last) {
      add_row(seg_row(j - 1, 1.0, 0) - seg_row(j, 0.0, 0),
              std::vector<double>(naxes, 0.0));
    }
    // Derivatives.
    for (int d = 1; d <= 3; ++d) {
      if (first || last) {
        const int seg = first ? 0 : n - 1;
        const double tau = first ? 0.0 : 1.0;
        if (d == 1) {
          auto b = axis_values(
              [&](const AxisPins& a) { return a.vel[j] ? *a.vel[j] : 0.0; });
          add_row(seg_row(seg, tau, 1), b);
        } else if (d == 2) {
          if (first && free_start_accel && !p0.acc[j]) continue;  // leave free
          auto b = axis_values(
              [&](const AxisPins& a) { return a.acc[j] ? *a.acc[j] : 0.0; });
          add_row(seg_row(seg, tau, 2), b);
        }
        // jerk free at boundaries
      } else {
        add_row(seg_row(j - 1, 1.0, d) - seg_row(j, 0.0, d),
                std::vector<double>(naxes, 0.0));
        if (d == 1 && p0.vel[j]) {
          auto b = axis_values([&](const AxisPins& a) { return *a.vel[j]; });
          add_row(seg_row(j, 0.0, 1), b);
        }
        if (d == 2 && p0.acc[j]) {
          auto b = axis_values([&](const AxisPins& a) { return *a.acc[j]; });
          add_row(seg_row(j, 0.0, 2), b);
        }
      }
    }
  }

  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd A(m, nv);
  bvals.resize(m, naxes);
  for (int i = 0; i < m; ++i) {
    A.row(i) = rows[i].a;
    for (int ax = 0; ax < naxes; ++ax) bvals(i, ax) = vals[ax][i];
  }

  static const Eigen::Matrix<double, 8, 8> h_unit = snap_hessian_unit();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + m, nv + m);
  for (int s = 0; s < n; ++s)
    kkt.block<8, 8>(8 * s, 8 * s) = 2.0 * h_unit / std::pow(T[s], 7);
  kkt.block(nv, 0, m, nv) = A;
  kkt.block(0, nv, nv, m) = A.transpose();

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv + m, naxes);
  rhs.bottomRows(m) = bvals;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::MatrixXd sol = lu.solve(rhs);
  const double resid = (kkt * sol - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, bvals.cwiseAbs().maxCoeff());
  if (!sol.allFinite() || resid > 1e-6 * scale)
    throw PlanningError("min_snap: singular constraint system");
  return sol.topRows(nv);
}

}  // namespace

double PolynomialTrajectory::total_time() const {
  double t = 0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

FlatSetpoint PolynomialTrajectory::sample(double t) const {
  FlatSetpoint sp;
  if (segments.empty()) return sp;
  const double total = total_time();
  if (t >= total) {
    const auto& s = segments.back();
    Eigen::Matrix<double, 1, 8> b0 = basis_row(1.0, 0);
    Eigen::Vector4d val = s.coeffs * b0.transpose();
    sp.r = val.head<3>();
    sp.yaw = val(3);
    return sp;  // parked at the final position
  }
  t = std::max(t, 0.0);
  size_t i = 0;
  double t0 = 0;
  while (i + 1 < segments.size() && t >= t0 + segments[i].duration) {
    t0 += segments[i].duration;
    ++i;
  }
  const auto& s = segments[i];
  const double tau = std::clamp((t - t0) / s.duration, 0.0, 1.0);
  Eigen::Vector4d pos = s.coeffs * basis_row(tau, 0).transpose();
  Eigen::Vector4d vel = s.coeffs * basis_row(tau, 1).transpose() / s.duration;
  Eigen::Vector4d acc =
      s.coeffs * basis_row(tau, 2).transpose() / (s.duration * s.duration);
  sp.r = pos.head<3>();
  sp.v = vel.head<3>();
  sp.a = acc.head<3>();
  sp.yaw = pos(3);
  return sp;
}

std::vector<double> allocate_times(const std::vector<Vec3>& waypoints, double v_max,
                                   double a_max) {
  if (waypoints.size() < 2) throw PlanningError("allocate_times: need two waypoints");
  if (v_max <= 0 || a_max <= 0) throw PlanningError("allocate_times: non-positive limits");
  std::vector<double> T;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const double L = (waypoints[i + 1] - waypoints[i]).norm();
    if (L < 1e-9) throw PlanningError("allocate_times: zero-length leg");
    if (L >= v_max * v_max / a_max)
      T.push_back(v_max / a_max + L / v_max);
    else
      T.push_back(2.0 * std::sqrt(L / a_max));
  }
  return T;
}

PolynomialTrajectory min_snap(const std::vector<TrajWaypoint>& waypoints,
                              const std::vector<double>& durations,
                              bool free_start_accel) {
  const int n = static_cast<int>(durations.size());
  if (waypoints.size() < 2 || waypoints.size() != durations.size() + 1)
    throw PlanningError("min_snap: waypoint/duration mismatch");
  for (double T : durations)
    if (!(T > 0)) throw PlanningError("min_snap: non-positive duration");
  if (!waypoints.front().yaw || !waypoints.back().yaw)
    throw PlanningError("min_snap: endpoint yaw required");

  const int nw = n + 1;
  // x, y, z share a constraint pattern; yaw has its own.
  std::vector<AxisPins> xyz(3);
  for (auto& a : xyz) {
    a.pos.resize(nw);
    a.vel.resize(nw);
    a.acc.resize(nw);
  }
  AxisPins yaw;
  yaw.pos.resize(nw);
  yaw.vel.resize(nw);
  yaw.acc.resize(nw);
  for (int j = 0; j < nw; ++j) {
    const auto& w = waypoints[j];
    for (int ax = 0; ax < 3; ++ax) {
      xyz[ax].pos[j] = w.position(ax);
      if (w.velocity) xyz[ax].vel[j] = (*w.velocity)(ax);
      if (w.accel) xyz[ax].acc[j] = (*w.accel)(ax);
    }
    if (w.yaw) yaw.pos[j] = *w.yaw;
  }

  Eigen::MatrixXd cs_xyz = solve_axis_group(xyz, durations, free_start_accel);
  Eigen::MatrixXd cs_yaw = solve_axis_group({yaw}, durations, free_start_accel);

  PolynomialTrajectory traj;
  traj.segments.resize(n);
  for (int s = 0; s < n; ++s) {
    traj.segments[s].duration = durations[s];
    for (int ax = 0; ax < 3; ++ax)
      traj.segments[s].coeffs.row(ax) = cs_xyz.col(ax).segment<8>(8 * s).transpose();
    traj.segments[s].coeffs.row(3) = cs_yaw.col(0).segment<8>(8 * s).transpose();
  }
  return traj;
}

Vec3 recovery_setpoint(const Vec3& r_c, const Mat3& R_c, double f_hat_max, double eta,
                       double d0, double altitude) {
  Vec3 r_n = r_c - (eta * f_hat_max + d0) * (R_c * Vec3::UnitX());
  r_n.z() = altitude;
  return r_n;
}

PolynomialTrajectory recovery_trajectory(const Vec3& r_c, const Vec3& v_c, double yaw,
                                         const Vec3& r_n, const RecoveryLimits& lim) {
  double T;
  const double L = (r_n - r_c).norm();
  // Entry speed needs braking time on top of the travel time, or a hot entry
  // (full cruise speed when the detector fires) demands an infeasible reversal.
  const double brake = v_c.norm() / lim.a_max;
  if (L < 1e-6) {
    T = std::max(lim.min_duration, lim.duration_scale * brake);
  } else {
    T = lim.duration_scale *
        (allocate_times({r_c, r_n}, lim.v_max, lim.a_max)[0] + brake);
    T = std::max(T, lim.min_duration);
  }
  TrajWaypoint w0, w1;
  w0.position = r_c;
  w0.velocity = v_c;
  w0.yaw = yaw;
  w1.position = r_n;  // identical endpoints are fine: a braking loop in place
  w1.yaw = yaw;
  return min_snap({w0, w1}, {T}, /*free_start_accel=*/true);
}

void write_trajectory_csv(const PolynomialTrajectory& traj, const std::string& path,
                          double rate_hz) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory file: " + path);
  out << "t,x,y,z,vx,vy,vz,ax,ay,az,yaw\n";
  const double dt = 1.0 / rate_hz;
  const double total = traj.total_time();
  char line[256];
  for (int i = 0;; ++i) {
    const double t = std::min(i * dt, total);
    const FlatSetpoint sp = traj.sample(t);
    std::snprintf(line, sizeof(line),
                  "%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t,
                  sp.r.x(), sp.r.y(), sp.r.z(), sp.v.x(), sp.v.y(), sp.v.z(), sp.a.x(),
                  sp.a.y(), sp.a.z(), sp.yaw);
    out << line;
    if (t >= total) break;
  }
}

}  // namespace cpnav::trajgen
