#include "cpnav/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace cpnav::sensing {

double sample_sensor(double true_l, const SensorModel& m, Rng& rng) {
  const double noisy = true_l + rng.uniform(-m.accuracy, m.accuracy);
  if (m.precision <= 0) return noisy;
  return std::round(noisy / m.precision) * m.precision;
}

double filter_update(double l_hat_prev, double reading, double w) {
  return w * reading + (1.0 - w) * l_hat_prev;
}

double estimate_force(double l_hat, const vehicle::ArmParams& arm) {
  const double l = std::clamp(l_hat, arm.l_min, arm.l_max);
  return arm.k_l * ((arm.l_max - l) + arm.l_0);
}

ContactEvent detect_compliant(DetectorState& st, double f_hat, double threshold) {
  switch (st.phase) {
    case ContactPhase::idle:
      if (f_hat >= threshold) {
        st.phase = ContactPhase::in_contact;
        st.f_hat_max = f_hat;
        return ContactEvent::collision_detected;
      }
      return ContactEvent::none;
    case ContactPhase::in_contact:
      if (f_hat < threshold) {
        st.phase = ContactPhase::awaiting_recovery;
        return ContactEvent::handling_start;
      }
      st.f_hat_max = std::max(st.f_hat_max, f_hat);
      return ContactEvent::none;
    case ContactPhase::awaiting_recovery:
      return ContactEvent::none;
  }
  return ContactEvent::none;
}

bool detect_rigid(const Vec3& accel_inertial, double gravity) {
  return accel_inertial.norm() >= 2.0 * gravity;
}

ContactEvent ForceEstimator::update(double t, double true_l) {
  if (t + 1e-12 < next_sample_) return ContactEvent::none;
  next_sample_ = next_sample_ + 1.0 / model_.rate_hz;
  const double reading = sample_sensor(true_l, model_, rng_);
  l_hat_ = filter_update(l_hat_, reading, model_.filter_weight);
  f_hat_ = estimate_force(l_hat_, arm_);
  return detect_compliant(detector_, f_hat_, threshold_);
}

}  // namespace cpnav::sensing
