#pragma once

#include "cpnav/types.hpp"
#include "cpnav/vehicle.hpp"

namespace cpnav::sensing {

struct SensorModel {
  double rate_hz = 25.0;
  double precision = 0.001;  // quantization step, m
  double accuracy = 0.005;   // uniform noise half-width, m
  double filter_weight = 0.6;
};

// One raw reading: additive uniform noise then quantization.
double sample_sensor(double true_l, const SensorModel& m, Rng& rng);

// Recursive convex blend of the newest reading into the running estimate.
double filter_update(double l_hat_prev, double reading, double w);

// Spring-law force estimate from the filtered length; the preload offset
// keeps the at-rest output at the preload force, and clamping to the stroke
// limits saturates the estimate at full compression.
double estimate_force(double l_hat, const vehicle::ArmParams& arm);

enum class ContactEvent { none, collision_detected, handling_start };
enum class ContactPhase { idle, in_contact, awaiting_recovery };

// Detector state machine over the estimated force:
//   idle -> in_contact        when f_hat >= threshold (emits collision_detected)
//   in_contact -> awaiting_recovery when f_hat < threshold (emits handling_start)
//   awaiting_recovery -> idle via begin_handling()
// f_hat_max resets when a new contact begins and tracks the peak until
// handling starts.
struct DetectorState {
  ContactPhase phase = ContactPhase::idle;
  double f_hat_max = 0;
};

ContactEvent detect_compliant(DetectorState& st, double f_hat, double threshold);

// Rigid-arm fallback: threshold on the magnitude of the inertial acceleration
// (gravity-compensated specific force in the world frame), boundary inclusive.
bool detect_rigid(const Vec3& accel_inertial, double gravity = kGravity);

// Complete sensing chain at simulation rate: zero-order-hold sensor sampling,
// filtering, force estimation and the contact state machine.
class ForceEstimator {
 public:
  ForceEstimator(const SensorModel& model, const vehicle::ArmParams& arm,
                 double force_threshold, Rng rng)
      : model_(model), arm_(arm), threshold_(force_threshold), rng_(std::move(rng)) {
    l_hat_ = arm.l_max;
    f_hat_ = estimate_force(l_hat_, arm_);
  }

  // Advance to time t with the current true arm length. Samples fire on the
  // sensor clock; between samples the previous estimate holds.
  ContactEvent update(double t, double true_l);

  // Executor acknowledges the handling_start event and begins recovery.
  void begin_handling() { detector_.phase = ContactPhase::idle; }

  double l_hat() const { return l_hat_; }
  double f_hat() const { return f_hat_; }
  double f_hat_max() const { return detector_.f_hat_max; }
  ContactPhase phase() const { return detector_.phase; }

 private:
  SensorModel model_;
  vehicle::ArmParams arm_;
  double threshold_;
  Rng rng_;
  double l_hat_ = 0;
  double f_hat_ = 0;
  double next_sample_ = 0;
  DetectorState detector_;
};

}  // namespace cpnav::sensing
