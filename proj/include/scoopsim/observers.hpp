#pragma once

#include "scoopsim/robot_params.hpp"
#include "scoopsim/types.hpp"

namespace scoopsim::observers {

// Tustin discretization of the band-limited differentiator g*s/(s+g).
class PseudoDiff {
 public:
  PseudoDiff() = default;
  PseudoDiff(double cutoff, double dt);

  // Feed one angle sample, get the velocity estimate.
  double update(double sample);
  void reset(double initial_sample);
  double cutoff() const { return g_; }

 private:
  double g_ = 20.0;
  double c_prev_ = 0.0;   // y[k-1] coefficient
  double c_diff_ = 0.0;   // (x[k]-x[k-1]) coefficient
  double y_ = 0.0;
  double x_prev_ = 0.0;
  bool primed_ = false;
};

// Tustin discretization of the unity-gain low-pass g/(s+g).
class LowPass {
 public:
  LowPass() = default;
  LowPass(double cutoff, double dt);

  double update(double sample);
  void reset(double value);

 private:
  double c_prev_ = 0.0;
  double c_in_ = 0.0;
  double y_ = 0.0;
  double x_prev_ = 0.0;
  bool primed_ = false;
};

struct Estimates {
  JointVector omega = JointVector::Zero();        // pseudo-differentiated velocity
  JointVector tau_dis = JointVector::Zero();      // DOB output
  JointVector tau_res = JointVector::Zero();      // RFOB reaction-torque estimate
};

// Reaction torque from the disturbance estimate: subtract modeled friction,
// add the joint-2/4 gravity terms.
JointVector rfob(const JointVector& tau_dis, const JointVector& theta,
                 const JointVector& omega, const RobotParams& params);

// Per-robot filter bank: velocity pseudo-differentiation plus a
// velocity-input DOB, tau_dis = LPF(tau_ref + g*J*w) - g*J*w, so no
// acceleration is differentiated explicitly.
class ObserverBank {
 public:
  ObserverBank(const RobotParams& params, const JointVector& cutoffs,
               double dt = kControlDt, bool dob_subtracts_tau_res = false);

  // Call once per control step with the measured angles and the torque
  // reference currently applied to the plant.
  Estimates update(const JointVector& theta, const JointVector& tau_ref_applied);

  void reset(const JointVector& theta);

 private:
  RobotParams params_;
  JointVector cutoffs_;
  PseudoDiff vel_[kNumJoints];
  LowPass dob_[kNumJoints];
  // As printed, the paper's DOB equation carries a tau_res term that Eqs.
  // (18)-(25) then solve for; with the switch on, the previous step's RFOB
  // output is subtracted from the DOB input.
  bool dob_subtracts_tau_res_ = false;
  JointVector tau_res_prev_ = JointVector::Zero();
};

}  // namespace scoopsim::observers
