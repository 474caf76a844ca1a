#pragma once

#include "scoopsim/robot_params.hpp"
#include "scoopsim/types.hpp"

namespace scoopsim::control {

// Sampled values of one robot as seen by the controller.
struct RobotSignals {
  JointVector theta = JointVector::Zero();
  JointVector omega = JointVector::Zero();
  JointVector tau_res = JointVector::Zero();
};

struct BilateralRefs {
  JointVector leader = JointVector::Zero();
  JointVector follower = JointVector::Zero();
};

// Four-channel bilateral law:
//   tau_l = -(J/2)(Kp + Kd s)(th_l - th_f) - (Kf/2)(tau_f + tau_l)
//   tau_f = +(J/2)(Kp + Kd s)(th_l - th_f) - (Kf/2)(tau_f + tau_l)
// with the s-term realized on the measured velocity difference.
BilateralRefs bilateral_refs(const RobotSignals& leader,
                             const RobotSignals& follower, const Gains& gains,
                             const RobotParams& params);

// PD regulation of one joint to a constant command; used to pin the redundant
// joint 3 on both robots.
double position_hold(double theta_cmd, int joint, const RobotSignals& state,
                     const Gains& gains, const RobotParams& params);

// References are clipped to +/- limit before reaching the plant.
inline constexpr double kTorqueLimit = 10.0;  // [N·m]

JointVector saturate(const JointVector& tau, double limit = kTorqueLimit);

}  // namespace scoopsim::control
