#include "scoopsim/control.hpp"

#include <algorithm>

namespace scoopsim::control {

BilateralRefs bilateral_refs(const RobotSignals& leader,
                             const RobotSignals& follower, const Gains& gains,
                             const RobotParams& params) {
  BilateralRefs out;
  for (int j = 0; j < kNumJoints; ++j) {
    const double pos_err = leader.theta[j] - follower.theta[j];
    const double vel_err = leader.omega[j] - follower.omega[j];
    const double position_term =
        0.5 * params.inertia[j] * (gains.kp[j] * pos_err + gains.kd[j] * vel_err);
    const double force_term =
        0.5 * gains.kf[j] * (follower.tau_res[j] + leader.tau_res[j]);
    out.leader[j] = -position_term - force_term;
    out.follower[j] = position_term - force_term;
  }
  return out;
}

double position_hold(double theta_cmd, int joint, const RobotSignals& state,
                     const Gains& gains, const RobotParams& params) {
  const double err = theta_cmd - state.theta[joint];
  return params.inertia[joint] *
         (gains.kp[joint] * err - gains.kd[joint] * state.omega[joint]);
}

JointVector saturate(const JointVector& tau, double limit) {
  JointVector out;
  for (int j = 0; j < kNumJoints; ++j) {
    out[j] = std::clamp(tau[j], -limit, limit);
  }
  return out;
}

}  // namespace scoopsim::control
