#include "scoopsim/dynamics.hpp"

#include <cmath>

namespace scoopsim::dynamics {

JointVector gravity_torque(const JointVector& theta, const RobotParams& params) {
  JointVector g = JointVector::Zero();
  const double s2 = std::sin(theta[1]);
  const double s24 = std::sin(theta[1] + theta[3]);
  g[1] = -params.grav1 * s2 + params.grav2 * s24;
  g[3] = params.grav3 * s24;
  return g;
}

JointVector friction_torque(const JointVector& omega, const RobotParams& params) {
  JointVector f = JointVector::Zero();
  for (int j = 0; j < kNumJoints; ++j) {
    const int slot = RobotParams::friction_slot(j);
    if (slot >= 0) f[j] = params.friction[slot] * omega[j];
  }
  return f;
}

RobotState step(const RobotState& state, const JointVector& tau_ref,
                const JointVector& tau_ext, const RobotParams& params,
                double dt) {
  require_finite(state.theta, "state.theta");
  require_finite(state.omega, "state.omega");
  require_finite(tau_ref, "tau_ref");
  require_finite(tau_ext, "tau_ext");

  const JointVector fric = friction_torque(state.omega, params);
  const JointVector grav = gravity_torque(state.theta, params);

  RobotState next;
  for (int j = 0; j < kNumJoints; ++j) {
    const double acc = (tau_ref[j] - tau_ext[j] - fric[j] + grav[j]) / params.inertia[j];
    next.omega[j] = state.omega[j] + dt * acc;
    next.theta[j] = state.theta[j] + dt * next.omega[j];
  }
  next.t = state.t + dt;
  return next;
}

}  // namespace scoopsim::dynamics
