#pragma once

#include "scoopsim/robot_params.hpp"
#include "scoopsim/types.hpp"

namespace scoopsim::dynamics {

struct RobotState {
  JointVector theta = JointVector::Zero();  // [rad]
  JointVector omega = JointVector::Zero();  // [rad/s]
  double t = 0.0;                           // [s]
};

// Gravity torque acting on the joints: component 2 gets
// -M1*sin(th2) + M2*sin(th2+th4), component 4 gets +M3*sin(th2+th4),
// all others zero.
JointVector gravity_torque(const JointVector& theta, const RobotParams& params);

// Viscous friction D_k * omega on joints {1,3,5,6,7,gripper}; joints 2 and 4
// have no friction term in this model.
JointVector friction_torque(const JointVector& omega, const RobotParams& params);

// One fixed 2 ms step of the decoupled joint dynamics,
//   J * acc = tau_ref - tau_ext - friction + gravity,
// integrated semi-implicitly (omega first, then theta). tau_ext is the load
// torque exerted on the environment (zero in free motion).
// Throws std::invalid_argument on non-finite inputs.
RobotState step(const RobotState& state, const JointVector& tau_ref,
                const JointVector& tau_ext, const RobotParams& params,
                double dt = kControlDt);

}  // namespace scoopsim::dynamics
