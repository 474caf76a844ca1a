#include "scoopsim/robot_params.hpp"

#include <stdexcept>

namespace scoopsim {

int RobotParams::friction_slot(int joint) {
  switch (joint) {
    case 0: return 0;  // D1 -> joint 1
    case 2: return 1;  // D2 -> joint 3
    case 4: return 2;  // D3 -> joint 5
    case 5: return 3;  // D4 -> joint 6
    case 6: return 4;  // D5 -> joint 7
    case 7: return 5;  // D6 -> gripper
    default: return -1;  // joints 2 and 4 carry gravity terms instead
  }
}

void RobotParams::validate() const {
  for (int j = 0; j < kNumJoints; ++j) {
    if (!(inertia[j] > 0.0)) throw std::invalid_argument("inertia must be > 0");
  }
  for (double d : friction) {
    if (!(d >= 0.0)) throw std::invalid_argument("friction must be >= 0");
  }
}

static RobotParams base_params() {
  RobotParams p;
  p.inertia << 0.012, 0.113, 0.012, 0.040, 0.006, 0.007, 0.006, 0.007;
  p.friction = {0.050, 0.242, 0.040, 0.039, 0.050, 0.021};
  return p;
}

RobotParams leader_params() {
  RobotParams p = base_params();
  p.grav1 = 2.094;
  p.grav2 = 1.151;
  p.grav3 = 1.183;
  return p;
}

RobotParams follower_params() {
  RobotParams p = base_params();
  p.grav1 = 2.294;
  p.grav2 = 1.451;
  p.grav3 = 1.483;
  return p;
}

void Gains::validate() const {
  for (int j = 0; j < kNumJoints; ++j) {
    if (!(kp[j] > 0.0 && kd[j] > 0.0)) {
      throw std::invalid_argument("kp and kd must be > 0");
    }
    if (!(kf[j] >= 0.0)) throw std::invalid_argument("kf must be >= 0");
  }
}

Gains default_gains() {
  Gains g;
  g.kp << 256.0, 196.0, 961.0, 225.0, 289.0, 324.0, 144.0, 324.0;
  g.kd << 32.0, 28.0, 62.0, 30.0, 34.0, 36.0, 24.0, 36.0;
  g.kf << 0.70, 0.70, 1.00, 0.75, 0.80, 1.00, 0.80, 1.00;
  return g;
}

JointVector default_cutoffs() {
  JointVector g;
  g << 15.0, 15.0, 20.0, 20.0, 20.0, 20.0, 20.0, 20.0;
  return g;
}

}  // namespace scoopsim
