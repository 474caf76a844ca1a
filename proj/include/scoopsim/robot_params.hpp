#pragma once

#include <array>
#include <string>

#include "scoopsim/types.hpp"

namespace scoopsim {

// Identified plant parameters for one robot. Inertias and friction are shared
// between the pair; the gravity coefficients differ because the follower
// carries the turner.
struct RobotParams {
  JointVector inertia;                 // J1..J8 [N·m/(rad/s^2)]
  std::array<double, 6> friction{};    // D1..D6, mapped to joints {1,3,5,6,7,grip}
  double grav1 = 0.0;                  // M1, joint-2 gravity coefficient 1
  double grav2 = 0.0;                  // M2, joint-2 gravity coefficient 2
  double grav3 = 0.0;                  // M3, joint-4 gravity coefficient

  // D-coefficient index for a joint, or -1 for the gravity joints 2 and 4.
  static int friction_slot(int joint);

  void validate() const;
};

RobotParams leader_params();
RobotParams follower_params();

// Diagonal controller gains, identical for leader and follower.
struct Gains {
  JointVector kp;
  JointVector kd;
  JointVector kf;

  void validate() const;
};

Gains default_gains();

// Pseudo-differentiation / observer cutoffs [rad/s]: 15 on joints 1-2,
// 20 elsewhere.
JointVector default_cutoffs();

}  // namespace scoopsim
