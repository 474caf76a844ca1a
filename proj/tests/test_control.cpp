#include <cmath>

#include "doctest.h"
#include "scoopsim/control.hpp"
#include "scoopsim/dynamics.hpp"
#include "scoopsim/observers.hpp"

using namespace scoopsim;
using namespace scoopsim::control;

TEST_SUITE("control") {

TEST_CASE("matched states and zero torques give zero references") {
  RobotSignals l, f;
  l.theta.setConstant(0.3);
  f.theta.setConstant(0.3);
  const BilateralRefs r = bilateral_refs(l, f, default_gains(), leader_params());
  CHECK(r.leader.isZero(0.0));
  CHECK(r.follower.isZero(0.0));
}

TEST_CASE("joint-1 position error hand value") {
  RobotSignals l, f;
  l.theta[0] = 0.1;
  const BilateralRefs r = bilateral_refs(l, f, default_gains(), leader_params());
  // 0.5 * J1 * Kp1 * 0.1 = 0.5 * 0.012 * 256 * 0.1
  CHECK(r.follower[0] == doctest::Approx(0.1536).epsilon(1e-12));
  CHECK(r.leader[0] == doctest::Approx(-0.1536).epsilon(1e-12));
}

TEST_CASE("action-reaction satisfied and synchronized gives zero") {
  RobotSignals l, f;
  l.tau_res.setConstant(0.8);
  f.tau_res.setConstant(-0.8);
  const BilateralRefs r = bilateral_refs(l, f, default_gains(), leader_params());
  CHECK(r.leader.isZero(0.0));
  CHECK(r.follower.isZero(0.0));
}

TEST_CASE("position channel is antisymmetric, force channel common-mode") {
  Rng rng(5);
  RobotSignals l, f;
  for (int j = 0; j < kNumJoints; ++j) {
    l.theta[j] = rng.uniform(-1.0, 1.0);
    f.theta[j] = rng.uniform(-1.0, 1.0);
    l.omega[j] = rng.uniform(-1.0, 1.0);
    f.omega[j] = rng.uniform(-1.0, 1.0);
    l.tau_res[j] = rng.uniform(-2.0, 2.0);
    f.tau_res[j] = rng.uniform(-2.0, 2.0);
  }
  const Gains gains = default_gains();
  const RobotParams params = leader_params();

  RobotSignals l0 = l, f0 = f;
  l0.tau_res.setZero();
  f0.tau_res.setZero();
  const BilateralRefs pos_only = bilateral_refs(l0, f0, gains, params);
  CHECK((pos_only.leader + pos_only.follower).isZero(1e-15));

  const BilateralRefs full = bilateral_refs(l, f, gains, params);
  const JointVector force_l = full.leader - pos_only.leader;
  const JointVector force_f = full.follower - pos_only.follower;
  CHECK((force_l - force_f).isZero(1e-15));
}

TEST_CASE("position hold hand value") {
  RobotSignals s;
  s.theta[kJointFixed] = 0.0;
  const double tau =
      position_hold(0.05, kJointFixed, s, default_gains(), follower_params());
  // J3 * Kp3 * err = 0.012 * 961 * 0.05
  CHECK(tau == doctest::Approx(0.5766).epsilon(1e-12));

  s.theta[kJointFixed] = 0.05;
  CHECK(position_hold(0.05, kJointFixed, s, default_gains(), follower_params()) == 0.0);
}

TEST_CASE("position hold settles a step within 1 s") {
  const RobotParams p = follower_params();
  const Gains g = default_gains();
  observers::ObserverBank bank(p, default_cutoffs());
  dynamics::RobotState st;
  bank.reset(st.theta);
  JointVector tau_ref = JointVector::Zero();
  const double cmd = 0.15;
  for (int k = 0; k < 500; ++k) {  // 1 s
    const observers::Estimates est = bank.update(st.theta, tau_ref);
    const RobotSignals sig{st.theta, est.omega, est.tau_res};
    tau_ref.setZero();
    tau_ref[kJointFixed] = position_hold(cmd, kJointFixed, sig, g, p);
    st = dynamics::step(st, tau_ref, JointVector::Zero(), p);
  }
  CHECK(st.theta[kJointFixed] == doctest::Approx(cmd).epsilon(0.02));
}

TEST_CASE("saturation clips at the limit") {
  JointVector tau;
  tau << 12.0, -11.0, 3.0, -3.0, 10.0, -10.0, 0.0, 15.0;
  const JointVector s = saturate(tau);
  CHECK(s[0] == 10.0);
  CHECK(s[1] == -10.0);
  CHECK(s[2] == 3.0);
  CHECK(s[4] == 10.0);
  CHECK(s[7] == 10.0);
}

}  // TEST_SUITE
