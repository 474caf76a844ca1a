#include <cmath>

#include "doctest.h"
#include "scoopsim/control.hpp"
#include "scoopsim/dynamics.hpp"
#include "scoopsim/observers.hpp"

using namespace scoopsim;
using namespace scoopsim::observers;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Hold one joint with a stiff PD while a constant external torque loads it;
// returns the settled RFOB estimate. This is the simulation oracle for the
// sensorless force measurement.
double settled_rfob(int joint, double injected, double hold_s = 3.0) {
  const RobotParams p = follower_params();
  ObserverBank bank(p, default_cutoffs());
  dynamics::RobotState s;
  bank.reset(s.theta);
  JointVector tau_ref = JointVector::Zero();
  JointVector tau_ext = JointVector::Zero();
  tau_ext[joint] = injected;
  const int n = static_cast<int>(hold_s / kControlDt);
  double estimate = 0.0;
  for (int k = 0; k < n; ++k) {
    const Estimates est = bank.update(s.theta, tau_ref);
    estimate = est.tau_res[joint];
    for (int j = 0; j < kNumJoints; ++j) {
      tau_ref[j] = p.inertia[j] * (800.0 * (0.0 - s.theta[j]) - 60.0 * est.omega[j]);
    }
    s = dynamics::step(s, tau_ref, tau_ext, p);
  }
  return estimate;
}

}  // namespace

TEST_SUITE("observers") {

TEST_CASE("pseudo-differentiation of a constant decays to zero") {
  PseudoDiff pd(15.0, kControlDt);
  double y = 0.0;
  for (int k = 0; k < 2000; ++k) y = pd.update(1.234);
  CHECK(std::abs(y) < 1e-12);
}

TEST_CASE("pseudo-differentiation of a ramp converges to the slope") {
  PseudoDiff pd(15.0, kControlDt);
  double y = 0.0;
  const int n = static_cast<int>(5.0 / 15.0 / kControlDt) + 1;  // 5/g seconds
  for (int k = 0; k < n; ++k) y = pd.update(k * kControlDt);
  CHECK(y == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("pseudo-differentiation amplitude at 0.1 g within 1%") {
  const double g = 20.0;
  const double w = 0.1 * g;
  PseudoDiff pd(g, kControlDt);
  double peak = 0.0;
  const int settle = static_cast<int>(2.0 * kPi / w / kControlDt) * 2;
  const int n = settle * 3;
  for (int k = 0; k < n; ++k) {
    const double y = pd.update(std::sin(w * k * kControlDt));
    if (k > settle) peak = std::max(peak, std::abs(y));
  }
  // Analytic response of g*s/(s+g): |H| * w = w * g / sqrt(w^2 + g^2).
  const double expected = w * g / std::sqrt(w * w + g * g);
  CHECK(peak == doctest::Approx(expected).epsilon(0.01));
  // And that is itself within 1% of the true derivative amplitude w.
  CHECK(peak == doctest::Approx(w).epsilon(0.011));
}

TEST_CASE("DOB reads zero in free motion without model terms") {
  RobotParams p = follower_params();
  p.friction = {};                     // no friction
  p.grav1 = p.grav2 = p.grav3 = 0.0;   // no gravity
  ObserverBank bank(p, default_cutoffs());
  dynamics::RobotState s;
  s.omega[0] = 0.4;  // coasting
  bank.reset(s.theta);
  Estimates est;
  for (int k = 0; k < 3000; ++k) {
    est = bank.update(s.theta, JointVector::Zero());
    s = dynamics::step(s, JointVector::Zero(), JointVector::Zero(), p);
  }
  for (int j = 0; j < kNumJoints; ++j) CHECK(std::abs(est.tau_dis[j]) < 5e-3);
}

TEST_CASE("RFOB equals DOB output when compensation terms vanish") {
  const RobotParams p = follower_params();
  JointVector d;
  d << 0.3, -0.1, 0.2, 0.05, 0.0, 0.7, -0.4, 0.1;
  const JointVector r = rfob(d, JointVector::Zero(), JointVector::Zero(), p);
  CHECK((r - d).isZero(0.0));
}

TEST_CASE("RFOB joint-2 hand value") {
  const RobotParams p = follower_params();
  JointVector d = JointVector::Zero();
  d[1] = 1.0;
  JointVector theta = JointVector::Zero();
  theta[1] = kPi / 2.0;
  const JointVector r = rfob(d, theta, JointVector::Zero(), p);
  CHECK(r[1] == doctest::Approx(0.157).epsilon(1e-12));
}

TEST_CASE("RFOB is linear in the disturbance estimate") {
  const RobotParams p = leader_params();
  Rng rng(3);
  JointVector d, theta, omega;
  for (int j = 0; j < kNumJoints; ++j) {
    d[j] = rng.uniform(-2.0, 2.0);
    theta[j] = rng.uniform(-1.0, 1.0);
    omega[j] = rng.uniform(-1.0, 1.0);
  }
  const JointVector diff =
      rfob(d, theta, omega, p) - rfob(JointVector::Zero(), theta, omega, p);
  CHECK((diff - d).isZero(1e-15));
}

TEST_CASE("injected constant torque is recovered within 2% + 0.01") {
  for (int joint : {0, 1, 3, 6}) {
    for (double mag : {0.5, -0.5, 2.0, -2.0}) {
      const double est = settled_rfob(joint, mag);
      const double tol = 0.02 * std::abs(mag) + 0.01;
      INFO("joint ", joint, " injected ", mag, " estimated ", est);
      CHECK(std::abs(est - mag) < tol);
    }
  }
}

TEST_CASE("sign flip of the injected torque flips the estimate") {
  const double up = settled_rfob(3, 0.5);
  const double dn = settled_rfob(3, -0.5);
  CHECK(up == doctest::Approx(-dn).epsilon(1e-6));
}

TEST_CASE("bounded input keeps estimates bounded") {
  const RobotParams p = follower_params();
  for (double g : {15.0, 20.0}) {
    JointVector cut = JointVector::Constant(g);
    ObserverBank bank(p, cut);
    Rng rng(11);
    JointVector theta = JointVector::Zero();
    bank.reset(theta);
    double worst = 0.0;
    for (int k = 0; k < 5000; ++k) {
      for (int j = 0; j < kNumJoints; ++j) theta[j] = rng.uniform(-1.0, 1.0);
      JointVector tau;
      for (int j = 0; j < kNumJoints; ++j) tau[j] = rng.uniform(-10.0, 10.0);
      const Estimates est = bank.update(theta, tau);
      worst = std::max(worst, est.tau_res.cwiseAbs().maxCoeff());
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 1e4);
  }
}

}  // TEST_SUITE
