#include "scoopsim/observers.hpp"

#include "scoopsim/dynamics.hpp"

namespace scoopsim::observers {

PseudoDiff::PseudoDiff(double cutoff, double dt) : g_(cutoff) {
  const double a = 2.0 / dt;
  c_prev_ = (a - g_) / (a + g_);
  c_diff_ = g_ * a / (a + g_);
}

double PseudoDiff::update(double sample) {
  if (!primed_) {
    x_prev_ = sample;
    primed_ = true;
  }
  y_ = c_prev_ * y_ + c_diff_ * (sample - x_prev_);
  x_prev_ = sample;
  return y_;
}

void PseudoDiff::reset(double initial_sample) {
  y_ = 0.0;
  x_prev_ = initial_sample;
  primed_ = true;
}

LowPass::LowPass(double cutoff, double dt) {
  const double a = 2.0 / dt;
  c_prev_ = (a - cutoff) / (a + cutoff);
  c_in_ = cutoff / (a + cutoff);
}

double LowPass::update(double sample) {
  if (!primed_) {
    x_prev_ = sample;
    y_ = sample;  // start at DC to avoid a synthetic transient
    primed_ = true;
  }
  y_ = c_prev_ * y_ + c_in_ * (sample + x_prev_);
  x_prev_ = sample;
  return y_;
}

void LowPass::reset(double value) {
  y_ = value;
  x_prev_ = value;
  primed_ = true;
}

JointVector rfob(const JointVector& tau_dis, const JointVector& theta,
                 const JointVector& omega, const RobotParams& params) {
  return tau_dis - dynamics::friction_torque(omega, params) +
         dynamics::gravity_torque(theta, params);
}

ObserverBank::ObserverBank(const RobotParams& params, const JointVector& cutoffs,
                           double dt, bool dob_subtracts_tau_res)
    : params_(params),
      cutoffs_(cutoffs),
      dob_subtracts_tau_res_(dob_subtracts_tau_res) {
  for (int j = 0; j < kNumJoints; ++j) {
    vel_[j] = PseudoDiff(cutoffs[j], dt);
    dob_[j] = LowPass(cutoffs[j], dt);
  }
}

Estimates ObserverBank::update(const JointVector& theta,
                               const JointVector& tau_ref_applied) {
  Estimates est;
  for (int j = 0; j < kNumJoints; ++j) {
    const double w = vel_[j].update(theta[j]);
    est.omega[j] = w;
    const double gjw = cutoffs_[j] * params_.inertia[j] * w;
    double input = tau_ref_applied[j] + gjw;
    if (dob_subtracts_tau_res_) input -= tau_res_prev_[j];
    est.tau_dis[j] = dob_[j].update(input) - gjw;
  }
  est.tau_res = rfob(est.tau_dis, theta, est.omega, params_);
  tau_res_prev_ = est.tau_res;
  return est;
}

void ObserverBank::reset(const JointVector& theta) {
  for (int j = 0; j < kNumJoints; ++j) {
    vel_[j].reset(theta[j]);
    dob_[j].reset(0.0);
  }
  tau_res_prev_.setZero();
}

}  // namespace scoopsim::observers
