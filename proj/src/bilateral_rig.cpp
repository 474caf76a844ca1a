#include "scoopsim/bilateral_rig.hpp"

#include <algorithm>
#include <cmath>

namespace scoopsim::rig {

Response24 pack_response(const JointVector& theta, const JointVector& omega,
                         const JointVector& tau) {
  Response24 r;
  r.segment<kNumJoints>(0) = theta;
  r.segment<kNumJoints>(kNumJoints) = omega;
  r.segment<kNumJoints>(2 * kNumJoints) = tau;
  return r;
}

void unpack_response(const Response24& r, JointVector& theta, JointVector& omega,
                     JointVector& tau) {
  theta = r.segment<kNumJoints>(0);
  omega = r.segment<kNumJoints>(kNumJoints);
  tau = r.segment<kNumJoints>(2 * kNumJoints);
}

annotation::TorqueTrace EpisodeLog::trace() const {
  annotation::TorqueTrace tr;
  tr.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    tr.push_back({t[i], follower[i][2 * kNumJoints + 1], follower[i][0]});
  }
  return tr;
}

namespace {

JointVector hand_torque(const JointVector& theta_cmd, const JointVector& omega_cmd,
                        const dynamics::RobotState& leader, const RigConfig& rig) {
  JointVector tau;
  for (int j = 0; j < kNumJoints; ++j) {
    const double raw = rig.leader.inertia[j] *
                       (rig.hand_kp * (theta_cmd[j] - leader.theta[j]) +
                        rig.hand_kd * (omega_cmd[j] - leader.omega[j]));
    tau[j] = std::clamp(raw, -rig.hand_torque_limit, rig.hand_torque_limit);
  }
  tau[kJointFixed] = 0.0;  // joint 3 is position-held, the hand leaves it alone
  return tau;
}

}  // namespace

TeacherRunResult run_teacher(const taskenv::ScriptedDemonstration& demo,
                             std::optional<taskenv::Scene> scene,
                             const RigConfig& rig, const taskenv::TaskConfig& task,
                             double settle_time) {
  const JointVector home = taskenv::ScriptedDemonstration::home_posture();
  dynamics::RobotState leader{home, JointVector::Zero(), 0.0};
  dynamics::RobotState follower = leader;

  observers::ObserverBank obs_l(rig.leader, rig.cutoffs, kControlDt,
                                rig.dob_subtracts_tau_res);
  observers::ObserverBank obs_f(rig.follower, rig.cutoffs, kControlDt,
                                rig.dob_subtracts_tau_res);
  obs_l.reset(home);
  obs_f.reset(home);

  // Applied torques: reference plus the DOB compensation (Fig.-2 inner loop);
  // the observers read back what actually drove the plant.
  JointVector u_l = JointVector::Zero();
  JointVector u_f = JointVector::Zero();
  JointVector theta_cmd, omega_cmd;

  const int n_steps =
      static_cast<int>(std::ceil((demo.duration() + settle_time) / kControlDt));

  TeacherRunResult out;
  out.log.t.reserve(n_steps);
  out.log.follower.reserve(n_steps);
  out.log.leader.reserve(n_steps);

  for (int k = 0; k < n_steps; ++k) {
    const double t = k * kControlDt;

    const observers::Estimates est_l = obs_l.update(leader.theta, u_l);
    const observers::Estimates est_f = obs_f.update(follower.theta, u_f);

    const control::RobotSignals sig_l{leader.theta, est_l.omega, est_l.tau_res};
    const control::RobotSignals sig_f{follower.theta, est_f.omega, est_f.tau_res};

    control::BilateralRefs refs =
        control::bilateral_refs(sig_l, sig_f, rig.gains, rig.leader);
    refs.leader[kJointFixed] =
        control::position_hold(rig.theta3_cmd, kJointFixed, sig_l, rig.gains, rig.leader);
    refs.follower[kJointFixed] =
        control::position_hold(rig.theta3_cmd, kJointFixed, sig_f, rig.gains, rig.follower);
    u_l = control::saturate(refs.leader + est_l.tau_dis);
    u_f = control::saturate(refs.follower + est_f.tau_dis);

    demo.sample(t, theta_cmd, omega_cmd);
    const JointVector hand = hand_torque(theta_cmd, omega_cmd, leader, rig);

    JointVector contact = JointVector::Zero();
    if (scene) {
      taskenv::SceneStep s = taskenv::scene_step(*scene, follower, task);
      *scene = s.scene;
      contact = s.contact_torque;
    }

    out.log.t.push_back(t);
    out.log.leader.push_back(pack_response(leader.theta, est_l.omega, est_l.tau_res));
    out.log.follower.push_back(pack_response(follower.theta, est_f.omega, est_f.tau_res));

    leader = dynamics::step(leader, u_l, -hand, rig.leader);
    follower = dynamics::step(follower, u_f, contact, rig.follower);
  }

  out.final_scene = scene.value_or(taskenv::Scene{});
  out.demonstrator_finished = true;
  return out;
}

AutonomousRunResult run_autonomous(const LeaderPredictor& predictor,
                                   taskenv::Scene scene, double timeout,
                                   const RigConfig& rig,
                                   const taskenv::TaskConfig& task,
                                   double settle_time) {
  const JointVector home = taskenv::ScriptedDemonstration::home_posture();
  dynamics::RobotState follower{home, JointVector::Zero(), 0.0};

  observers::ObserverBank obs_f(rig.follower, rig.cutoffs, kControlDt,
                                rig.dob_subtracts_tau_res);
  obs_f.reset(home);

  JointVector u_f = JointVector::Zero();
  // Until the first prediction arrives, the virtual leader mirrors the
  // follower at rest, which keeps all references at zero.
  Response24 virtual_leader = pack_response(home, JointVector::Zero(), JointVector::Zero());

  AutonomousRunResult out;
  const int max_steps = static_cast<int>(std::ceil(timeout / kControlDt));
  double done_since = -1.0;

  for (int k = 0; k < max_steps; ++k) {
    const double t = k * kControlDt;

    const observers::Estimates est_f = obs_f.update(follower.theta, u_f);
    const Response24 follower_resp =
        pack_response(follower.theta, est_f.omega, est_f.tau_res);

    if (k % kStepsPerInference == 0) {
      virtual_leader = predictor(follower_resp, t);
      if (!virtual_leader.allFinite()) {
        out.aborted_nonfinite = true;
        break;
      }
    }

    JointVector th_l, om_l, tau_l;
    unpack_response(virtual_leader, th_l, om_l, tau_l);
    const control::RobotSignals sig_l{th_l, om_l, tau_l};
    const control::RobotSignals sig_f{follower.theta, est_f.omega, est_f.tau_res};

    control::BilateralRefs refs =
        control::bilateral_refs(sig_l, sig_f, rig.gains, rig.follower);
    refs.follower[kJointFixed] =
        control::position_hold(rig.theta3_cmd, kJointFixed, sig_f, rig.gains, rig.follower);
    u_f = control::saturate(refs.follower + est_f.tau_dis);

    taskenv::SceneStep s = taskenv::scene_step(scene, follower, task);
    scene = s.scene;

    out.log.t.push_back(t);
    out.log.leader.push_back(virtual_leader);
    out.log.follower.push_back(follower_resp);

    follower = dynamics::step(follower, u_f, s.contact_torque, rig.follower);

    if (scene.phase == taskenv::Phase::done) {
      if (done_since < 0.0) done_since = t;
      if (t - done_since >= settle_time) break;
    }
  }

  out.timed_out = scene.phase != taskenv::Phase::done;
  out.final_scene = scene;
  return out;
}

WallPressResult run_wall_press(int joint, double wall_angle, double push_angle,
                               double wall_stiffness, double wall_damping,
                               double duration, const RigConfig& rig) {
  dynamics::RobotState leader;  // all joints at zero
  dynamics::RobotState follower;

  observers::ObserverBank obs_l(rig.leader, rig.cutoffs);
  observers::ObserverBank obs_f(rig.follower, rig.cutoffs);
  obs_l.reset(leader.theta);
  obs_f.reset(follower.theta);

  JointVector u_l = JointVector::Zero();
  JointVector u_f = JointVector::Zero();

  const int n_steps = static_cast<int>(duration / kControlDt);
  const int hold_from = static_cast<int>(0.75 * n_steps);
  double sum_abs_sum = 0.0, sum_abs_f = 0.0;
  int n_hold = 0;

  for (int k = 0; k < n_steps; ++k) {
    const double t = k * kControlDt;

    const observers::Estimates est_l = obs_l.update(leader.theta, u_l);
    const observers::Estimates est_f = obs_f.update(follower.theta, u_f);

    const control::RobotSignals sig_l{leader.theta, est_l.omega, est_l.tau_res};
    const control::RobotSignals sig_f{follower.theta, est_f.omega, est_f.tau_res};

    control::BilateralRefs refs =
        control::bilateral_refs(sig_l, sig_f, rig.gains, rig.leader);
    refs.leader[kJointFixed] =
        control::position_hold(rig.theta3_cmd, kJointFixed, sig_l, rig.gains, rig.leader);
    refs.follower[kJointFixed] =
        control::position_hold(rig.theta3_cmd, kJointFixed, sig_f, rig.gains, rig.follower);
    u_l = control::saturate(refs.leader + est_l.tau_dis);
    u_f = control::saturate(refs.follower + est_f.tau_dis);

    // Hand ramps the leader into the wall, then holds.
    const double ramp = std::min(1.0, t / (0.4 * duration));
    JointVector theta_cmd = JointVector::Zero();
    theta_cmd[kJointFixed] = rig.theta3_cmd;
    theta_cmd[joint] = ramp * push_angle;
    const JointVector hand =
        hand_torque(theta_cmd, JointVector::Zero(), leader, rig);

    JointVector wall = JointVector::Zero();
    if (follower.theta[joint] > wall_angle) {
      wall[joint] = wall_stiffness * (follower.theta[joint] - wall_angle) +
                    wall_damping * follower.omega[joint];
    }

    if (k >= hold_from) {
      sum_abs_sum += std::abs(est_l.tau_res[joint] + est_f.tau_res[joint]);
      sum_abs_f += std::abs(est_f.tau_res[joint]);
      ++n_hold;
    }

    leader = dynamics::step(leader, u_l, -hand, rig.leader);
    follower = dynamics::step(follower, u_f, wall, rig.follower);
  }

  WallPressResult out;
  out.steady_tau_sum = sum_abs_sum / std::max(1, n_hold);
  out.steady_tau_f = sum_abs_f / std::max(1, n_hold);
  return out;
}

}  // namespace scoopsim::rig
