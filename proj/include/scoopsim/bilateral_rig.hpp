#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "scoopsim/annotation.hpp"
#include "scoopsim/control.hpp"
#include "scoopsim/dynamics.hpp"
#include "scoopsim/observers.hpp"
#include "scoopsim/taskenv.hpp"

namespace scoopsim::rig {

// 24-dim response of one robot: 8 angles, 8 velocities, 8 torques.
inline constexpr int kResponseDim = 3 * kNumJoints;
using Response24 = Eigen::Matrix<double, kResponseDim, 1>;

Response24 pack_response(const JointVector& theta, const JointVector& omega,
                         const JointVector& tau);
void unpack_response(const Response24& r, JointVector& theta, JointVector& omega,
                     JointVector& tau);

struct RigConfig {
  RobotParams leader = leader_params();
  RobotParams follower = follower_params();
  Gains gains = default_gains();
  JointVector cutoffs = default_cutoffs();
  double theta3_cmd = 0.15;
  // Operator-hand PD (normalized by joint inertia) dragging the leader
  // through the scripted trajectory.
  double hand_kp = 2500.0;
  double hand_kd = 100.0;
  double hand_torque_limit = 20.0;
  bool dob_subtracts_tau_res = false;
};

// 500 Hz log of one run.
struct EpisodeLog {
  std::vector<double> t;
  std::vector<Response24> follower;
  std::vector<Response24> leader;

  annotation::TorqueTrace trace() const;  // (t, follower tau2, follower theta1)
};

struct TeacherRunResult {
  EpisodeLog log;
  taskenv::Scene final_scene;
  bool demonstrator_finished = false;
};

// Full bilateral pair: scripted hand drives the leader, the follower tracks
// through the four-channel coupling and interacts with the scene. When
// `scene` is empty the follower moves freely (used by the synchronization
// checks).
TeacherRunResult run_teacher(const taskenv::ScriptedDemonstration& demo,
                             std::optional<taskenv::Scene> scene,
                             const RigConfig& rig, const taskenv::TaskConfig& task,
                             double settle_time = 0.2);

// Virtual-leader stream: called every inference period with the follower's
// current response and the time; returns the predicted leader response held
// for the next period.
using LeaderPredictor = std::function<Response24(const Response24&, double)>;

struct AutonomousRunResult {
  EpisodeLog log;
  taskenv::Scene final_scene;
  bool timed_out = false;
  bool aborted_nonfinite = false;
};

AutonomousRunResult run_autonomous(const LeaderPredictor& predictor,
                                   taskenv::Scene scene, double timeout,
                                   const RigConfig& rig,
                                   const taskenv::TaskConfig& task,
                                   double settle_time = 0.3);

// Follower pressed against a stiff joint-space wall while the hand holds the
// leader past it; used by the force-reflection checks.
struct WallPressResult {
  double steady_tau_sum = 0.0;  // |tau_l + tau_f| averaged over the hold
  double steady_tau_f = 0.0;    // |tau_f| averaged over the hold
};

WallPressResult run_wall_press(int joint, double wall_angle, double push_angle,
                               double wall_stiffness, double wall_damping,
                               double duration, const RigConfig& rig);

}  // namespace scoopsim::rig
