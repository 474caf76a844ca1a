#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "scoopsim/dynamics.hpp"
#include "scoopsim/image.hpp"
#include "scoopsim/types.hpp"

namespace scoopsim::taskenv {

// Physical and geometric constants of the surrogate task. Lengths in meters,
// angles in radians.
struct TaskConfig {
  // Joint-space to plate-pose map:
  //   x    = sweep_scale * th1 + snap_scale * sin(th6)
  //   y    = reach_offset + reach_scale * th2
  //   z    = wrist_length * sin(th7)
  //   tilt = tilt_ratio * th7
  double sweep_scale = 0.35;
  double snap_scale = 0.05;
  double reach_offset = 0.30;
  double reach_scale = 0.40;
  double wrist_length = 0.15;
  double tilt_ratio = 0.30;

  // World layout. The work surface spans x <= edge_x at z = 0; the tray sits
  // across a gap, at the same height.
  double edge_x = 0.12;
  double tray_center_x = 0.30;
  double tray_center_y = 0.30;
  double tray_half_x = 0.055;
  double tray_half_y = 0.055;

  // 3x3 command grid of object start positions.
  double grid_center_x = 0.0;
  double grid_center_y = 0.30;
  double grid_spacing = 0.05;

  double object_radius = 0.035;

  // Contact model.
  double surface_stiffness = 2000.0;  // [N/m]
  double surface_damping = 20.0;      // [N·s/m]
  double mu_surface = 0.35;           // object sliding on the work surface
  double mu_plate = 0.40;             // object held on the plate
  double gravity = 9.81;

  // Failure thresholds.
  double throw_omega = 2.5;  // [rad/s] on th7 during the lifting phase

  // Capture / pushing geometry.
  double capture_half_width = 0.045;
  double push_standoff = 0.02;
  double approach_window = 0.12;

  // Vertical gates.
  double z_contact = 0.006;     // plate counts as "at the surface" below this
  double z_lift_clear = 0.035;  // lifting ends above this
  double z_put = 0.004;         // putting releases the object below this

  // The object settles onto the plate over this long after the scoop; slip
  // checks engage afterwards.
  double scoop_grace = 0.25;  // [s]

  // Force-to-joint-torque moment arms. Vertical loads act at the blade
  // root, so the shoulder carries them and the wrist axis sees none by
  // default.
  double arm_sweep = 0.20;  // tangential force -> th1 torque
  double arm_reach = 0.22;  // vertical force   -> th2 torque
  double arm_wrist = 0.0;   // vertical force   -> th7 torque

  // Completion-time detection gate: th1 beyond this is the putting phase.
  double theta1_putting_gate = 0.62;

  // Tangential acceleration for the slip rule is a second difference over
  // this many control steps; the longer baseline keeps contact transients
  // from masquerading as trajectory acceleration.
  static constexpr int kSlipWindow = 10;

  // Top-down camera. Square pixels; px = (x - view_x0) * px_per_m.
  double view_x0 = -0.15;
  double view_y0 = 0.10;
  double px_per_m = 533.0 + 1.0 / 3.0;
  int workspace_px_w = 320;
  int workspace_px_h = 240;
  int tray_px = 96;           // tray crop is square
  double tray_crop_margin = 0.02;

  bool in_tray(double x, double y) const {
    // Exclusive boundary: a center exactly on the edge is out.
    return std::abs(x - tray_center_x) < tray_half_x &&
           std::abs(y - tray_center_y) < tray_half_y;
  }
  bool has_support(double x, double y) const {
    return x <= edge_x || in_tray(x, y);
  }
};

enum class Phase { reaching, sliding, lifting, transporting, putting, done };

const char* phase_name(Phase p);

struct PlatePose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double tilt = 0.0;
};

PlatePose plate_pose(const JointVector& theta, const TaskConfig& cfg);

struct Scene {
  double object_x = 0.0;
  double object_y = 0.0;
  double object_mass = 0.030;  // [kg]
  double mu = 0.40;            // effective plate-hold friction for this trial
  bool on_plate = false;
  bool slipped = false;
  bool thrown = false;
  bool transferred = false;
  bool lost = false;  // fell into the gap or flew away; not rendered
  Phase phase = Phase::reaching;
  double scoop_time = -1.0;

  PlatePose plate;
  // Plate-position history, newest first, for the windowed acceleration.
  static constexpr int kHistLen = 2 * TaskConfig::kSlipWindow;
  double hist_x[kHistLen] = {};
  double hist_y[kHistLen] = {};
  double prev_z = 0.0;
  int hist_count = 0;

  double t = 0.0;

  bool failed() const { return slipped || thrown; }
};

Scene make_scene(double object_x, double object_y, double mass, double mu,
                 const TaskConfig& cfg);

struct SceneStep {
  Scene scene;
  JointVector contact_torque = JointVector::Zero();  // load on the follower
};

// Advance the surrogate world by one control period given the follower's
// joint state. Returns the new scene and the contact torque loading the
// follower.
SceneStep scene_step(const Scene& scene, const dynamics::RobotState& follower,
                     const TaskConfig& cfg, double dt = kControlDt);

// Ground-truth judge: object strictly inside the tray, never slipped or
// thrown.
bool judge_success_geometric(const Scene& scene, const TaskConfig& cfg);

// Camera helpers (workspace view).
std::pair<double, double> world_to_px(double x, double y, const TaskConfig& cfg);
std::pair<double, double> px_to_world(double px, double py, const TaskConfig& cfg);

// Synthetic top-down renders. Colors are chosen so only the object falls in
// the 15 < h < 35.5, s > 100, v < 180 window.
img::Image render_topdown(const Scene& scene, int width, int height,
                          const TaskConfig& cfg);
img::Image render_workspace(const Scene& scene, const TaskConfig& cfg);
img::Image render_tray(const Scene& scene, const TaskConfig& cfg);

// ---------------------------------------------------------------------------
// Scripted demonstrator (stands in for the human operator).

struct TrialCommand {
  double position_x = 0.0;  // commanded object position [m]
  double position_y = 0.30;
  double time_cmd = 8.0;    // commanded task completion time [s]
  double mass = 0.030;      // [kg]
};

// Piecewise minimum-jerk joint trajectory through the task phases,
// time-scaled so the putting torque event lands at time_cmd. Construction
// validates the commanded speed against the slip/throw thresholds and throws
// std::invalid_argument if infeasible.
class ScriptedDemonstration {
 public:
  ScriptedDemonstration(const TrialCommand& cmd, const TaskConfig& cfg);

  // Joint position/velocity command at time t (clamped to the final pose).
  void sample(double t, JointVector& theta_cmd, JointVector& omega_cmd) const;

  double duration() const { return total_duration_; }
  static JointVector home_posture();

 private:
  struct Segment {
    double t0 = 0.0;
    double dt = 0.0;
    JointVector from = JointVector::Zero();
    JointVector to = JointVector::Zero();
  };
  std::vector<Segment> segments_;
  double total_duration_ = 0.0;

  void check_feasible(const TrialCommand& cmd, const TaskConfig& cfg) const;
};

}  // namespace scoopsim::taskenv
