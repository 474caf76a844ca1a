#include "scoopsim/taskenv.hpp"

#include <cmath>
#include <stdexcept>

namespace scoopsim::taskenv {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::reaching: return "reaching";
    case Phase::sliding: return "sliding";
    case Phase::lifting: return "lifting";
    case Phase::transporting: return "transporting";
    case Phase::putting: return "putting";
    case Phase::done: return "done";
  }
  return "?";
}

PlatePose plate_pose(const JointVector& theta, const TaskConfig& cfg) {
  PlatePose p;
  p.x = cfg.sweep_scale * theta[kJointSweep] +
        cfg.snap_scale * std::sin(theta[kJointWristYaw]);
  p.y = cfg.reach_offset + cfg.reach_scale * theta[kJointReach];
  p.z = cfg.wrist_length * std::sin(theta[kJointWristPitch]);
  p.tilt = cfg.tilt_ratio * theta[kJointWristPitch];
  return p;
}

Scene make_scene(double object_x, double object_y, double mass, double mu,
                 const TaskConfig& cfg) {
  (void)cfg;
  Scene s;
  s.object_x = object_x;
  s.object_y = object_y;
  s.object_mass = mass;
  s.mu = mu;
  return s;
}

SceneStep scene_step(const Scene& scene, const dynamics::RobotState& follower,
                     const TaskConfig& cfg, double dt) {
  SceneStep out;
  Scene& s = out.scene;
  s = scene;
  s.t += dt;

  const PlatePose pose = plate_pose(follower.theta, cfg);
  s.plate = pose;

  // Windowed second difference of the plate position.
  constexpr int W = TaskConfig::kSlipWindow;
  const double span = W * dt;
  double ax = 0.0, ay = 0.0;
  const bool hist_ready = scene.hist_count >= Scene::kHistLen;
  if (hist_ready) {
    ax = (pose.x - 2.0 * scene.hist_x[W - 1] + scene.hist_x[2 * W - 1]) / (span * span);
    ay = (pose.y - 2.0 * scene.hist_y[W - 1] + scene.hist_y[2 * W - 1]) / (span * span);
  }
  const double vz = scene.hist_count >= 1 ? (pose.z - scene.prev_z) / dt : 0.0;
  for (int i = Scene::kHistLen - 1; i > 0; --i) {
    s.hist_x[i] = scene.hist_x[i - 1];
    s.hist_y[i] = scene.hist_y[i - 1];
  }
  s.hist_x[0] = pose.x;
  s.hist_y[0] = pose.y;
  s.prev_z = pose.z;
  s.hist_count = std::min(scene.hist_count + 1, Scene::kHistLen);

  JointVector& tau = out.contact_torque;
  const double g = cfg.gravity;
  const double weight = s.object_mass * g;

  if (s.on_plate) {
    // Failure checks first, against the motion that carried the object here.
    // The scoop itself gets a short settling grace.
    if (hist_ready && s.t - s.scoop_time > cfg.scoop_grace) {
      const double hold = s.mu * g * std::cos(pose.tilt) - g * std::sin(pose.tilt);
      if (std::hypot(ax, ay) > hold) {
        s.on_plate = false;
        s.slipped = true;
        s.phase = Phase::done;
        s.object_x = pose.x;
        s.object_y = pose.y;
        if (!cfg.has_support(s.object_x, s.object_y)) s.lost = true;
      }
    }
    if (s.on_plate && s.phase == Phase::lifting &&
        follower.omega[kJointWristPitch] > cfg.throw_omega) {
      s.on_plate = false;
      s.thrown = true;
      s.lost = true;
      s.phase = Phase::done;
    }
  }

  if (s.on_plate) {
    s.object_x = pose.x;
    s.object_y = pose.y;
    tau[kJointReach] += weight * cfg.arm_reach;
    tau[kJointWristPitch] += weight * cfg.arm_wrist;
  }

  // Plate pressing into a supporting surface. Contact acts at the blade
  // root, so the wrist axis feels no normal moment; the shoulder carries the
  // press as a positive reaction torque.
  if (pose.z < 0.0 && cfg.has_support(pose.x, pose.y)) {
    const double normal =
        std::max(0.0, cfg.surface_stiffness * (-pose.z) + cfg.surface_damping * (-vz));
    tau[kJointReach] += normal * cfg.arm_reach;
  }

  // Pushing the object across the work surface.
  if (!s.on_plate && !s.transferred && !s.lost && !s.failed()) {
    const bool aligned = std::abs(pose.y - s.object_y) <= cfg.capture_half_width;
    const bool at_surface = pose.z <= cfg.z_contact;
    if (aligned && at_surface) {
      const double pushed_x = pose.x + cfg.push_standoff;
      if (pushed_x > s.object_x && pose.x <= s.object_x) {
        s.object_x = pushed_x;
        tau[kJointSweep] += cfg.mu_surface * weight * cfg.arm_sweep;
      }
    }
  }

  // Phase machine; phases only move forward.
  switch (s.phase) {
    case Phase::reaching: {
      const bool aligned = std::abs(pose.y - s.object_y) <= cfg.capture_half_width;
      const bool behind = pose.x >= s.object_x - cfg.approach_window &&
                          pose.x <= s.object_x - 0.5 * cfg.push_standoff;
      if (aligned && behind && pose.z <= cfg.z_contact) s.phase = Phase::sliding;
      break;
    }
    case Phase::sliding:
      if (s.object_x >= cfg.edge_x) {
        s.on_plate = true;
        s.object_x = pose.x;
        s.object_y = pose.y;
        s.scoop_time = s.t;
        s.phase = Phase::lifting;
      }
      break;
    case Phase::lifting:
      if (pose.z >= cfg.z_lift_clear) s.phase = Phase::transporting;
      break;
    case Phase::transporting:
      if (cfg.in_tray(pose.x, pose.y)) s.phase = Phase::putting;
      break;
    case Phase::putting:
      if (s.on_plate && pose.z <= cfg.z_put && cfg.in_tray(pose.x, pose.y)) {
        s.on_plate = false;
        s.transferred = true;
        s.object_x = pose.x;
        s.object_y = pose.y;
        s.phase = Phase::done;
      }
      break;
    case Phase::done:
      break;
  }

  return out;
}

bool judge_success_geometric(const Scene& scene, const TaskConfig& cfg) {
  if (scene.slipped || scene.thrown || scene.lost) return false;
  return cfg.in_tray(scene.object_x, scene.object_y);
}

std::pair<double, double> world_to_px(double x, double y, const TaskConfig& cfg) {
  return {(x - cfg.view_x0) * cfg.px_per_m - 0.5,
          (y - cfg.view_y0) * cfg.px_per_m - 0.5};
}

std::pair<double, double> px_to_world(double px, double py, const TaskConfig& cfg) {
  return {(px + 0.5) / cfg.px_per_m + cfg.view_x0,
          (py + 0.5) / cfg.px_per_m + cfg.view_y0};
}

namespace {

// Only the object color lands inside the detection window; background and
// tray are kept well outside it.
constexpr std::uint8_t kObjectColor[3] = {150, 125, 30};   // h=23.75, s=204, v=150
constexpr std::uint8_t kBackground[3] = {40, 40, 40};
constexpr std::uint8_t kWorkSurface[3] = {70, 70, 70};
constexpr std::uint8_t kTrayColor[3] = {60, 70, 90};

img::Image render_view(const Scene& scene, const TaskConfig& cfg, double x0,
                       double y0, int w, int h) {
  img::Image im = img::Image::filled(w, h, kBackground[0], kBackground[1], kBackground[2]);
  const double inv_s = 1.0 / cfg.px_per_m;
  const double r2 = cfg.object_radius * cfg.object_radius;
  for (int j = 0; j < h; ++j) {
    const double wy = (j + 0.5) * inv_s + y0;
    for (int i = 0; i < w; ++i) {
      const double wx = (i + 0.5) * inv_s + x0;
      const std::uint8_t* color = kBackground;
      if (wx <= cfg.edge_x) color = kWorkSurface;
      if (cfg.in_tray(wx, wy)) color = kTrayColor;
      if (!scene.lost) {
        const double dx = wx - scene.object_x;
        const double dy = wy - scene.object_y;
        if (dx * dx + dy * dy <= r2) color = kObjectColor;
      }
      im.set(i, j, color[0], color[1], color[2]);
    }
  }
  return im;
}

}  // namespace

img::Image render_topdown(const Scene& scene, int width, int height,
                          const TaskConfig& cfg) {
  return render_view(scene, cfg, cfg.view_x0, cfg.view_y0, width, height);
}

img::Image render_workspace(const Scene& scene, const TaskConfig& cfg) {
  return render_topdown(scene, cfg.workspace_px_w, cfg.workspace_px_h, cfg);
}

img::Image render_tray(const Scene& scene, const TaskConfig& cfg) {
  const double x0 = cfg.tray_center_x - cfg.tray_half_x - cfg.tray_crop_margin;
  const double y0 = cfg.tray_center_y - cfg.tray_half_y - cfg.tray_crop_margin;
  return render_view(scene, cfg, x0, y0, cfg.tray_px, cfg.tray_px);
}

// ---------------------------------------------------------------------------
// Scripted demonstrator.

namespace {

// Fixed posture joints.
constexpr double kTheta3Hold = 0.15;
constexpr double kTheta4Home = -0.15;
constexpr double kTheta5Home = 0.10;
constexpr double kGripperHome = -0.20;

constexpr double kHomeX = -0.16;
constexpr double kBehindOffset = 0.06;
constexpr double kSlidePastEdge = 0.005;

constexpr double kWristHover = 0.06;
constexpr double kWristSlide = 0.014;  // z = +2 mm, skimming without pressing
constexpr double kWristLift = 0.34;
constexpr double kWristCarry = 0.10;
constexpr double kWristPutA = -0.013;
constexpr double kWristPress = -0.045;
constexpr double kSnapAmplitude = 0.28;

// Segment fractions of the commanded time.
constexpr double kFracReach = 0.22;
constexpr double kFracDescend = 0.08;
constexpr double kFracSlide = 0.20;
constexpr double kFracLift = 0.12;
constexpr double kFracCarry = 0.23;
constexpr double kFracPut = 0.15;

// Unscaled tail after the commanded time.
constexpr double kPressDuration = 0.25;
constexpr double kRetreatDuration = 0.6;

double minjerk(double tau) {
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}
double minjerk_rate(double tau) {
  return tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau));
}

}  // namespace

JointVector ScriptedDemonstration::home_posture() {
  JointVector h = JointVector::Zero();
  TaskConfig cfg;
  h[kJointSweep] = kHomeX / cfg.sweep_scale;
  h[kJointReach] = 0.0;
  h[kJointFixed] = kTheta3Hold;
  h[kJointElbow] = kTheta4Home;
  h[4] = kTheta5Home;
  h[kJointWristYaw] = 0.0;
  h[kJointWristPitch] = kWristHover;
  h[kJointGripper] = kGripperHome;
  return h;
}

ScriptedDemonstration::ScriptedDemonstration(const TrialCommand& cmd,
                                             const TaskConfig& cfg) {
  const double T = cmd.time_cmd;
  if (!(T > 0.0)) throw std::invalid_argument("time command must be positive");

  auto joints = [&](double x_plate, double theta2, double theta6, double theta7) {
    JointVector v = home_posture();
    v[kJointSweep] = (x_plate - cfg.snap_scale * std::sin(theta6)) / cfg.sweep_scale;
    v[kJointReach] = theta2;
    v[kJointWristYaw] = theta6;
    v[kJointWristPitch] = theta7;
    return v;
  };

  const double theta2_obj = (cmd.position_y - cfg.reach_offset) / cfg.reach_scale;
  const double x_behind = cmd.position_x - kBehindOffset;
  const double x_slide_end = cfg.edge_x + kSlidePastEdge;
  const double x_tray = cfg.tray_center_x;

  const JointVector w_home = home_posture();
  const JointVector w_behind = joints(x_behind, theta2_obj, 0.0, kWristHover);
  const JointVector w_touch = joints(x_behind, theta2_obj, 0.0, kWristSlide);
  const JointVector w_slide = joints(x_slide_end, theta2_obj, 0.0, kWristSlide);
  const JointVector w_lift = joints(x_slide_end, theta2_obj, kSnapAmplitude, kWristLift);
  const JointVector w_carry = joints(x_tray, 0.0, -kSnapAmplitude, kWristCarry);
  const JointVector w_put = joints(x_tray, 0.0, -kSnapAmplitude, kWristPutA);
  const JointVector w_press = joints(x_tray, 0.0, -kSnapAmplitude, kWristPress);
  const JointVector w_retreat = joints(x_tray, 0.0, -kSnapAmplitude, kWristHover);

  auto add = [&](const JointVector& from, const JointVector& to, double dt) {
    Segment s;
    s.t0 = total_duration_;
    s.dt = dt;
    s.from = from;
    s.to = to;
    segments_.push_back(s);
    total_duration_ += dt;
  };

  add(w_home, w_behind, kFracReach * T);
  add(w_behind, w_touch, kFracDescend * T);
  add(w_touch, w_slide, kFracSlide * T);
  add(w_slide, w_lift, kFracLift * T);
  add(w_lift, w_carry, kFracCarry * T);
  add(w_carry, w_put, kFracPut * T);
  add(w_put, w_press, kPressDuration);
  add(w_press, w_retreat, kRetreatDuration);

  check_feasible(cmd, cfg);
}

void ScriptedDemonstration::sample(double t, JointVector& theta_cmd,
                                   JointVector& omega_cmd) const {
  if (t <= 0.0) {
    theta_cmd = segments_.front().from;
    omega_cmd.setZero();
    return;
  }
  if (t >= total_duration_) {
    theta_cmd = segments_.back().to;
    omega_cmd.setZero();
    return;
  }
  for (const Segment& s : segments_) {
    if (t < s.t0 + s.dt) {
      const double tau = (t - s.t0) / s.dt;
      const double a = minjerk(tau);
      const double r = minjerk_rate(tau) / s.dt;
      theta_cmd = s.from + a * (s.to - s.from);
      omega_cmd = r * (s.to - s.from);
      return;
    }
  }
  theta_cmd = segments_.back().to;
  omega_cmd.setZero();
}

void ScriptedDemonstration::check_feasible(const TrialCommand& cmd,
                                           const TaskConfig& cfg) const {
  // The object rides the plate from the end of the slide segment until the
  // putting release; within that window the scripted motion must respect the
  // slip and throw limits with margin for per-trial jitter.
  const double T = cmd.time_cmd;
  const double t_scoop = (kFracReach + kFracDescend + kFracSlide) * T;
  const double t_lift_end = t_scoop + kFracLift * T;
  const double t_release = (1.0 - 0.2 * kFracPut) * T;

  const double probe_dt = 0.005;
  JointVector th_a, th_b, th_c, om;
  for (double t = t_scoop; t <= t_release; t += probe_dt) {
    sample(t - probe_dt, th_a, om);
    sample(t, th_b, om);
    sample(t + probe_dt, th_c, om);
    const PlatePose pa = plate_pose(th_a, cfg);
    const PlatePose pb = plate_pose(th_b, cfg);
    const PlatePose pc = plate_pose(th_c, cfg);
    const double ax = (pc.x - 2.0 * pb.x + pa.x) / (probe_dt * probe_dt);
    const double ay = (pc.y - 2.0 * pb.y + pa.y) / (probe_dt * probe_dt);
    const double hold =
        cfg.mu_plate * cfg.gravity * std::cos(pb.tilt) - cfg.gravity * std::sin(pb.tilt);
    if (std::hypot(ax, ay) > 0.92 * hold) {
      throw std::invalid_argument("demonstrator infeasible: slip limit at commanded speed");
    }
    if (t <= t_lift_end && om[kJointWristPitch] > 0.92 * cfg.throw_omega) {
      throw std::invalid_argument("demonstrator infeasible: throw limit at commanded speed");
    }
  }
}

}  // namespace scoopsim::taskenv
