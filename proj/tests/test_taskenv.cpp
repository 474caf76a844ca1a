#include <cmath>

#include "doctest.h"
#include "scoopsim/annotation.hpp"
#include "scoopsim/taskenv.hpp"

using namespace scoopsim;
using namespace scoopsim::taskenv;

namespace {

// Scene carrying an object on the plate with an injected x-acceleration
// history, so the slip rule sees exactly `accel` on the next step.
Scene carried_scene(double accel, double dt, const TaskConfig& cfg) {
  Scene s = make_scene(0.2, 0.3, 0.030, cfg.mu_plate, cfg);
  s.on_plate = true;
  s.phase = Phase::transporting;
  // Constant-acceleration history ending at x = 0.2 with zero velocity, so
  // the windowed second difference evaluates to exactly `accel`.
  for (int k = 1; k <= Scene::kHistLen; ++k) {
    s.hist_x[k - 1] = 0.2 + accel * (k * dt) * (k * dt) / 2.0;
    s.hist_y[k - 1] = 0.3;
  }
  s.prev_z = 0.05;
  s.hist_count = Scene::kHistLen;
  return s;
}

dynamics::RobotState state_for_pose(double x, double y, double th7,
                                    const TaskConfig& cfg) {
  dynamics::RobotState st;
  st.theta[kJointWristPitch] = th7;
  st.theta[kJointReach] = (y - cfg.reach_offset) / cfg.reach_scale;
  st.theta[kJointSweep] = (x - 0.0) / cfg.sweep_scale;
  return st;
}

}  // namespace

TEST_SUITE("taskenv") {

TEST_CASE("slip threshold arithmetic") {
  // mu = 0.4, tilt = 0.3: hold = 0.4*9.81*cos(0.3) - 9.81*sin(0.3)
  const double hold = 0.4 * 9.81 * std::cos(0.3) - 9.81 * std::sin(0.3);
  CHECK(hold == doctest::Approx(0.849).epsilon(1e-3));
}

TEST_CASE("stationary carried object stays and loads the reach joint") {
  TaskConfig cfg;
  Scene s = carried_scene(0.0, kControlDt, cfg);
  dynamics::RobotState st = state_for_pose(0.2, 0.3, 0.34, cfg);
  const SceneStep out = scene_step(s, st, cfg);
  CHECK(!out.scene.slipped);
  CHECK(out.scene.on_plate);
  const double weight = 0.030 * cfg.gravity;
  CHECK(out.contact_torque[kJointReach] ==
        doctest::Approx(weight * cfg.arm_reach).epsilon(1e-12));
  CHECK(out.contact_torque[kJointWristPitch] ==
        doctest::Approx(weight * cfg.arm_wrist).epsilon(1e-12));
  CHECK(out.contact_torque[kJointSweep] == 0.0);
}

TEST_CASE("acceleration just past the flat-plate limit slips in one step") {
  TaskConfig cfg;
  const double mu = cfg.mu_plate;
  // Flat plate: theta7 = 0 -> tilt 0.
  const double limit = mu * cfg.gravity;

  Scene below = carried_scene(0.99 * limit, kControlDt, cfg);
  dynamics::RobotState st = state_for_pose(0.2, 0.3, 0.0, cfg);
  CHECK(!scene_step(below, st, cfg).scene.slipped);

  Scene above = carried_scene(1.01 * limit, kControlDt, cfg);
  CHECK(scene_step(above, st, cfg).scene.slipped);
}

TEST_CASE("tilt lowers the slip threshold") {
  TaskConfig cfg;
  const double tilt = 0.3;
  const double th7 = tilt / cfg.tilt_ratio;
  const double limit = cfg.mu_plate * cfg.gravity * std::cos(tilt) -
                       cfg.gravity * std::sin(tilt);
  dynamics::RobotState st = state_for_pose(0.2, 0.3, th7, cfg);

  Scene below = carried_scene(0.98 * limit, kControlDt, cfg);
  CHECK(!scene_step(below, st, cfg).scene.slipped);
  Scene above = carried_scene(1.02 * limit, kControlDt, cfg);
  CHECK(scene_step(above, st, cfg).scene.slipped);
}

TEST_CASE("contact torque is zero with the object at rest off the plate") {
  TaskConfig cfg;
  Scene s = make_scene(0.0, 0.3, 0.030, cfg.mu_plate, cfg);
  // Plate hovering far away.
  dynamics::RobotState st = state_for_pose(-0.15, 0.3, 0.3, cfg);
  const SceneStep out = scene_step(s, st, cfg);
  CHECK(out.contact_torque.isZero(0.0));
}

TEST_CASE("geometric judge: center in, boundary out, flags out") {
  TaskConfig cfg;
  Scene s = make_scene(cfg.tray_center_x, cfg.tray_center_y, 0.030, 0.4, cfg);
  CHECK(judge_success_geometric(s, cfg));

  // 1 mm outside the tray edge.
  Scene out_x = make_scene(cfg.tray_center_x + cfg.tray_half_x + 0.001,
                           cfg.tray_center_y, 0.030, 0.4, cfg);
  CHECK(!judge_success_geometric(out_x, cfg));

  // Exactly on the boundary: exclusive. Exact binary values so the
  // comparison is not blurred by rounding.
  TaskConfig exact = cfg;
  exact.tray_center_x = 0.25;
  exact.tray_half_x = 0.0625;
  Scene edge = make_scene(0.25 + 0.0625, exact.tray_center_y, 0.030, 0.4, exact);
  CHECK(!judge_success_geometric(edge, exact));

  Scene thrown = s;
  thrown.thrown = true;
  CHECK(!judge_success_geometric(thrown, cfg));
  Scene slipped = s;
  slipped.slipped = true;
  CHECK(!judge_success_geometric(slipped, cfg));
}

TEST_CASE("render: no object, no window pixels") {
  TaskConfig cfg;
  Scene s = make_scene(0.0, 0.3, 0.030, 0.4, cfg);
  s.lost = true;
  const img::Image im = render_workspace(s, cfg);
  CHECK(annotation::hsv_binarize(im).count() == 0);
}

TEST_CASE("render: disc area matches direct enumeration") {
  TaskConfig cfg;
  Scene s = make_scene(0.0, 0.3, 0.030, 0.4, cfg);
  const img::Image im = render_workspace(s, cfg);
  const annotation::Mask m = annotation::hsv_binarize(im);

  // Independent oracle: count pixel centers inside the disc.
  int expected = 0;
  for (int j = 0; j < im.height; ++j) {
    for (int i = 0; i < im.width; ++i) {
      const auto [wx, wy] = px_to_world(i, j, cfg);
      const double dx = wx - 0.0, dy = wy - 0.3;
      if (dx * dx + dy * dy <= cfg.object_radius * cfg.object_radius) ++expected;
    }
  }
  CHECK(m.count() == expected);
  CHECK(m.count() >= 500);
  const double ideal = M_PI * std::pow(cfg.object_radius * cfg.px_per_m, 2);
  CHECK(std::abs(m.count() - ideal) / ideal < 0.03);
}

TEST_CASE("centroid maps back through the camera transform") {
  TaskConfig cfg;
  const double ox = 0.037, oy = 0.281;
  Scene s = make_scene(ox, oy, 0.030, 0.4, cfg);
  const img::Image im = render_workspace(s, cfg);
  const auto c = annotation::centroid_px(annotation::hsv_binarize(im));
  REQUIRE(c.has_value());
  const auto [wx, wy] = px_to_world(c->first, c->second, cfg);
  CHECK(std::abs(wx - ox) < 0.0015);
  CHECK(std::abs(wy - oy) < 0.0015);
}

TEST_CASE("camera transform round trip is exact") {
  TaskConfig cfg;
  const auto [px, py] = world_to_px(0.123, 0.456, cfg);
  const auto [wx, wy] = px_to_world(px, py, cfg);
  CHECK(wx == doctest::Approx(0.123).epsilon(1e-12));
  CHECK(wy == doctest::Approx(0.456).epsilon(1e-12));
}

TEST_CASE("demonstrator is deterministic and parameterized by position") {
  TaskConfig cfg;
  TrialCommand ul{-0.05, 0.35, 8.0, 0.030};
  TrialCommand lr{0.05, 0.25, 8.0, 0.030};
  ScriptedDemonstration a(ul, cfg), a2(ul, cfg), b(lr, cfg);
  JointVector ta, ta2, tb, wa, wa2, wb;
  // End of the reaching segment.
  const double t = 0.22 * 8.0;
  a.sample(t, ta, wa);
  a2.sample(t, ta2, wa2);
  b.sample(t, tb, wb);
  CHECK(ta == ta2);
  CHECK(wa == wa2);
  CHECK(ta[kJointSweep] != tb[kJointSweep]);
  CHECK(ta[kJointReach] != tb[kJointReach]);
  for (int j = 0; j < kNumJoints; ++j) {
    if (j == kJointSweep || j == kJointReach) continue;
    CHECK(ta[j] == tb[j]);
  }
}

TEST_CASE("demonstrator rejects infeasible speeds") {
  TaskConfig cfg;
  TrialCommand too_fast{0.0, 0.30, 0.6, 0.030};
  CHECK_THROWS_AS(ScriptedDemonstration(too_fast, cfg), std::invalid_argument);
}

TEST_CASE("open-loop demonstrator replay walks the phases in order") {
  TaskConfig cfg;
  TrialCommand cmd{0.0, 0.30, 8.0, 0.030};
  ScriptedDemonstration demo(cmd, cfg);
  Scene s = make_scene(cmd.position_x, cmd.position_y, cmd.mass, cfg.mu_plate, cfg);
  dynamics::RobotState st;
  JointVector om;
  int last_phase = 0;
  for (double t = 0.0; t < demo.duration(); t += kControlDt) {
    demo.sample(t, st.theta, om);
    st.omega = om;
    const SceneStep out = scene_step(s, st, cfg);
    s = out.scene;
    const int ph = static_cast<int>(s.phase);
    CHECK(ph >= last_phase);
    last_phase = ph;
  }
  CHECK(s.phase == Phase::done);
  CHECK(s.transferred);
  CHECK(!s.slipped);
  CHECK(!s.thrown);
  CHECK(judge_success_geometric(s, cfg));
}

TEST_CASE("slip outcome is monotone in trajectory duration") {
  TaskConfig cfg;
  // Fixed shape: min-jerk sweep of the carried object by 0.25 m, duration T.
  auto slipped_at = [&](double T) {
    Scene s = make_scene(0.1, 0.3, 0.030, cfg.mu_plate, cfg);
    s.on_plate = true;
    s.phase = Phase::transporting;
    dynamics::RobotState st;
    bool slipped = false;
    for (double t = 0.0; t < T; t += kControlDt) {
      const double tau = t / T;
      const double a = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
      st.theta[kJointSweep] = (0.1 + 0.25 * a) / cfg.sweep_scale;
      st.theta[kJointReach] = 0.0;
      st.theta[kJointWristPitch] = 0.2;
      const SceneStep out = scene_step(s, st, cfg);
      s = out.scene;
      slipped = slipped || s.slipped;
    }
    return slipped;
  };
  bool prev = slipped_at(2.0);
  CHECK(!prev);  // slow enough to hold
  bool seen_slip = false;
  for (double T : {1.2, 0.9, 0.7, 0.5, 0.35}) {
    const bool now = slipped_at(T);
    // Once slipping starts, every faster run slips too.
    if (seen_slip) CHECK(now);
    seen_slip = seen_slip || now;
  }
  CHECK(seen_slip);
}

TEST_CASE("judge consistency: geometric success implies the pixel test") {
  TaskConfig cfg;
  Scene s = make_scene(cfg.tray_center_x - 0.01, cfg.tray_center_y + 0.012, 0.030,
                       0.4, cfg);
  REQUIRE(judge_success_geometric(s, cfg));
  const img::Image tray = render_tray(s, cfg);
  CHECK(annotation::judge_success(annotation::hsv_binarize(tray)));
}

}  // TEST_SUITE
