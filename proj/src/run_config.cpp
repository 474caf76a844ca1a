#include "scoopsim/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scoopsim::config {

using nlohmann::json;

void RunConfig::apply_net_scale() {
  if (net_scale == "desk") {
    pipe.model.hidden = 64;
    pipe.model.layers = 2;
  } else if (net_scale == "paper") {
    pipe.model.hidden = 200;
    pipe.model.layers = 8;
    pipe.train_base.batch_size = 100;
    pipe.train_steps = {8000, 23000, 25000};
  } else {
    throw std::invalid_argument("unknown net scale: " + net_scale);
  }
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.apply_net_scale();
  return cfg;
}

namespace {

json vec_to_json(const JointVector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

JointVector vec_from_json(const json& a) {
  if (!a.is_array() || a.size() != kNumJoints) {
    throw std::invalid_argument("expected an 8-element array");
  }
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = a[i].get<double>();
  return v;
}

json robot_to_json(const rig::RigConfig& r) {
  json j;
  j["inertia"] = vec_to_json(r.leader.inertia);
  j["friction"] = r.leader.friction;
  j["gravity_leader"] = {r.leader.grav1, r.leader.grav2, r.leader.grav3};
  j["gravity_follower"] = {r.follower.grav1, r.follower.grav2, r.follower.grav3};
  j["kp"] = vec_to_json(r.gains.kp);
  j["kd"] = vec_to_json(r.gains.kd);
  j["kf"] = vec_to_json(r.gains.kf);
  j["cutoffs"] = vec_to_json(r.cutoffs);
  j["theta3_cmd"] = r.theta3_cmd;
  j["hand_kp"] = r.hand_kp;
  j["hand_kd"] = r.hand_kd;
  j["hand_torque_limit"] = r.hand_torque_limit;
  j["dob_subtracts_tau_res"] = r.dob_subtracts_tau_res;
  return j;
}

void robot_from_json(const json& j, rig::RigConfig& r) {
  r.leader.inertia = vec_from_json(j.at("inertia"));
  r.follower.inertia = r.leader.inertia;
  const auto fr = j.at("friction").get<std::vector<double>>();
  if (fr.size() != 6) throw std::invalid_argument("friction needs 6 entries");
  std::copy(fr.begin(), fr.end(), r.leader.friction.begin());
  r.follower.friction = r.leader.friction;
  const auto gl = j.at("gravity_leader").get<std::vector<double>>();
  const auto gf = j.at("gravity_follower").get<std::vector<double>>();
  if (gl.size() != 3 || gf.size() != 3) {
    throw std::invalid_argument("gravity coefficients need 3 entries");
  }
  r.leader.grav1 = gl[0]; r.leader.grav2 = gl[1]; r.leader.grav3 = gl[2];
  r.follower.grav1 = gf[0]; r.follower.grav2 = gf[1]; r.follower.grav3 = gf[2];
  r.gains.kp = vec_from_json(j.at("kp"));
  r.gains.kd = vec_from_json(j.at("kd"));
  r.gains.kf = vec_from_json(j.at("kf"));
  r.cutoffs = vec_from_json(j.at("cutoffs"));
  r.theta3_cmd = j.at("theta3_cmd").get<double>();
  r.hand_kp = j.at("hand_kp").get<double>();
  r.hand_kd = j.at("hand_kd").get<double>();
  r.hand_torque_limit = j.at("hand_torque_limit").get<double>();
  r.dob_subtracts_tau_res = j.at("dob_subtracts_tau_res").get<bool>();
  r.leader.validate();
  r.follower.validate();
  r.gains.validate();
}

json task_to_json(const taskenv::TaskConfig& t) {
  json j;
  j["sweep_scale"] = t.sweep_scale;
  j["snap_scale"] = t.snap_scale;
  j["reach_offset"] = t.reach_offset;
  j["reach_scale"] = t.reach_scale;
  j["wrist_length"] = t.wrist_length;
  j["tilt_ratio"] = t.tilt_ratio;
  j["edge_x"] = t.edge_x;
  j["tray_center"] = {t.tray_center_x, t.tray_center_y};
  j["tray_half"] = {t.tray_half_x, t.tray_half_y};
  j["grid_center"] = {t.grid_center_x, t.grid_center_y};
  j["grid_spacing"] = t.grid_spacing;
  j["object_radius"] = t.object_radius;
  j["surface_stiffness"] = t.surface_stiffness;
  j["surface_damping"] = t.surface_damping;
  j["mu_surface"] = t.mu_surface;
  j["mu_plate"] = t.mu_plate;
  j["gravity"] = t.gravity;
  j["throw_omega"] = t.throw_omega;
  j["capture_half_width"] = t.capture_half_width;
  j["push_standoff"] = t.push_standoff;
  j["approach_window"] = t.approach_window;
  j["z_contact"] = t.z_contact;
  j["z_lift_clear"] = t.z_lift_clear;
  j["z_put"] = t.z_put;
  j["arm_sweep"] = t.arm_sweep;
  j["arm_reach"] = t.arm_reach;
  j["arm_wrist"] = t.arm_wrist;
  j["theta1_putting_gate"] = t.theta1_putting_gate;
  j["view_origin"] = {t.view_x0, t.view_y0};
  j["px_per_m"] = t.px_per_m;
  j["workspace_px"] = {t.workspace_px_w, t.workspace_px_h};
  j["tray_px"] = t.tray_px;
  j["tray_crop_margin"] = t.tray_crop_margin;
  return j;
}

void task_from_json(const json& j, taskenv::TaskConfig& t) {
  t.sweep_scale = j.at("sweep_scale").get<double>();
  t.snap_scale = j.at("snap_scale").get<double>();
  t.reach_offset = j.at("reach_offset").get<double>();
  t.reach_scale = j.at("reach_scale").get<double>();
  t.wrist_length = j.at("wrist_length").get<double>();
  t.tilt_ratio = j.at("tilt_ratio").get<double>();
  t.edge_x = j.at("edge_x").get<double>();
  t.tray_center_x = j.at("tray_center")[0].get<double>();
  t.tray_center_y = j.at("tray_center")[1].get<double>();
  t.tray_half_x = j.at("tray_half")[0].get<double>();
  t.tray_half_y = j.at("tray_half")[1].get<double>();
  t.grid_center_x = j.at("grid_center")[0].get<double>();
  t.grid_center_y = j.at("grid_center")[1].get<double>();
  t.grid_spacing = j.at("grid_spacing").get<double>();
  t.object_radius = j.at("object_radius").get<double>();
  t.surface_stiffness = j.at("surface_stiffness").get<double>();
  t.surface_damping = j.at("surface_damping").get<double>();
  t.mu_surface = j.at("mu_surface").get<double>();
  t.mu_plate = j.at("mu_plate").get<double>();
  t.gravity = j.at("gravity").get<double>();
  t.throw_omega = j.at("throw_omega").get<double>();
  t.capture_half_width = j.at("capture_half_width").get<double>();
  t.push_standoff = j.at("push_standoff").get<double>();
  t.approach_window = j.at("approach_window").get<double>();
  t.z_contact = j.at("z_contact").get<double>();
  t.z_lift_clear = j.at("z_lift_clear").get<double>();
  t.z_put = j.at("z_put").get<double>();
  t.arm_sweep = j.at("arm_sweep").get<double>();
  t.arm_reach = j.at("arm_reach").get<double>();
  t.arm_wrist = j.at("arm_wrist").get<double>();
  t.theta1_putting_gate = j.at("theta1_putting_gate").get<double>();
  t.view_x0 = j.at("view_origin")[0].get<double>();
  t.view_y0 = j.at("view_origin")[1].get<double>();
  t.px_per_m = j.at("px_per_m").get<double>();
  t.workspace_px_w = j.at("workspace_px")[0].get<int>();
  t.workspace_px_h = j.at("workspace_px")[1].get<int>();
  t.tray_px = j.at("tray_px").get<int>();
  t.tray_crop_margin = j.at("tray_crop_margin").get<double>();
}

}  // namespace

std::string to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.pipe.master_seed;
  j["net_scale"] = cfg.net_scale;
  j["robot"] = robot_to_json(cfg.pipe.rig);
  j["task"] = task_to_json(cfg.pipe.task);
  j["grid"] = {{"times", cfg.pipe.grid.times},
               {"masses", cfg.pipe.grid.masses},
               {"trials_per_cell", cfg.pipe.grid.trials_per_cell},
               {"teacher_positions", cfg.pipe.grid.teacher_positions},
               {"teacher_times", cfg.pipe.grid.teacher_times},
               {"teacher_trials", cfg.pipe.grid.teacher_trials}};
  j["model"] = {{"hidden", cfg.pipe.model.hidden}, {"layers", cfg.pipe.model.layers}};
  j["train"] = {{"batch_size", cfg.pipe.train_base.batch_size},
                {"steps", cfg.pipe.train_steps},
                {"eval_interval", cfg.pipe.train_base.eval_interval},
                {"lr", cfg.pipe.train_base.adam.lr},
                {"beta1", cfg.pipe.train_base.adam.beta1},
                {"beta2", cfg.pipe.train_base.adam.beta2},
                {"eps", cfg.pipe.train_base.adam.eps},
                {"feedback_max", cfg.pipe.train_base.feedback_max},
                {"feedback_ramp_steps", cfg.pipe.train_base.feedback_ramp_steps}};
  j["pipeline"] = {{"rounds", cfg.pipe.rounds},
                   {"round_caps", cfg.pipe.round_caps},
                   {"successes_per_cell", cfg.pipe.successes_per_cell},
                   {"retry_budget", cfg.pipe.retry_budget},
                   {"position_jitter", cfg.pipe.position_jitter},
                   {"mu_jitter", cfg.pipe.mu_jitter},
                   {"timeout_factor", cfg.pipe.timeout_factor}};
  return j.dump(2);
}

RunConfig from_json(const std::string& text) {
  const json patch = json::parse(text);
  RunConfig defaults;
  // net_scale presets apply before explicit overrides so a custom model
  // section always wins.
  if (patch.contains("net_scale")) {
    defaults.net_scale = patch.at("net_scale").get<std::string>();
    defaults.apply_net_scale();
  } else {
    defaults.apply_net_scale();
  }
  json base = json::parse(to_json(defaults));
  base.merge_patch(patch);

  RunConfig cfg;
  cfg.net_scale = base.at("net_scale").get<std::string>();
  cfg.pipe.master_seed = base.at("seed").get<std::uint64_t>();
  robot_from_json(base.at("robot"), cfg.pipe.rig);
  task_from_json(base.at("task"), cfg.pipe.task);
  const json& g = base.at("grid");
  cfg.pipe.grid.times = g.at("times").get<std::vector<double>>();
  cfg.pipe.grid.masses = g.at("masses").get<std::vector<double>>();
  cfg.pipe.grid.trials_per_cell = g.at("trials_per_cell").get<int>();
  cfg.pipe.grid.teacher_positions = g.at("teacher_positions").get<std::vector<int>>();
  cfg.pipe.grid.teacher_times = g.at("teacher_times").get<std::vector<double>>();
  cfg.pipe.grid.teacher_trials = g.at("teacher_trials").get<int>();
  cfg.pipe.model.hidden = base.at("model").at("hidden").get<int>();
  cfg.pipe.model.layers = base.at("model").at("layers").get<int>();
  const json& tr = base.at("train");
  cfg.pipe.train_base.batch_size = tr.at("batch_size").get<int>();
  cfg.pipe.train_steps = tr.at("steps").get<std::vector<int>>();
  cfg.pipe.train_base.eval_interval = tr.at("eval_interval").get<int>();
  cfg.pipe.train_base.adam.lr = tr.at("lr").get<double>();
  cfg.pipe.train_base.adam.beta1 = tr.at("beta1").get<double>();
  cfg.pipe.train_base.adam.beta2 = tr.at("beta2").get<double>();
  cfg.pipe.train_base.adam.eps = tr.at("eps").get<double>();
  cfg.pipe.train_base.feedback_max = tr.at("feedback_max").get<double>();
  cfg.pipe.train_base.feedback_ramp_steps = tr.at("feedback_ramp_steps").get<int>();
  const json& pl = base.at("pipeline");
  cfg.pipe.rounds = pl.at("rounds").get<int>();
  cfg.pipe.round_caps = pl.at("round_caps").get<std::vector<int>>();
  cfg.pipe.successes_per_cell = pl.at("successes_per_cell").get<int>();
  cfg.pipe.retry_budget = pl.at("retry_budget").get<int>();
  cfg.pipe.position_jitter = pl.at("position_jitter").get<double>();
  cfg.pipe.mu_jitter = pl.at("mu_jitter").get<double>();
  cfg.pipe.timeout_factor = pl.at("timeout_factor").get<double>();
  if (cfg.pipe.grid.times.empty() || cfg.pipe.grid.masses.empty()) {
    throw std::invalid_argument("grid must define times and masses");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

std::string config_digest(const RunConfig& cfg) {
  const std::string s = to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scoopsim::config
