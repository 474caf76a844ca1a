#include "scoopsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "json.hpp"

namespace scoopsim::pipeline {

using episode::EpisodeRecord;
using seqmodel::ExecutionPolicy;

namespace {
constexpr std::uint64_t kTagTeacher = 1;
constexpr std::uint64_t kTagEval = 2;
constexpr std::uint64_t kTagRetry = 3;
constexpr std::uint64_t kTagTrain = 4;
}  // namespace

const char* position_name(int pos_id) {
  static const char* names[kGridPositions] = {
      "lower_left", "lower", "lower_right", "left",       "center",
      "right",      "upper_left", "upper",  "upper_right"};
  return names[pos_id];
}

std::pair<double, double> grid_position(int pos_id, const taskenv::TaskConfig& task) {
  const int col = pos_id % 3;
  const int row = pos_id / 3;
  return {task.grid_center_x + (col - 1) * task.grid_spacing,
          task.grid_center_y + (row - 1) * task.grid_spacing};
}

int Dataset::train_base_count() const {
  int n = 0;
  for (const auto& ep : train) n += ep.offset == 0 ? 1 : 0;
  return n;
}

namespace {

struct TrialSetup {
  taskenv::Scene scene;
  taskenv::TrialCommand cmd;
  std::pair<double, double> measured_position;
};

// Place the object with per-trial jitter and read the position command back
// off the start image, the same way the autonomous loop generates its labels.
TrialSetup make_trial(int pos_id, double time_cmd, double mass, std::uint64_t seed,
                      const Config& cfg) {
  Rng rng(seed);
  const auto [nx, ny] = grid_position(pos_id, cfg.task);
  const double ox = nx + rng.uniform(-cfg.position_jitter, cfg.position_jitter);
  const double oy = ny + rng.uniform(-cfg.position_jitter, cfg.position_jitter);
  const double mu = cfg.task.mu_plate + rng.uniform(-cfg.mu_jitter, cfg.mu_jitter);

  TrialSetup s;
  s.scene = taskenv::make_scene(ox, oy, mass, mu, cfg.task);

  const img::Image start = taskenv::render_workspace(s.scene, cfg.task);
  const annotation::Mask mask = annotation::hsv_binarize(start);
  const auto c = annotation::centroid_px(mask);
  if (c) {
    s.measured_position = taskenv::px_to_world(c->first, c->second, cfg.task);
  } else {
    s.measured_position = {ox, oy};  // object out of frame; fall back to truth
  }
  s.cmd.position_x = s.measured_position.first;
  s.cmd.position_y = s.measured_position.second;
  s.cmd.time_cmd = time_cmd;
  s.cmd.mass = mass;
  return s;
}

bool image_success(const taskenv::Scene& final_scene, const taskenv::TaskConfig& task) {
  const img::Image tray = taskenv::render_tray(final_scene, task);
  return annotation::judge_success(annotation::hsv_binarize(tray));
}

void apply_labels(EpisodeRecord& ep, const taskenv::Scene& final_scene,
                  const TrialSetup& setup, bool success, const Config& cfg) {
  ep.labels.completion_time = annotation::detect_completion_time(
      ep.trace(), annotation::kTorqueThreshold, cfg.task.theta1_putting_gate);
  ep.labels.success = success;
  ep.labels.position_xy = setup.measured_position;
  (void)final_scene;
}

}  // namespace

Dataset collect_teacher_data(const Config& cfg) {
  Dataset ds;
  ds.round_index = 0;
  int combo = 0;
  for (int pos : cfg.grid.teacher_positions) {
    for (double t_cmd : cfg.grid.teacher_times) {
      for (double mass : cfg.grid.masses) {
        for (int trial = 0; trial < cfg.grid.teacher_trials; ++trial) {
          const std::uint64_t seed =
              derive_seed(cfg.master_seed, kTagTeacher, combo, trial);
          TrialSetup setup = make_trial(pos, t_cmd, mass, seed, cfg);
          taskenv::ScriptedDemonstration demo(setup.cmd, cfg.task);
          rig::TeacherRunResult run =
              rig::run_teacher(demo, setup.scene, cfg.rig, cfg.task);
          if (!run.final_scene.transferred) {
            throw std::runtime_error(
                std::string("teacher demonstration failed at position ") +
                position_name(pos) + ", phase " +
                taskenv::phase_name(run.final_scene.phase));
          }
          const bool success = image_success(run.final_scene, cfg.task);
          std::vector<EpisodeRecord> eps = episode::downsample_augment(run.log);
          for (EpisodeRecord& ep : eps) {
            ep.command = setup.cmd;
            ep.provenance = "human-demo";
            ep.seed = seed;
            ep.round_index = 0;
            apply_labels(ep, run.final_scene, setup, success, cfg);
          }
          if (trial == 0) {
            for (EpisodeRecord& ep : eps) ds.train.push_back(std::move(ep));
          } else {
            // Validation keeps the base decimation only.
            ds.validation.push_back(std::move(eps.front()));
          }
        }
        ++combo;
      }
    }
  }
  ds.stats = compute_norm_stats(ds.train, cfg);
  return ds;
}

seqmodel::NormStats compute_norm_stats(const std::vector<EpisodeRecord>& train,
                                       const Config& cfg) {
  seqmodel::NormStats st;
  st.min = Eigen::VectorXd::Constant(seqmodel::kInputDims,
                                     std::numeric_limits<double>::infinity());
  st.max = Eigen::VectorXd::Constant(seqmodel::kInputDims,
                                     -std::numeric_limits<double>::infinity());
  for (const EpisodeRecord& ep : train) {
    for (std::size_t i = 0; i < ep.length(); ++i) {
      for (int d = 0; d < seqmodel::kResponseDims; ++d) {
        const double lo = std::min(ep.follower_seq[i][d], ep.leader_seq[i][d]);
        const double hi = std::max(ep.follower_seq[i][d], ep.leader_seq[i][d]);
        st.min[d] = std::min(st.min[d], lo);
        st.max[d] = std::max(st.max[d], hi);
      }
    }
  }
  // Command dims are normalized over their command ranges, not the data.
  const auto& times = cfg.grid.times;
  st.min[seqmodel::kResponseDims] = *std::min_element(times.begin(), times.end());
  st.max[seqmodel::kResponseDims] = *std::max_element(times.begin(), times.end());
  const double margin = cfg.task.grid_spacing + 3.0 * cfg.position_jitter;
  st.min[seqmodel::kResponseDims + 1] = cfg.task.grid_center_x - margin;
  st.max[seqmodel::kResponseDims + 1] = cfg.task.grid_center_x + margin;
  st.min[seqmodel::kResponseDims + 2] = cfg.task.grid_center_y - margin;
  st.max[seqmodel::kResponseDims + 2] = cfg.task.grid_center_y + margin;
  return st;
}

RolloutResult rollout(const seqmodel::LstmModel& model, const seqmodel::NormStats& stats,
                      int pos_id, double time_cmd, double mass, std::uint64_t seed,
                      const Config& cfg) {
  TrialSetup setup = make_trial(pos_id, time_cmd, mass, seed, cfg);

  seqmodel::LstmModel::Memory mem = model.zero_memory();
  Eigen::VectorXd raw(seqmodel::kInputDims);
  rig::LeaderPredictor predictor = [&](const rig::Response24& follower,
                                       double) -> rig::Response24 {
    raw.head(seqmodel::kResponseDims) = follower;
    raw[seqmodel::kResponseDims] = setup.cmd.time_cmd;
    raw[seqmodel::kResponseDims + 1] = setup.cmd.position_x;
    raw[seqmodel::kResponseDims + 2] = setup.cmd.position_y;
    const Eigen::VectorXd y = model.step(stats.normalize(raw), mem);
    return stats.denormalize(y);
  };

  const double timeout = cfg.timeout_factor * time_cmd;
  rig::AutonomousRunResult run =
      rig::run_autonomous(predictor, setup.scene, timeout, cfg.rig, cfg.task);

  RolloutResult out;
  out.final_scene = run.final_scene;
  out.timed_out = run.timed_out;
  out.record = episode::downsample(run.log, 0);
  out.record.command = setup.cmd;
  out.record.provenance = "autonomous";
  out.record.seed = seed;
  out.success = !run.timed_out && !run.aborted_nonfinite &&
                image_success(run.final_scene, cfg.task);
  apply_labels(out.record, run.final_scene, setup, out.success, cfg);
  return out;
}

int Report::successes() const {
  int n = 0;
  for (const auto& t : trials) n += t.success ? 1 : 0;
  return n;
}

double Report::success_rate() const {
  return trials.empty() ? 0.0 : static_cast<double>(successes()) / total();
}

double Report::mean_abs_time_error() const {
  double s = 0.0;
  int n = 0;
  for (const auto& t : trials) {
    if (t.success && t.t_f) {
      s += std::abs(*t.t_f - t.time_cmd);
      ++n;
    }
  }
  return n > 0 ? s / n : 0.0;
}

double Report::mean_time_error() const {
  double s = 0.0;
  int n = 0;
  for (const auto& t : trials) {
    if (t.success && t.t_f) {
      s += *t.t_f - t.time_cmd;
      ++n;
    }
  }
  return n > 0 ? s / n : 0.0;
}

double Report::time_error_variance() const {
  const double mean = mean_time_error();
  double s = 0.0;
  int n = 0;
  for (const auto& t : trials) {
    if (t.success && t.t_f) {
      const double e = *t.t_f - t.time_cmd;
      s += (e - mean) * (e - mean);
      ++n;
    }
  }
  return n > 0 ? s / n : 0.0;
}

int Report::row_successes(int time_idx) const {
  int n = 0;
  for (const auto& t : trials) n += (t.time_idx == time_idx && t.success) ? 1 : 0;
  return n;
}
int Report::row_total(int time_idx) const {
  int n = 0;
  for (const auto& t : trials) n += t.time_idx == time_idx ? 1 : 0;
  return n;
}
int Report::col_successes(int pos_id) const {
  int n = 0;
  for (const auto& t : trials) n += (t.pos_id == pos_id && t.success) ? 1 : 0;
  return n;
}
int Report::col_total(int pos_id) const {
  int n = 0;
  for (const auto& t : trials) n += t.pos_id == pos_id ? 1 : 0;
  return n;
}

Report evaluate(const seqmodel::LstmModel& model, const seqmodel::NormStats& stats,
                int round, const Config& cfg,
                std::vector<EpisodeRecord>* keep_successes) {
  const int n_times = static_cast<int>(cfg.grid.times.size());
  const int n_masses = static_cast<int>(cfg.grid.masses.size());
  const int n_trials = cfg.grid.total_trials();

  Report report;
  report.trials.resize(n_trials);
  std::vector<std::unique_ptr<EpisodeRecord>> kept(keep_successes ? n_trials : 0);

  const bool par = cfg.policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (int i = 0; i < n_trials; ++i) {
    const int k = i % cfg.grid.trials_per_cell;
    const int cell = i / cfg.grid.trials_per_cell;
    const int mass_idx = cell % n_masses;
    const int time_idx = (cell / n_masses) % n_times;
    const int pos_id = cell / (n_masses * n_times);

    TrialOutcome& out = report.trials[i];
    out.pos_id = pos_id;
    out.time_idx = time_idx;
    out.mass_idx = mass_idx;
    out.trial_idx = k;
    out.time_cmd = cfg.grid.times[time_idx];
    out.mass = cfg.grid.masses[mass_idx];
    out.seed = derive_seed(cfg.master_seed, kTagEval,
                           static_cast<std::uint64_t>(round) * 1000000 + cell, k);

    RolloutResult r =
        rollout(model, stats, pos_id, out.time_cmd, out.mass, out.seed, cfg);
    out.success = r.success;
    out.t_f = r.record.labels.completion_time;
    if (keep_successes && r.success) {
      r.record.round_index = round + 1;
      kept[i] = std::make_unique<EpisodeRecord>(std::move(r.record));
    }
  }

  if (keep_successes) {
    for (auto& p : kept) {
      if (p) keep_successes->push_back(std::move(*p));
    }
  }
  return report;
}

RoundSummary self_supervised_round(seqmodel::LstmModel& model, Dataset& dataset,
                                   int round, const Config& cfg) {
  RoundSummary summary;

  // Evaluate the incoming model; the trial pool doubles as collected data.
  std::vector<EpisodeRecord> eval_successes;
  summary.pre_round_report =
      evaluate(model, dataset.stats, round - 1, cfg, &eval_successes);

  const int n_cells = cfg.grid.cells();
  const int n_times = static_cast<int>(cfg.grid.times.size());
  const int n_masses = static_cast<int>(cfg.grid.masses.size());

  // Group pool episodes by cell, in trial order.
  std::vector<std::vector<EpisodeRecord>> pool(n_cells);
  {
    std::size_t j = 0;
    for (int i = 0; i < summary.pre_round_report.total(); ++i) {
      const TrialOutcome& t = summary.pre_round_report.trials[i];
      if (!t.success) continue;
      const int cell = (t.pos_id * n_times + t.time_idx) * n_masses + t.mass_idx;
      pool[cell].push_back(std::move(eval_successes[j++]));
    }
  }

  // Top up every already-successful cell toward the quota.
  std::vector<int> needy;
  for (int c = 0; c < n_cells; ++c) {
    if (!pool[c].empty() &&
        static_cast<int>(pool[c].size()) < cfg.successes_per_cell) {
      needy.push_back(c);
    }
  }
  const bool par = cfg.policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::size_t ni = 0; ni < needy.size(); ++ni) {
    const int cell = needy[ni];
    const int mass_idx = cell % n_masses;
    const int time_idx = (cell / n_masses) % n_times;
    const int pos_id = cell / (n_masses * n_times);
    for (int retry = 0; retry < cfg.retry_budget &&
                        static_cast<int>(pool[cell].size()) < cfg.successes_per_cell;
         ++retry) {
      const std::uint64_t seed =
          derive_seed(cfg.master_seed, kTagRetry,
                      static_cast<std::uint64_t>(round) * 1000000 + cell, retry);
      RolloutResult r = rollout(model, dataset.stats, pos_id,
                                cfg.grid.times[time_idx], cfg.grid.masses[mass_idx],
                                seed, cfg);
      if (r.success) {
        r.record.round_index = round;
        pool[cell].push_back(std::move(r.record));
      }
    }
  }

  // Round-robin across cells up to the round cap.
  const int cap = round - 1 < static_cast<int>(cfg.round_caps.size())
                      ? cfg.round_caps[round - 1]
                      : cfg.round_caps.empty() ? cfg.grid.total_trials()
                                               : cfg.round_caps.back();
  std::vector<EpisodeRecord> selected;
  for (int pass = 0; pass < cfg.successes_per_cell; ++pass) {
    for (int c = 0; c < n_cells; ++c) {
      if (static_cast<int>(selected.size()) >= cap) break;
      if (pass < static_cast<int>(pool[c].size())) {
        selected.push_back(std::move(pool[c][pass]));
      }
    }
  }
  if (selected.empty()) {
    throw std::runtime_error("self-supervised round " + std::to_string(round) +
                             " aborted: no successful cells to learn from");
  }
  summary.collected = static_cast<int>(selected.size());

  // Relabel with the measured completion time and detected position, then
  // merge under the 2:1 split.
  int idx = 0;
  for (EpisodeRecord& ep : selected) {
    if (!ep.labels.completion_time || !ep.labels.position_xy) continue;
    ep.command.time_cmd = *ep.labels.completion_time;
    ep.command.position_x = ep.labels.position_xy->first;
    ep.command.position_y = ep.labels.position_xy->second;
    ep.round_index = round;
    if (idx % 3 == 2) {
      dataset.validation.push_back(std::move(ep));
      ++summary.added_validation;
    } else {
      dataset.train.push_back(std::move(ep));
      ++summary.added_train;
    }
    ++idx;
  }
  dataset.round_index = round;

  // Fine-tune from the current weights with frozen normalization.
  std::vector<seqmodel::Sample> train_samples, val_samples;
  train_samples.reserve(dataset.train.size());
  for (const auto& ep : dataset.train) {
    train_samples.push_back(seqmodel::prepare_sample(ep, dataset.stats));
  }
  val_samples.reserve(dataset.validation.size());
  for (const auto& ep : dataset.validation) {
    val_samples.push_back(seqmodel::prepare_sample(ep, dataset.stats));
  }
  seqmodel::TrainConfig tc = cfg.train_base;
  tc.max_steps = round < static_cast<int>(cfg.train_steps.size())
                     ? cfg.train_steps[round]
                     : cfg.train_steps.back();
  tc.seed = derive_seed(cfg.master_seed, kTagTrain, round);
  tc.policy = cfg.policy;
  summary.train_result = seqmodel::train(model, train_samples, val_samples, tc);
  return summary;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string pct_cell(int num, int den) {
  char buf[64];
  const double pct = den > 0 ? 100.0 * num / den : 0.0;
  std::snprintf(buf, sizeof(buf), "%.1f(%d/%d)", pct, num, den);
  return buf;
}

}  // namespace

std::string trials_csv(const Report& report, const Config& cfg) {
  (void)cfg;
  std::ostringstream os;
  os << "index,position,time_cmd,mass_kg,trial,success,t_f\n";
  for (int i = 0; i < report.total(); ++i) {
    const TrialOutcome& t = report.trials[i];
    os << i << ',' << position_name(t.pos_id) << ',' << fmt("%.2f", t.time_cmd) << ','
       << fmt("%.3f", t.mass) << ',' << t.trial_idx << ',' << (t.success ? 1 : 0)
       << ',';
    if (t.t_f) os << fmt("%.6f", *t.t_f);
    os << '\n';
  }
  return os.str();
}

std::string table_csv(const Report& report, const Config& cfg) {
  std::ostringstream os;
  os << "time_cmd";
  for (int p = 0; p < kGridPositions; ++p) os << ',' << position_name(p);
  os << ",speed_total\n";

  const int n_times = static_cast<int>(cfg.grid.times.size());
  for (int ti = 0; ti < n_times; ++ti) {
    os << fmt("%.2f", cfg.grid.times[ti]);
    for (int p = 0; p < kGridPositions; ++p) {
      int num = 0, den = 0;
      for (const auto& t : report.trials) {
        if (t.time_idx == ti && t.pos_id == p) {
          den += 1;
          num += t.success ? 1 : 0;
        }
      }
      os << ',' << pct_cell(num, den);
    }
    os << ',' << pct_cell(report.row_successes(ti), report.row_total(ti)) << '\n';
  }

  os << "position_total";
  for (int p = 0; p < kGridPositions; ++p) {
    os << ',' << pct_cell(report.col_successes(p), report.col_total(p));
  }
  os << ',' << pct_cell(report.successes(), report.total()) << '\n';
  return os.str();
}

std::string scatter_csv(const Report& report) {
  std::ostringstream os;
  os << "time_cmd,t_f\n";
  for (const auto& t : report.trials) {
    if (t.success && t.t_f) {
      os << fmt("%.2f", t.time_cmd) << ',' << fmt("%.6f", *t.t_f) << '\n';
    }
  }
  return os.str();
}

std::string summary_json(const Report& report, const Config& cfg) {
  nlohmann::json j;
  j["trials"] = report.total();
  j["successes"] = report.successes();
  j["success_rate"] = report.success_rate();
  j["time_error_mean_abs"] = report.mean_abs_time_error();
  j["time_error_mean"] = report.mean_time_error();
  j["time_error_variance"] = report.time_error_variance();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t ti = 0; ti < cfg.grid.times.size(); ++ti) {
    rows.push_back({{"time_cmd", cfg.grid.times[ti]},
                    {"successes", report.row_successes(static_cast<int>(ti))},
                    {"total", report.row_total(static_cast<int>(ti))}});
  }
  j["by_time"] = rows;
  nlohmann::json cols = nlohmann::json::array();
  for (int p = 0; p < kGridPositions; ++p) {
    cols.push_back({{"position", position_name(p)},
                    {"successes", report.col_successes(p)},
                    {"total", report.col_total(p)}});
  }
  j["by_position"] = cols;
  return j.dump(2);
}

}  // namespace scoopsim::pipeline
