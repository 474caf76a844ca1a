#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scoopsim/bilateral_rig.hpp"
#include "scoopsim/episode.hpp"
#include "scoopsim/seqmodel.hpp"
#include "scoopsim/taskenv.hpp"

namespace scoopsim::pipeline {

// 3x3 grid cell ids, row-major from lower-left; the teacher set uses the four
// corners.
inline constexpr int kGridPositions = 9;
const char* position_name(int pos_id);

struct GridConfig {
  std::vector<double> times = {3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  std::vector<double> masses = {0.030, 0.090};
  int trials_per_cell = 3;

  std::vector<int> teacher_positions = {0, 2, 6, 8};
  std::vector<double> teacher_times = {4.0, 8.0, 12.0};
  int teacher_trials = 2;

  int cells() const {
    return kGridPositions * static_cast<int>(times.size()) *
           static_cast<int>(masses.size());
  }
  int total_trials() const { return cells() * trials_per_cell; }
};

struct Config {
  rig::RigConfig rig;
  taskenv::TaskConfig task;
  GridConfig grid;
  seqmodel::ModelConfig model;

  std::uint64_t master_seed = 1;
  double position_jitter = 0.004;  // [m]
  double mu_jitter = 0.02;

  // Trial-level failure handling.
  double timeout_factor = 1.5;

  // Self-supervised rounds.
  int rounds = 2;
  std::vector<int> round_caps = {300, 540};
  int successes_per_cell = 3;
  int retry_budget = 10;

  // Training schedule: steps for the initial model and each fine-tune round.
  std::vector<int> train_steps = {600, 500, 500};
  seqmodel::TrainConfig train_base;

  seqmodel::ExecutionPolicy policy = seqmodel::ExecutionPolicy::parallel;
};

// Object start position of a grid cell, before jitter.
std::pair<double, double> grid_position(int pos_id, const taskenv::TaskConfig& task);

struct Dataset {
  std::vector<episode::EpisodeRecord> train;
  std::vector<episode::EpisodeRecord> validation;
  seqmodel::NormStats stats;
  int round_index = 0;

  int train_base_count() const;  // offset-0 episodes only
};

// 48 teacher demonstrations through the full bilateral pair, split 24/24 by
// trial repetition, training episodes augmented by the ten-offset decimation.
Dataset collect_teacher_data(const Config& cfg);

// Command ranges pinned into the stats' command dims.
seqmodel::NormStats compute_norm_stats(const std::vector<episode::EpisodeRecord>& train,
                                       const Config& cfg);

struct RolloutResult {
  episode::EpisodeRecord record;
  taskenv::Scene final_scene;
  bool success = false;
  bool timed_out = false;
};

// One autonomous trial: virtual leader from the model, follower in the
// surrogate scene, labels from the annotation pipeline.
RolloutResult rollout(const seqmodel::LstmModel& model, const seqmodel::NormStats& stats,
                      int pos_id, double time_cmd, double mass, std::uint64_t seed,
                      const Config& cfg);

struct TrialOutcome {
  int pos_id = 0;
  int time_idx = 0;
  int mass_idx = 0;
  int trial_idx = 0;
  double time_cmd = 0.0;
  double mass = 0.0;
  bool success = false;
  std::optional<double> t_f;
  std::uint64_t seed = 0;
};

struct Report {
  std::vector<TrialOutcome> trials;  // fixed enumeration order

  int total() const { return static_cast<int>(trials.size()); }
  int successes() const;
  double success_rate() const;
  // Over successful trials only.
  double mean_abs_time_error() const;
  double mean_time_error() const;
  double time_error_variance() const;

  int row_successes(int time_idx) const;
  int row_total(int time_idx) const;
  int col_successes(int pos_id) const;
  int col_total(int pos_id) const;
};

// Full evaluation grid; trials run independently with per-trial seeds and are
// stored by index, so the report does not depend on scheduling. When
// `keep_successes` is set the successful episodes are returned for dataset
// aggregation.
Report evaluate(const seqmodel::LstmModel& model, const seqmodel::NormStats& stats,
                int round, const Config& cfg,
                std::vector<episode::EpisodeRecord>* keep_successes = nullptr);

struct RoundSummary {
  Report pre_round_report;      // evaluation of the incoming model
  int collected = 0;            // autonomous episodes merged this round
  int added_train = 0;
  int added_validation = 0;
  seqmodel::TrainResult train_result;
};

// One self-supervised round: evaluate, top up successful cells to the
// per-cell quota under the round cap, relabel with measured time and
// position, merge, fine-tune in place. Throws if no cell succeeded.
RoundSummary self_supervised_round(seqmodel::LstmModel& model, Dataset& dataset,
                                   int round, const Config& cfg);

// Report serialization.
std::string trials_csv(const Report& report, const Config& cfg);
std::string table_csv(const Report& report, const Config& cfg);
std::string scatter_csv(const Report& report);  // successes only: command vs measured
std::string summary_json(const Report& report, const Config& cfg);

}  // namespace scoopsim::pipeline
