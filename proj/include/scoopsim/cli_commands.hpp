#pragma once

#include <string>

#include "scoopsim/run_config.hpp"

namespace scoopsim::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitMissingArtifact = 3;
inline constexpr int kExitRuntimeFailure = 4;

int cmd_collect(const config::RunConfig& cfg, const std::string& out_dir);

int cmd_train(const config::RunConfig& cfg, const std::string& dataset_dir,
              const std::string& out_dir);

int cmd_rollout(const config::RunConfig& cfg, const std::string& checkpoint_path,
                int pos_id, double time_cmd, double mass, int trial,
                const std::string& out_dir);

int cmd_selfsup(const config::RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& dataset_dir, int rounds, const std::string& out_dir);

int cmd_eval(const config::RunConfig& cfg, const std::string& checkpoint_path,
             int round, const std::string& out_dir);

int cmd_report(const config::RunConfig& cfg, const std::string& checkpoint_path,
               const std::string& eval_dir, const std::string& out_dir);

// Dataset directory helpers shared with the tests.
void write_dataset(const pipeline::Dataset& ds, const config::RunConfig& cfg,
                   const std::string& dir);
pipeline::Dataset read_dataset(const std::string& dir, const config::RunConfig& cfg);

}  // namespace scoopsim::cli
