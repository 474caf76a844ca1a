#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "scoopsim/cli_commands.hpp"

using namespace scoopsim;

int main(int argc, char** argv) {
  CLI::App app{"Bilateral-control imitation learning on a surrogate scoop-and-transport task"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string net_scale;
  app.add_option("--config", config_path, "JSON config overriding the defaults");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--net-scale", net_scale, "network preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));

  auto* collect = app.add_subcommand("collect", "record the teacher dataset");

  auto* train = app.add_subcommand("train", "train the model on a dataset");
  std::string dataset_dir = "out/dataset";
  train->add_option("--dataset", dataset_dir, "dataset directory");

  auto* rollout = app.add_subcommand("rollout", "run one autonomous trial");
  std::string checkpoint = "out/model/checkpoint.bin";
  int pos_id = 4;
  double time_cmd = 8.0;
  double mass = 0.030;
  int trial = 0;
  rollout->add_option("--checkpoint", checkpoint, "model checkpoint");
  rollout->add_option("--position", pos_id, "grid position id 0..8")
      ->check(CLI::Range(0, 8));
  rollout->add_option("--time", time_cmd, "time command [s]");
  rollout->add_option("--mass", mass, "object mass [kg]");
  rollout->add_option("--trial", trial, "trial index (seed stream)");

  auto* selfsup = app.add_subcommand("selfsup", "run self-supervised rounds");
  int rounds = -1;
  selfsup->add_option("--checkpoint", checkpoint, "starting checkpoint");
  selfsup->add_option("--dataset", dataset_dir, "teacher dataset directory");
  selfsup->add_option("--rounds", rounds, "number of rounds (default from config)");

  auto* eval = app.add_subcommand("eval", "evaluate the full grid");
  int eval_round = -1;
  eval->add_option("--checkpoint", checkpoint, "model checkpoint");
  eval->add_option("--round", eval_round, "seed stream round (default: checkpoint round)");

  auto* report = app.add_subcommand("report", "figure-data artifacts from an evaluation");
  std::string eval_dir = "out/eval";
  report->add_option("--checkpoint", checkpoint, "model checkpoint");
  report->add_option("--eval-dir", eval_dir, "directory with trials.csv");

  CLI11_PARSE(app, argc, argv);

  if (const char* threads = std::getenv("SCOOPSIM_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }

  config::RunConfig cfg;
  try {
    cfg = config_path.empty() ? config::default_run_config()
                              : config::load_run_config(config_path);
    if (!net_scale.empty()) {
      cfg.net_scale = net_scale;
      cfg.apply_net_scale();
    }
    if (seed_set) cfg.pipe.master_seed = seed;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfigError;
  }

  try {
    if (collect->parsed()) return cli::cmd_collect(cfg, out_dir);
    if (train->parsed()) return cli::cmd_train(cfg, dataset_dir, out_dir);
    if (rollout->parsed()) {
      return cli::cmd_rollout(cfg, checkpoint, pos_id, time_cmd, mass, trial, out_dir);
    }
    if (selfsup->parsed()) {
      const int n = rounds > 0 ? rounds : cfg.pipe.rounds;
      return cli::cmd_selfsup(cfg, checkpoint, dataset_dir, n, out_dir);
    }
    if (eval->parsed()) return cli::cmd_eval(cfg, checkpoint, eval_round, out_dir);
    if (report->parsed()) return cli::cmd_report(cfg, checkpoint, eval_dir, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitRuntimeFailure;
  }
  return cli::kExitOk;
}
