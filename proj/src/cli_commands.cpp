#include "scoopsim/cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace scoopsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("short write " + path.string());
}

void write_config_echo(const config::RunConfig& cfg, const fs::path& dir) {
  write_text(dir / "config.json", config::to_json(cfg));
}

void write_report_files(const pipeline::Report& report, const config::RunConfig& cfg,
                        const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "trials.csv", pipeline::trials_csv(report, cfg.pipe));
  write_text(dir / "table.csv", pipeline::table_csv(report, cfg.pipe));
  write_text(dir / "scatter.csv", pipeline::scatter_csv(report));
  write_text(dir / "summary.json", pipeline::summary_json(report, cfg.pipe));
}

json episode_meta(const episode::EpisodeRecord& ep, const std::string& file,
                  const std::string& split) {
  json e;
  e["file"] = file;
  e["split"] = split;
  e["provenance"] = ep.provenance;
  e["offset"] = ep.offset;
  e["round"] = ep.round_index;
  e["command"] = {{"time_s", ep.command.time_cmd},
                  {"x", ep.command.position_x},
                  {"y", ep.command.position_y},
                  {"mass_kg", ep.command.mass}};
  e["success"] = ep.labels.success;
  if (ep.labels.completion_time) e["t_f"] = *ep.labels.completion_time;
  return e;
}

std::string loss_csv(const seqmodel::TrainResult& res) {
  std::ostringstream os;
  os << "step,train_loss,val_loss\n";
  std::size_t vi = 0;
  for (std::size_t s = 0; s < res.train_loss.size(); ++s) {
    os << (s + 1) << ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", res.train_loss[s]);
    os << buf << ',';
    if (vi < res.val_loss.size() &&
        res.val_loss[vi].first == static_cast<int>(s + 1)) {
      std::snprintf(buf, sizeof(buf), "%.9g", res.val_loss[vi].second);
      os << buf;
      ++vi;
    }
    os << '\n';
  }
  return os.str();
}

json train_summary(const seqmodel::TrainResult& res) {
  json j;
  j["steps"] = res.train_loss.size();
  j["best_step"] = res.best_step;
  j["best_val_loss"] = res.best_val;
  if (!res.train_loss.empty()) j["final_train_loss"] = res.train_loss.back();
  return j;
}

seqmodel::Checkpoint make_checkpoint(const seqmodel::LstmModel& model,
                                     const seqmodel::NormStats& stats, int round,
                                     const config::RunConfig& cfg) {
  seqmodel::Checkpoint ck;
  ck.config = model.config();
  ck.params = model.params();
  ck.stats = stats;
  ck.round_index = round;
  ck.config_digest = config::config_digest(cfg);
  return ck;
}

}  // namespace

void write_dataset(const pipeline::Dataset& ds, const config::RunConfig& cfg,
                   const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "episodes");

  json manifest;
  manifest["schema_version"] = episode::kSchemaVersion;
  manifest["config_digest"] = config::config_digest(cfg);
  manifest["round_index"] = ds.round_index;
  json eps = json::array();
  char name[64];
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    std::snprintf(name, sizeof(name), "train_%04zu.ep", i);
    episode::save_episode(ds.train[i], (root / "episodes" / name).string());
    eps.push_back(episode_meta(ds.train[i], name, "train"));
  }
  for (std::size_t i = 0; i < ds.validation.size(); ++i) {
    std::snprintf(name, sizeof(name), "val_%04zu.ep", i);
    episode::save_episode(ds.validation[i], (root / "episodes" / name).string());
    eps.push_back(episode_meta(ds.validation[i], name, "validation"));
  }
  manifest["episodes"] = eps;
  manifest["counts"] = {{"train", ds.train.size()},
                        {"validation", ds.validation.size()},
                        {"train_base", ds.train_base_count()}};
  write_text(root / "manifest.json", manifest.dump(2));
  write_config_echo(cfg, root);
}

pipeline::Dataset read_dataset(const std::string& dir, const config::RunConfig& cfg) {
  const fs::path root(dir);
  std::ifstream f(root / "manifest.json");
  if (!f) throw std::runtime_error("missing dataset manifest in " + dir);
  json manifest = json::parse(f);

  pipeline::Dataset ds;
  ds.round_index = manifest.at("round_index").get<int>();
  for (const json& e : manifest.at("episodes")) {
    const std::string file = e.at("file").get<std::string>();
    episode::EpisodeRecord ep =
        episode::load_episode((root / "episodes" / file).string());
    if (e.at("split").get<std::string>() == "train") {
      ds.train.push_back(std::move(ep));
    } else {
      ds.validation.push_back(std::move(ep));
    }
  }
  ds.stats = pipeline::compute_norm_stats(ds.train, cfg.pipe);
  return ds;
}

int cmd_collect(const config::RunConfig& cfg, const std::string& out_dir) {
  pipeline::Dataset ds = pipeline::collect_teacher_data(cfg.pipe);
  write_dataset(ds, cfg, out_dir);
  std::cout << "collected " << ds.train_base_count() << "+" << ds.validation.size()
            << " teacher episodes (" << ds.train.size()
            << " training sequences after augmentation) -> " << out_dir << "\n";
  return kExitOk;
}

int cmd_train(const config::RunConfig& cfg, const std::string& dataset_dir,
              const std::string& out_dir) {
  if (!fs::exists(fs::path(dataset_dir) / "manifest.json")) {
    std::cerr << "error: no dataset manifest under " << dataset_dir << "\n";
    return kExitMissingArtifact;
  }
  pipeline::Dataset ds = read_dataset(dataset_dir, cfg);

  seqmodel::LstmModel model(cfg.pipe.model);
  Rng init_rng(derive_seed(cfg.pipe.master_seed, 0x1417));
  model.init_random(init_rng);

  std::vector<seqmodel::Sample> train_s, val_s;
  for (const auto& ep : ds.train) train_s.push_back(seqmodel::prepare_sample(ep, ds.stats));
  for (const auto& ep : ds.validation) val_s.push_back(seqmodel::prepare_sample(ep, ds.stats));

  seqmodel::TrainConfig tc = cfg.pipe.train_base;
  tc.max_steps = cfg.pipe.train_steps.empty() ? 600 : cfg.pipe.train_steps.front();
  tc.seed = derive_seed(cfg.pipe.master_seed, 0x7e41);
  tc.policy = cfg.pipe.policy;
  const seqmodel::TrainResult res = seqmodel::train(model, train_s, val_s, tc);

  fs::create_directories(out_dir);
  seqmodel::save_checkpoint(make_checkpoint(model, ds.stats, 0, cfg),
                            (fs::path(out_dir) / "checkpoint.bin").string());
  write_text(fs::path(out_dir) / "loss_curve.csv", loss_csv(res));
  write_text(fs::path(out_dir) / "train_summary.json", train_summary(res).dump(2));
  write_config_echo(cfg, out_dir);
  std::cout << "trained " << res.train_loss.size() << " steps, best val "
            << res.best_val << " at step " << res.best_step << " -> " << out_dir
            << "\n";
  return kExitOk;
}

int cmd_rollout(const config::RunConfig& cfg, const std::string& checkpoint_path,
                int pos_id, double time_cmd, double mass, int trial,
                const std::string& out_dir) {
  if (!fs::exists(checkpoint_path)) {
    std::cerr << "error: missing checkpoint " << checkpoint_path << "\n";
    return kExitMissingArtifact;
  }
  const seqmodel::Checkpoint ck = seqmodel::load_checkpoint(checkpoint_path);
  seqmodel::LstmModel model(ck.config);
  model.params() = ck.params;

  const std::uint64_t seed = derive_seed(
      cfg.pipe.master_seed, 5,
      static_cast<std::uint64_t>(pos_id) * 1000 + static_cast<std::uint64_t>(time_cmd * 10),
      trial);
  pipeline::RolloutResult r =
      pipeline::rollout(model, ck.stats, pos_id, time_cmd, mass, seed, cfg.pipe);

  fs::create_directories(out_dir);
  episode::save_episode(r.record, (fs::path(out_dir) / "episode.ep").string());
  img::write_ppm(taskenv::render_workspace(r.final_scene, cfg.pipe.task),
                 (fs::path(out_dir) / "end_workspace.ppm").string());
  img::write_ppm(taskenv::render_tray(r.final_scene, cfg.pipe.task),
                 (fs::path(out_dir) / "end_tray.ppm").string());

  std::ostringstream os;
  os << "t,omega6,omega7\n";
  for (std::size_t i = 0; i < r.record.length(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.3f,%.9g,%.9g\n", r.record.t[i],
                  r.record.follower_seq[i][kNumJoints + kJointWristYaw],
                  r.record.follower_seq[i][kNumJoints + kJointWristPitch]);
    os << buf;
  }
  write_text(fs::path(out_dir) / "wrist_velocity.csv", os.str());
  write_config_echo(cfg, out_dir);
  std::cout << "rollout " << pipeline::position_name(pos_id) << " t=" << time_cmd
            << "s: " << (r.success ? "success" : "failure");
  if (r.record.labels.completion_time) {
    std::cout << ", t_f=" << *r.record.labels.completion_time;
  }
  std::cout << " -> " << out_dir << "\n";
  return kExitOk;
}

int cmd_selfsup(const config::RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& dataset_dir, int rounds, const std::string& out_dir) {
  if (!fs::exists(checkpoint_path)) {
    std::cerr << "error: missing checkpoint " << checkpoint_path << "\n";
    return kExitMissingArtifact;
  }
  if (!fs::exists(fs::path(dataset_dir) / "manifest.json")) {
    std::cerr << "error: no dataset manifest under " << dataset_dir << "\n";
    return kExitMissingArtifact;
  }
  const seqmodel::Checkpoint ck = seqmodel::load_checkpoint(checkpoint_path);
  seqmodel::LstmModel model(ck.config);
  model.params() = ck.params;
  pipeline::Dataset ds = read_dataset(dataset_dir, cfg);
  ds.stats = ck.stats;  // normalization stays frozen across rounds

  fs::create_directories(out_dir);
  write_config_echo(cfg, out_dir);

  for (int round = 1; round <= rounds; ++round) {
    const std::size_t train_before = ds.train.size();
    const std::size_t val_before = ds.validation.size();
    pipeline::RoundSummary summary =
        pipeline::self_supervised_round(model, ds, round, cfg.pipe);

    const fs::path rdir = fs::path(out_dir) / ("round_" + std::to_string(round));
    fs::create_directories(rdir / "episodes");
    write_report_files(summary.pre_round_report, cfg, rdir / "pre_report");
    char name[64];
    for (std::size_t i = train_before; i < ds.train.size(); ++i) {
      std::snprintf(name, sizeof(name), "train_%04zu.ep", i - train_before);
      episode::save_episode(ds.train[i], (rdir / "episodes" / name).string());
    }
    for (std::size_t i = val_before; i < ds.validation.size(); ++i) {
      std::snprintf(name, sizeof(name), "val_%04zu.ep", i - val_before);
      episode::save_episode(ds.validation[i], (rdir / "episodes" / name).string());
    }
    seqmodel::save_checkpoint(make_checkpoint(model, ds.stats, round, cfg),
                              (rdir / "checkpoint.bin").string());
    write_text(rdir / "loss_curve.csv", loss_csv(summary.train_result));
    json js = train_summary(summary.train_result);
    js["collected"] = summary.collected;
    js["added_train"] = summary.added_train;
    js["added_validation"] = summary.added_validation;
    js["pre_round_success_rate"] = summary.pre_round_report.success_rate();
    write_text(rdir / "round_summary.json", js.dump(2));
    std::cout << "round " << round << ": pre-round success "
              << summary.pre_round_report.successes() << "/"
              << summary.pre_round_report.total() << ", collected "
              << summary.collected << " episodes\n";
  }

  const pipeline::Report final_report =
      pipeline::evaluate(model, ds.stats, rounds, cfg.pipe);
  write_report_files(final_report, cfg, fs::path(out_dir) / "final_report");
  std::cout << "final success " << final_report.successes() << "/"
            << final_report.total() << " -> " << out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const config::RunConfig& cfg, const std::string& checkpoint_path,
             int round, const std::string& out_dir) {
  if (!fs::exists(checkpoint_path)) {
    std::cerr << "error: missing checkpoint " << checkpoint_path << "\n";
    return kExitMissingArtifact;
  }
  const seqmodel::Checkpoint ck = seqmodel::load_checkpoint(checkpoint_path);
  seqmodel::LstmModel model(ck.config);
  model.params() = ck.params;
  if (round < 0) round = ck.round_index;

  const pipeline::Report report = pipeline::evaluate(model, ck.stats, round, cfg.pipe);
  write_report_files(report, cfg, out_dir);
  write_config_echo(cfg, out_dir);
  std::cout << "evaluated " << report.total() << " trials: "
            << report.successes() << " successes ("
            << 100.0 * report.success_rate() << "%) -> " << out_dir << "\n";
  return kExitOk;
}

int cmd_report(const config::RunConfig& cfg, const std::string& checkpoint_path,
               const std::string& eval_dir, const std::string& out_dir) {
  const fs::path trials_path = fs::path(eval_dir) / "trials.csv";
  if (!fs::exists(trials_path)) {
    std::cerr << "error: no trials.csv under " << eval_dir << "\n";
    return kExitMissingArtifact;
  }
  if (!fs::exists(checkpoint_path)) {
    std::cerr << "error: missing checkpoint " << checkpoint_path << "\n";
    return kExitMissingArtifact;
  }

  // Completion-time scatter from the recorded trials, successes only.
  std::ifstream f(trials_path);
  std::string line;
  std::getline(f, line);  // header
  std::ostringstream scatter;
  scatter << "time_cmd,t_f\n";
  while (std::getline(f, line)) {
    std::stringstream ls(line);
    std::string field;
    std::vector<std::string> cols;
    while (std::getline(ls, field, ',')) cols.push_back(field);
    if (cols.size() < 7) continue;
    if (cols[5] == "1" && !cols[6].empty()) {
      scatter << cols[2] << ',' << cols[6] << '\n';
    }
  }
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "scatter.csv", scatter.str());

  // Wrist-velocity traces from fresh center rollouts at the teacher speeds.
  const seqmodel::Checkpoint ck = seqmodel::load_checkpoint(checkpoint_path);
  seqmodel::LstmModel model(ck.config);
  model.params() = ck.params;
  std::ostringstream os;
  os << "time_cmd,t,omega6,omega7\n";
  for (double t_cmd : cfg.pipe.grid.teacher_times) {
    const std::uint64_t seed = derive_seed(cfg.pipe.master_seed, 6,
                                           static_cast<std::uint64_t>(t_cmd * 10), 0);
    pipeline::RolloutResult r = pipeline::rollout(
        model, ck.stats, 4 /*center*/, t_cmd, cfg.pipe.grid.masses.front(), seed,
        cfg.pipe);
    for (std::size_t i = 0; i < r.record.length(); ++i) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.2f,%.3f,%.9g,%.9g\n", t_cmd, r.record.t[i],
                    r.record.follower_seq[i][kNumJoints + kJointWristYaw],
                    r.record.follower_seq[i][kNumJoints + kJointWristPitch]);
      os << buf;
    }
  }
  write_text(fs::path(out_dir) / "wrist_traces.csv", os.str());
  write_config_echo(cfg, out_dir);
  std::cout << "report artifacts -> " << out_dir << "\n";
  return kExitOk;
}

}  // namespace scoopsim::cli
