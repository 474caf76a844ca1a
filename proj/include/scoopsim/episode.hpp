#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scoopsim/annotation.hpp"
#include "scoopsim/bilateral_rig.hpp"
#include "scoopsim/taskenv.hpp"

namespace scoopsim::episode {

inline constexpr int kSchemaVersion = 1;

// One 50 Hz episode: follower responses (model input) and leader responses
// (model target), with command, labels and provenance.
struct EpisodeRecord {
  taskenv::TrialCommand command;
  std::vector<double> t;
  std::vector<rig::Response24> follower_seq;
  std::vector<rig::Response24> leader_seq;
  annotation::Labels labels;
  std::string provenance = "human-demo";  // or "autonomous"
  double rate_hz = static_cast<double>(kModelHz);
  std::uint64_t seed = 0;
  int round_index = 0;
  int offset = 0;  // decimation phase for augmented teacher episodes

  std::size_t length() const { return follower_seq.size(); }
  annotation::TorqueTrace trace() const;
};

// Ten phase-offset decimations of a 500 Hz log, each keeping every 10th
// sample; their union reconstructs the source. Throws if the log is shorter
// than the decimation factor.
std::vector<EpisodeRecord> downsample_augment(const rig::EpisodeLog& log);

// Single decimation at one offset (autonomous episodes are stored at
// offset 0 only).
EpisodeRecord downsample(const rig::EpisodeLog& log, int offset);

void save_episode(const EpisodeRecord& ep, const std::string& path);
EpisodeRecord load_episode(const std::string& path);

}  // namespace scoopsim::episode
