#include "scoopsim/episode.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace scoopsim::episode {

using nlohmann::json;

annotation::TorqueTrace EpisodeRecord::trace() const {
  annotation::TorqueTrace tr;
  tr.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    tr.push_back({t[i], follower_seq[i][2 * kNumJoints + 1], follower_seq[i][0]});
  }
  return tr;
}

EpisodeRecord downsample(const rig::EpisodeLog& log, int offset) {
  const int factor = kControlHz / kModelHz;
  if (log.t.size() < static_cast<std::size_t>(factor)) {
    throw std::invalid_argument("log too short to downsample");
  }
  EpisodeRecord ep;
  ep.offset = offset;
  for (std::size_t i = offset; i < log.t.size(); i += factor) {
    ep.t.push_back(log.t[i]);
    ep.follower_seq.push_back(log.follower[i]);
    ep.leader_seq.push_back(log.leader[i]);
  }
  return ep;
}

std::vector<EpisodeRecord> downsample_augment(const rig::EpisodeLog& log) {
  const int factor = kControlHz / kModelHz;
  std::vector<EpisodeRecord> out;
  out.reserve(factor);
  for (int off = 0; off < factor; ++off) out.push_back(downsample(log, off));
  return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'S', 'E', 'P'};

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_episode(const EpisodeRecord& ep, const std::string& path) {
  json header;
  header["schema_version"] = kSchemaVersion;
  header["rate_hz"] = ep.rate_hz;
  header["n_steps"] = ep.length();
  header["dims"] = rig::kResponseDim;
  header["command"] = {{"time_s", ep.command.time_cmd},
                       {"x", ep.command.position_x},
                       {"y", ep.command.position_y},
                       {"mass_kg", ep.command.mass}};
  json labels;
  labels["success"] = ep.labels.success;
  if (ep.labels.completion_time) labels["t_f"] = *ep.labels.completion_time;
  if (ep.labels.position_xy) {
    labels["position"] = {ep.labels.position_xy->first, ep.labels.position_xy->second};
  }
  header["labels"] = labels;
  header["provenance"] = ep.provenance;
  header["seed"] = ep.seed;
  header["round"] = ep.round_index;
  header["offset"] = ep.offset;

  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(kMagic, 4);
  write_u32(f, kSchemaVersion);
  write_u32(f, static_cast<std::uint32_t>(hs.size()));
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));

  const std::size_t n = ep.length();
  write_doubles(f, ep.t.data(), n);
  // Columnar: one contiguous run per dimension.
  std::vector<double> col(n);
  for (int d = 0; d < rig::kResponseDim; ++d) {
    for (std::size_t i = 0; i < n; ++i) col[i] = ep.follower_seq[i][d];
    write_doubles(f, col.data(), n);
  }
  for (int d = 0; d < rig::kResponseDim; ++d) {
    for (std::size_t i = 0; i < n; ++i) col[i] = ep.leader_seq[i][d];
    write_doubles(f, col.data(), n);
  }
  if (!f) throw std::runtime_error("short write: " + path);
}

EpisodeRecord load_episode(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not an episode file: " + path);
  }
  const std::uint32_t version = read_u32(f);
  if (version != kSchemaVersion) {
    throw std::runtime_error("unsupported episode schema in " + path);
  }
  const std::uint32_t hlen = read_u32(f);
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  const json header = json::parse(hs);

  EpisodeRecord ep;
  ep.rate_hz = header.at("rate_hz").get<double>();
  ep.command.time_cmd = header.at("command").at("time_s").get<double>();
  ep.command.position_x = header.at("command").at("x").get<double>();
  ep.command.position_y = header.at("command").at("y").get<double>();
  ep.command.mass = header.at("command").at("mass_kg").get<double>();
  const json& labels = header.at("labels");
  ep.labels.success = labels.at("success").get<bool>();
  if (labels.contains("t_f")) ep.labels.completion_time = labels.at("t_f").get<double>();
  if (labels.contains("position")) {
    ep.labels.position_xy = {labels.at("position")[0].get<double>(),
                             labels.at("position")[1].get<double>()};
  }
  ep.provenance = header.at("provenance").get<std::string>();
  ep.seed = header.at("seed").get<std::uint64_t>();
  ep.round_index = header.at("round").get<int>();
  ep.offset = header.at("offset").get<int>();

  const std::size_t n = header.at("n_steps").get<std::size_t>();
  ep.t.resize(n);
  read_doubles(f, ep.t.data(), n);
  ep.follower_seq.assign(n, rig::Response24::Zero());
  ep.leader_seq.assign(n, rig::Response24::Zero());
  std::vector<double> col(n);
  for (int d = 0; d < rig::kResponseDim; ++d) {
    read_doubles(f, col.data(), n);
    for (std::size_t i = 0; i < n; ++i) ep.follower_seq[i][d] = col[i];
  }
  for (int d = 0; d < rig::kResponseDim; ++d) {
    read_doubles(f, col.data(), n);
    for (std::size_t i = 0; i < n; ++i) ep.leader_seq[i][d] = col[i];
  }
  if (!f) throw std::runtime_error("short read: " + path);
  return ep;
}

}  // namespace scoopsim::episode
