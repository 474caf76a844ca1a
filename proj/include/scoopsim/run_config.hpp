#pragma once

#include <string>

#include "scoopsim/pipeline.hpp"

namespace scoopsim::config {

// Everything a run needs, serializable to one JSON document. Defaults embed
// the published controller tables; `net_scale` switches between the
// desk-scale network and the full-size one.
struct RunConfig {
  pipeline::Config pipe;
  std::string net_scale = "desk";

  void apply_net_scale();  // adjusts model + training to the named scale
};

RunConfig default_run_config();

std::string to_json(const RunConfig& cfg);
RunConfig from_json(const std::string& text);

// Defaults overlaid with a JSON merge patch from the file.
RunConfig load_run_config(const std::string& path);

// Stable digest of the canonical serialization, recorded in artifacts.
std::string config_digest(const RunConfig& cfg);

}  // namespace scoopsim::config
