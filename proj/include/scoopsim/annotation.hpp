#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "scoopsim/image.hpp"

namespace scoopsim::annotation {

struct TraceSample {
  double t = 0.0;       // [s]
  double tau2 = 0.0;    // joint-2 reaction torque estimate [N·m]
  double theta1 = 0.0;  // joint-1 angle [rad]
};

using TorqueTrace = std::vector<TraceSample>;

struct Labels {
  std::optional<double> completion_time;      // t_f [s]
  bool success = false;
  std::optional<std::pair<double, double>> position_xy;  // [m]
};

inline constexpr double kTorqueThreshold = 1.2;  // [N·m]

// First time tau2 crosses the threshold while theta1 is past the
// putting-phase gate; the gate keeps sliding-phase torque spikes from
// triggering. Returns nothing if there is no gated crossing.
std::optional<double> detect_completion_time(const TorqueTrace& trace,
                                             double torque_threshold,
                                             double theta1_threshold);

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> on;  // 0/1 per pixel

  int count() const;
};

// Pixel passes iff 15 < h < 35.5, s > 100, v < 180 (hue in half-degrees,
// s and v on [0,255]); bounds strict exactly as stated.
Mask hsv_binarize(const img::Image& image);

inline constexpr int kSuccessPixelCount = 500;

// Five hundred pixels or more is a success; 499 is not.
bool judge_success(const Mask& mask);

// Mean of the set pixel coordinates, or nothing for an empty mask.
std::optional<std::pair<double, double>> centroid_px(const Mask& mask);

}  // namespace scoopsim::annotation
