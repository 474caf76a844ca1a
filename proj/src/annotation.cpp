#include "scoopsim/annotation.hpp"

namespace scoopsim::annotation {

std::optional<double> detect_completion_time(const TorqueTrace& trace,
                                             double torque_threshold,
                                             double theta1_threshold) {
  for (const TraceSample& s : trace) {
    if (s.tau2 >= torque_threshold && s.theta1 >= theta1_threshold) {
      return s.t;
    }
  }
  return std::nullopt;
}

int Mask::count() const {
  int n = 0;
  for (std::uint8_t v : on) n += v;
  return n;
}

Mask hsv_binarize(const img::Image& image) {
  Mask m;
  m.width = image.width;
  m.height = image.height;
  m.on.assign(static_cast<std::size_t>(image.width) * image.height, 0);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t* p = image.pixel(x, y);
      const img::Hsv hsv = img::rgb_to_hsv(p[0], p[1], p[2]);
      const bool in = hsv.h > 15.0 && hsv.h < 35.5 && hsv.s > 100.0 && hsv.v < 180.0;
      m.on[static_cast<std::size_t>(y) * image.width + x] = in ? 1 : 0;
    }
  }
  return m;
}

bool judge_success(const Mask& mask) { return mask.count() >= kSuccessPixelCount; }

std::optional<std::pair<double, double>> centroid_px(const Mask& mask) {
  double sx = 0.0, sy = 0.0;
  int n = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.on[static_cast<std::size_t>(y) * mask.width + x]) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return std::make_pair(sx / n, sy / n);
}

}  // namespace scoopsim::annotation
