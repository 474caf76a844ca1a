#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scoopsim::img {

// Plain 8-bit interleaved RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height

  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  std::uint8_t* pixel(int x, int y) { return &rgb[3 * (y * width + x)]; }
  const std::uint8_t* pixel(int x, int y) const { return &rgb[3 * (y * width + x)]; }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = pixel(x, y);
    p[0] = r; p[1] = g; p[2] = b;
  }
};

struct Hsv {
  double h;  // half-degrees, [0, 180)
  double s;  // [0, 255]
  double v;  // [0, 255]
};

// Common computer-vision convention: hue in half-degrees so an 8-bit channel
// covers the circle, saturation and value on [0, 255].
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Binary PPM (P6), lossless.
void write_ppm(const Image& image, const std::string& path);
Image read_ppm(const std::string& path);

}  // namespace scoopsim::img
