#include "scoopsim/image.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace scoopsim::img {

Image Image::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image im;
  im.width = w;
  im.height = h;
  im.rgb.resize(static_cast<std::size_t>(3) * w * h);
  for (std::size_t i = 0; i < im.rgb.size(); i += 3) {
    im.rgb[i] = r;
    im.rgb[i + 1] = g;
    im.rgb[i + 2] = b;
  }
  return im;
}

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8, g = g8, b = b8;
  const double v = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double diff = v - mn;
  Hsv out{0.0, 0.0, v};
  if (v > 0.0) out.s = 255.0 * diff / v;
  if (diff > 0.0) {
    double hue;
    if (v == r) {
      hue = 60.0 * (g - b) / diff;
    } else if (v == g) {
      hue = 120.0 + 60.0 * (b - r) / diff;
    } else {
      hue = 240.0 + 60.0 * (r - g) / diff;
    }
    if (hue < 0.0) hue += 360.0;
    out.h = hue / 2.0;
  }
  return out;
}

void write_ppm(const Image& image, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "P6\n" << image.width << " " << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.rgb.data()),
          static_cast<std::streamsize>(image.rgb.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0) {
    throw std::runtime_error("unsupported ppm: " + path);
  }
  f.get();  // single whitespace after the header
  Image im;
  im.width = w;
  im.height = h;
  im.rgb.resize(static_cast<std::size_t>(3) * w * h);
  f.read(reinterpret_cast<char*>(im.rgb.data()),
         static_cast<std::streamsize>(im.rgb.size()));
  if (!f) throw std::runtime_error("short read: " + path);
  return im;
}

}  // namespace scoopsim::img
