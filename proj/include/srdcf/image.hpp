#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "srdcf/error.hpp"

namespace srdcf {

/// Interleaved raster with 1 (gray) or 3 (RGB) channels, values in [0, 255].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w < 0 || h < 0 || (c != 1 && c != 3)) throw InvalidInput("Image: bad dimensions");
  }

  [[nodiscard]] bool empty() const { return width == 0 || height == 0; }

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  [[nodiscard]] float at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  /// Replicate-border access.
  [[nodiscard]] float clamped(int x, int y, int c = 0) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y, c);
  }

  /// Bilinear sample at pixel-index coordinates (pixel centers on integers).
  [[nodiscard]] float bilinear(double x, double y, int c = 0) const {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    const double top = (1.0 - ax) * clamped(x0, y0, c) + ax * clamped(x0 + 1, y0, c);
    const double bot = (1.0 - ax) * clamped(x0, y0 + 1, c) + ax * clamped(x0 + 1, y0 + 1, c);
    return static_cast<float>((1.0 - ay) * top + ay * bot);
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// ITU-R BT.601 luma; a gray image is returned unchanged.
inline Image to_luminance(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
    }
  }
  return out;
}

/// Bilinear resize with pixel-center alignment.
inline Image resize_bilinear(const Image& img, int width, int height) {
  if (img.empty() || width < 1 || height < 1) throw InvalidInput("resize_bilinear: empty size");
  Image out(width, height, img.channels);
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double srcY = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double srcX = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.bilinear(srcX, srcY, c);
    }
  }
  return out;
}

}  // namespace srdcf
