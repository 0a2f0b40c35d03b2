#pragma once

// 31-channel Felzenszwalb HOG: 18 contrast-sensitive orientation bins,
// 9 contrast-insensitive bins and 4 gradient-energy (texture) channels per
// cell. Cells at the grid border reuse their nearest in-grid neighbours for
// block normalization, so an image of size (rows*cell) x (cols*cell) maps to
// exactly rows x cols cells.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "srdcf/image.hpp"
#include "srdcf/signal.hpp"

namespace srdcf {

inline constexpr int kHogOrientations = 9;
inline constexpr int kHogChannels = 31;

namespace detail {

struct HogOrientationTable {
  std::array<double, kHogOrientations> cosines{};
  std::array<double, kHogOrientations> sines{};
  HogOrientationTable() {
    for (int o = 0; o < kHogOrientations; ++o) {
      cosines[o] = std::cos(o * std::numbers::pi / kHogOrientations);
      sines[o] = std::sin(o * std::numbers::pi / kHogOrientations);
    }
  }
};

inline const HogOrientationTable& hog_table() {
  static const HogOrientationTable table;
  return table;
}

}  // namespace detail

struct PixelGradient {
  double magnitude = 0.0;
  int bin = 0;  // 0..17, contrast-sensitive
};

/// Central-difference gradient at (x, y) with replicated borders; for colour
/// images the channel with the largest gradient magnitude wins.
inline PixelGradient pixel_gradient(const Image& img, int x, int y) {
  double bestDx = 0.0;
  double bestDy = 0.0;
  double bestMag2 = -1.0;
  for (int c = 0; c < img.channels; ++c) {
    const double dx = img.clamped(x + 1, y, c) - img.clamped(x - 1, y, c);
    const double dy = img.clamped(x, y + 1, c) - img.clamped(x, y - 1, c);
    const double mag2 = dx * dx + dy * dy;
    if (mag2 > bestMag2) {
      bestMag2 = mag2;
      bestDx = dx;
      bestDy = dy;
    }
  }
  // Snap to the closest of 18 directions.
  const auto& t = detail::hog_table();
  double best = 0.0;
  int bin = 0;
  for (int o = 0; o < kHogOrientations; ++o) {
    const double dot = t.cosines[o] * bestDx + t.sines[o] * bestDy;
    if (dot > best) {
      best = dot;
      bin = o;
    } else if (-dot > best) {
      best = -dot;
      bin = o + kHogOrientations;
    }
  }
  return {std::sqrt(bestMag2), bin};
}

/// Computes fHOG features; img dimensions must be multiples of cellSize.
inline std::vector<RealGrid> compute_fhog(const Image& img, int cellSize) {
  if (img.empty() || cellSize < 1) throw InvalidInput("compute_fhog: empty image or bad cell size");
  if (img.width % cellSize != 0 || img.height % cellSize != 0) {
    throw InvalidInput("compute_fhog: image size must be a multiple of the cell size");
  }
  const int rows = img.height / cellSize;
  const int cols = img.width / cellSize;
  constexpr int kBins = 2 * kHogOrientations;

  // Orientation histograms with bilinear spatial voting.
  std::vector<double> hist(static_cast<std::size_t>(rows) * cols * kBins, 0.0);
  auto histAt = [&](int r, int c, int o) -> double& {
    return hist[(static_cast<std::size_t>(r) * cols + c) * kBins + o];
  };
  for (int y = 0; y < img.height; ++y) {
    const double yp = (y + 0.5) / cellSize - 0.5;
    const int iy = static_cast<int>(std::floor(yp));
    const double vy0 = yp - iy;
    const double vy1 = 1.0 - vy0;
    for (int x = 0; x < img.width; ++x) {
      const PixelGradient g = pixel_gradient(img, x, y);
      if (g.magnitude == 0.0) continue;
      const double xp = (x + 0.5) / cellSize - 0.5;
      const int ix = static_cast<int>(std::floor(xp));
      const double vx0 = xp - ix;
      const double vx1 = 1.0 - vx0;
      const bool x0In = ix >= 0;
      const bool x1In = ix + 1 < cols;
      if (iy >= 0) {
        if (x0In) histAt(iy, ix, g.bin) += vy1 * vx1 * g.magnitude;
        if (x1In) histAt(iy, ix + 1, g.bin) += vy1 * vx0 * g.magnitude;
      }
      if (iy + 1 < rows) {
        if (x0In) histAt(iy + 1, ix, g.bin) += vy0 * vx1 * g.magnitude;
        if (x1In) histAt(iy + 1, ix + 1, g.bin) += vy0 * vx0 * g.magnitude;
      }
    }
  }

  // Energy of the contrast-insensitive histogram per cell.
  std::vector<double> energy(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double e = 0.0;
      for (int o = 0; o < kHogOrientations; ++o) {
        const double s = histAt(r, c, o) + histAt(r, c, o + kHogOrientations);
        e += s * s;
      }
      energy[static_cast<std::size_t>(r) * cols + c] = e;
    }
  }
  auto energyAt = [&](int r, int c) {
    r = std::clamp(r, 0, rows - 1);
    c = std::clamp(c, 0, cols - 1);
    return energy[static_cast<std::size_t>(r) * cols + c];
  };
  auto blockNorm = [&](int r0, int c0) {
    constexpr double kEps = 1e-4;
    const double e = energyAt(r0, c0) + energyAt(r0, c0 + 1) + energyAt(r0 + 1, c0) +
                     energyAt(r0 + 1, c0 + 1);
    return 1.0 / std::sqrt(e + kEps);
  };

  std::vector<RealGrid> out(kHogChannels, RealGrid::Zero(rows, cols));
  constexpr double kTruncation = 0.2;
  constexpr double kTextureScale = 0.2357;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::array<double, 4> norms = {blockNorm(r, c), blockNorm(r - 1, c),
                                           blockNorm(r, c - 1), blockNorm(r - 1, c - 1)};
      std::array<double, 4> texture{};
      for (int o = 0; o < kBins; ++o) {
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
          const double h = std::min(histAt(r, c, o) * norms[k], kTruncation);
          sum += h;
          texture[k] += h;
        }
        out[o](r, c) = 0.5 * sum;
      }
      for (int o = 0; o < kHogOrientations; ++o) {
        const double s = histAt(r, c, o) + histAt(r, c, o + kHogOrientations);
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) sum += std::min(s * norms[k], kTruncation);
        out[kBins + o](r, c) = 0.5 * sum;
      }
      for (int k = 0; k < 4; ++k) out[kBins + kHogOrientations + k](r, c) = kTextureScale * texture[k];
    }
  }
  return out;
}

}  // namespace srdcf
