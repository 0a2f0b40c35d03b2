#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "srdcf/fhog.hpp"
#include "srdcf/image.hpp"
#include "srdcf/signal.hpp"

namespace srdcf {

enum class FeatureKind { Grayscale, Hog };

/// d channels over a shared M x N cell grid.
struct FeatureMap {
  std::vector<RealGrid> channels;
  int cellSize = 1;

  [[nodiscard]] int depth() const { return static_cast<int>(channels.size()); }
  [[nodiscard]] GridDomain domain() const { return GridDomain::of(channels.front()); }
};

struct LabelMap {
  RealGrid values;
  double sigma = 0.0;
};

/// Sample-region sizing. The crop is a square of side
/// sqrt(sampleAreaFactor * W * H) * currentScale * scaleFactor pixels, resampled
/// onto gridSize x gridSize cells of cellSize pixels.
struct SampleGeometry {
  double targetWidth = 0.0;   // initial target size in pixels
  double targetHeight = 0.0;
  double sampleAreaFactor = 16.0;
  int gridSize = 0;
  int cellSize = 4;
  double currentScale = 1.0;  // target size relative to the initial size

  [[nodiscard]] GridDomain domain() const { return {gridSize, gridSize}; }

  [[nodiscard]] double crop_side(double scaleFactor = 1.0) const {
    return std::sqrt(sampleAreaFactor * targetWidth * targetHeight) * currentScale * scaleFactor;
  }

  /// Image pixels covered by one feature cell.
  [[nodiscard]] double pixels_per_cell(double scaleFactor = 1.0) const {
    return crop_side(scaleFactor) / gridSize;
  }

  /// Initial target extent in cells (rows, cols); constant over the sequence.
  [[nodiscard]] double target_rows_cells() const { return targetHeight / pixels_per_cell() * currentScale; }
  [[nodiscard]] double target_cols_cells() const { return targetWidth / pixels_per_cell() * currentScale; }
};

/// Square grid of round(sqrt(area)/cellSize) cells, capped at maxGridSize.
/// When the cap binds the crop keeps its area and each cell covers more pixels.
inline SampleGeometry make_geometry(double targetWidth, double targetHeight,
                                    double sampleAreaFactor, int cellSize, int maxGridSize) {
  if (!(targetWidth > 0.0) || !(targetHeight > 0.0)) {
    throw InvalidInput("sample geometry: target size must be positive");
  }
  if (!(sampleAreaFactor > 0.0) || cellSize < 1 || maxGridSize < 1) {
    throw InvalidInput("sample geometry: bad sizing parameters");
  }
  SampleGeometry g;
  g.targetWidth = targetWidth;
  g.targetHeight = targetHeight;
  g.sampleAreaFactor = sampleAreaFactor;
  g.cellSize = cellSize;
  const double side = std::sqrt(sampleAreaFactor * targetWidth * targetHeight);
  const int cells = static_cast<int>(std::lround(side / cellSize));
  g.gridSize = std::clamp(cells, 1, maxGridSize);
  return g;
}

/// hann(k; K) = 0.5 (1 - cos(2 pi k / (K - 1))), separable; 1 when K == 1.
inline RealGrid hann_window(GridDomain domain) {
  auto hann1 = [](int len) {
    Eigen::ArrayXd h(len);
    if (len == 1) {
      h[0] = 1.0;
      return h;
    }
    for (int k = 0; k < len; ++k) {
      h[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / (len - 1)));
    }
    return h;
  };
  const Eigen::ArrayXd hr = hann1(domain.rows);
  const Eigen::ArrayXd hc = hann1(domain.cols);
  RealGrid w(domain.rows, domain.cols);
  for (int m = 0; m < domain.rows; ++m) {
    for (int n = 0; n < domain.cols; ++n) w(m, n) = hr[m] * hc[n];
  }
  return w;
}

/// Signed circular offset of index k from the origin, in [-floor(K/2), ...).
inline int circular_offset(int k, int len) {
  const int half = len / 2;
  return ((k + half) % len + len) % len - half;
}

/// Gaussian label peaked at the circular origin (zero displacement), with
/// sigma = sigmaFactor * sqrt(p * q) cells.
inline LabelMap gaussian_label(GridDomain domain, double targetRowsCells, double targetColsCells,
                               double sigmaFactor = 1.0 / 16.0) {
  if (!(targetRowsCells > 0.0) || !(targetColsCells > 0.0) || !(sigmaFactor > 0.0)) {
    throw InvalidInput("gaussian_label: target size and sigma factor must be positive");
  }
  LabelMap label;
  label.sigma = sigmaFactor * std::sqrt(targetRowsCells * targetColsCells);
  label.values.resize(domain.rows, domain.cols);
  const double denom = 2.0 * label.sigma * label.sigma;
  for (int m = 0; m < domain.rows; ++m) {
    const double dm = circular_offset(m, domain.rows);
    for (int n = 0; n < domain.cols; ++n) {
      const double dn = circular_offset(n, domain.cols);
      label.values(m, n) = std::exp(-(dm * dm + dn * dn) / denom);
    }
  }
  return label;
}

struct ExtractOptions {
  FeatureKind kind = FeatureKind::Hog;
  bool grayMeanRemoval = true;
};

/// Crops the square sample region around `center` (continuous image
/// coordinates: pixel (x, y) covers [x, x+1) x [y, y+1)), replicating
/// border pixels, resampled bilinearly to gridSize * cellSize pixels.
inline Image crop_sample_region(const Image& image, double centerX, double centerY,
                                const SampleGeometry& geom, double scaleFactor) {
  if (image.empty()) throw InvalidInput("extract_sample: empty image");
  if (!(scaleFactor > 0.0)) throw InvalidInput("extract_sample: scale factor must be positive");
  if (!(geom.targetWidth > 0.0) || !(geom.targetHeight > 0.0) || geom.gridSize < 1) {
    throw InvalidInput("extract_sample: degenerate sample geometry");
  }
  const int res = geom.gridSize * geom.cellSize;
  const double side = geom.crop_side(scaleFactor);
  const double step = side / res;
  Image patch(res, res, image.channels);
  for (int i = 0; i < res; ++i) {
    const double sy = centerY + (i + 0.5 - 0.5 * res) * step - 0.5;
    for (int j = 0; j < res; ++j) {
      const double sx = centerX + (j + 0.5 - 0.5 * res) * step - 0.5;
      for (int c = 0; c < image.channels; ++c) patch.at(j, i, c) = image.bilinear(sx, sy, c);
    }
  }
  return patch;
}

/// Mean intensity per cell, scaled to [0, 1].
inline RealGrid grayscale_cells(const Image& patch, int cellSize) {
  const Image gray = to_luminance(patch);
  const int rows = gray.height / cellSize;
  const int cols = gray.width / cellSize;
  RealGrid g = RealGrid::Zero(rows, cols);
  const double norm = 1.0 / (255.0 * cellSize * cellSize);
  for (int y = 0; y < rows * cellSize; ++y) {
    for (int x = 0; x < cols * cellSize; ++x) g(y / cellSize, x / cellSize) += gray.at(x, y);
  }
  return g * norm;
}

inline FeatureMap extract_sample(const Image& image, double centerX, double centerY,
                                 const SampleGeometry& geom, double scaleFactor,
                                 const ExtractOptions& opts = {}) {
  const Image patch = crop_sample_region(image, centerX, centerY, geom, scaleFactor);
  FeatureMap fm;
  fm.cellSize = geom.cellSize;
  if (opts.kind == FeatureKind::Grayscale) {
    RealGrid g = grayscale_cells(patch, geom.cellSize);
    if (opts.grayMeanRemoval) g -= g.mean();
    fm.channels.push_back(std::move(g));
  } else {
    fm.channels = compute_fhog(patch, geom.cellSize);
  }
  const RealGrid window = hann_window(geom.domain());
  for (auto& ch : fm.channels) ch *= window;
  return fm;
}

}  // namespace srdcf
