#pragma once

// Detection scores over multiple scales, their trigonometric interpolation
// and Newton refinement of the peak to sub-cell precision.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "srdcf/features.hpp"
#include "srdcf/signal.hpp"
#include "srdcf/solver.hpp"

namespace srdcf {

struct ScoreField {
  Spectrum spectrum;  // s^ = sum_l z^^l . f^^l
  RealGrid grid;      // idft2(s^)
  int scaleIndex = 0;
};

inline ScoreField score_field(const std::vector<Spectrum>& sampleSpectra,
                              const std::vector<Spectrum>& filterSpectra) {
  if (sampleSpectra.empty() || sampleSpectra.size() != filterSpectra.size()) {
    throw InvalidInput("score_field: sample and filter depth differ");
  }
  const GridDomain dom = GridDomain::of(sampleSpectra.front());
  ScoreField field;
  field.spectrum = Spectrum::Zero(dom.rows, dom.cols);
  for (std::size_t l = 0; l < sampleSpectra.size(); ++l) {
    if (GridDomain::of(sampleSpectra[l]) != dom || GridDomain::of(filterSpectra[l]) != dom) {
      throw InvalidInput("score_field: sample and filter domains differ");
    }
    field.spectrum += sampleSpectra[l] * filterSpectra[l];
  }
  field.grid = idft2_real(field.spectrum);
  return field;
}

inline ScoreField score_field(const FeatureMap& sample, const std::vector<Spectrum>& filterSpectra) {
  return score_field(feature_spectra(sample), filterSpectra);
}

struct ScoreSample {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

namespace detail {

// Per-axis interpolation basis at position x over `len` frequencies, with its
// first two derivatives. Frequencies are taken signed; an even-length Nyquist
// bin becomes cos(pi x) so the interpolant is real.
struct AxisBasis {
  std::vector<Complex> f, df, ddf;

  AxisBasis(int len, double x) : f(len), df(len), ddf(len) {
    const double pi = std::numbers::pi;
    for (int m = 0; m < len; ++m) {
      if (2 * m == len) {
        f[m] = std::cos(pi * x);
        df[m] = -pi * std::sin(pi * x);
        ddf[m] = -pi * pi * std::cos(pi * x);
        continue;
      }
      const int k = 2 * m < len ? m : m - len;
      const double w = 2.0 * pi * k / len;
      const Complex e = std::polar(1.0, w * x);
      f[m] = e;
      df[m] = Complex(0.0, w) * e;
      ddf[m] = -w * w * e;
    }
  }
};

}  // namespace detail

/// Continuous score s(u, v) = 1/(MN) sum s^(m,n) e^{i 2 pi (m u / M + n v / N)}
/// with analytic gradient and Hessian; u runs along rows, v along columns.
inline ScoreSample interpolate_score(const ScoreField& field, double u, double v) {
  const int rows = static_cast<int>(field.spectrum.rows());
  const int cols = static_cast<int>(field.spectrum.cols());
  const detail::AxisBasis bu(rows, u - rows * std::floor(u / rows));
  const detail::AxisBasis bv(cols, v - cols * std::floor(v / cols));
  Complex s(0.0), su(0.0), sv(0.0), suu(0.0), suv(0.0), svv(0.0);
  for (int m = 0; m < rows; ++m) {
    Complex r0(0.0), r1(0.0), r2(0.0);
    for (int n = 0; n < cols; ++n) {
      const Complex c = field.spectrum(m, n);
      r0 += c * bv.f[n];
      r1 += c * bv.df[n];
      r2 += c * bv.ddf[n];
    }
    s += bu.f[m] * r0;
    su += bu.df[m] * r0;
    sv += bu.f[m] * r1;
    suu += bu.ddf[m] * r0;
    suv += bu.df[m] * r1;
    svv += bu.f[m] * r2;
  }
  const double inv = 1.0 / (static_cast<double>(rows) * cols);
  ScoreSample out;
  out.value = s.real() * inv;
  out.gradient << su.real() * inv, sv.real() * inv;
  out.hessian << suu.real() * inv, suv.real() * inv, suv.real() * inv, svv.real() * inv;
  return out;
}

struct SubgridPeak {
  double u = 0.0;
  double v = 0.0;
  double score = 0.0;
  int iterations = 0;
};

/// Grid argmax, first in row-major order on ties.
inline std::pair<int, int> grid_argmax(const RealGrid& grid) {
  int bm = 0;
  int bn = 0;
  for (int m = 0; m < grid.rows(); ++m) {
    for (int n = 0; n < grid.cols(); ++n) {
      if (grid(m, n) > grid(bm, bn)) {
        bm = m;
        bn = n;
      }
    }
  }
  return {bm, bn};
}

/// Newton ascent on the interpolated score from the grid argmax. Falls back
/// to backtracking gradient ascent when the Hessian is not negative definite
/// or the Newton step exceeds a quarter of the grid, and never returns a
/// score below the grid maximum.
inline SubgridPeak subgrid_maximize(const ScoreField& field, int maxIters) {
  constexpr double kStepTolerance = 1e-4;
  constexpr int kMaxHalvings = 30;
  const auto [m0, n0] = grid_argmax(field.grid);
  const double gridMax = field.grid(m0, n0);
  const double maxStep = 0.25 * std::min(field.grid.rows(), field.grid.cols());

  SubgridPeak peak{static_cast<double>(m0), static_cast<double>(n0), gridMax, 0};
  Eigen::Vector2d pos(m0, n0);
  ScoreSample cur = interpolate_score(field, pos.x(), pos.y());
  for (int it = 0; it < maxIters; ++it) {
    const Eigen::Matrix2d& h = cur.hessian;
    const Eigen::Vector2d& g = cur.gradient;
    Eigen::Vector2d step;
    const bool negDef = h(0, 0) < 0.0 && h.determinant() > 0.0;
    if (negDef) step = -h.inverse() * g;
    if (!negDef || !step.allFinite() || step.norm() > maxStep) {
      const double curvature = h.norm();
      step = curvature > 0.0 ? Eigen::Vector2d(g / curvature) : g;
      if (step.norm() > maxStep) step *= maxStep / step.norm();
    }
    ++peak.iterations;
    if (step.norm() < kStepTolerance) {
      pos += step;
      cur = interpolate_score(field, pos.x(), pos.y());
      break;
    }
    ScoreSample next = interpolate_score(field, pos.x() + step.x(), pos.y() + step.y());
    int halvings = 0;
    while (next.value < cur.value && halvings < kMaxHalvings) {
      step *= 0.5;
      next = interpolate_score(field, pos.x() + step.x(), pos.y() + step.y());
      ++halvings;
    }
    if (next.value < cur.value) break;
    pos += step;
    cur = next;
    if (step.norm() < kStepTolerance) break;
  }
  if (cur.value >= gridMax) {
    peak.u = pos.x();
    peak.v = pos.y();
    peak.score = cur.value;
  }
  return peak;
}

/// Signed circular offset of a continuous index, in [-K/2, K/2).
inline double unwrap_offset(double x, int len) {
  return x - len * std::floor((x + 0.5 * len) / len);
}

struct Detection {
  double rowOffset = 0.0;  // cells, relative to the sample centre
  double colOffset = 0.0;
  double dx = 0.0;  // pixels
  double dy = 0.0;
  int scaleIndex = 0;
  double scaleFactor = 1.0;
  double score = 0.0;
  int newtonIters = 0;
};

struct DetectionParams {
  int numScales = 5;
  double scaleStep = 1.02;
  int newtonIters = 5;
  ExtractOptions extract;
};

/// Scale indices floor((1-S)/2) .. floor((S-1)/2).
inline std::vector<int> scale_indices(int numScales) {
  std::vector<int> r;
  const int lo = static_cast<int>(std::floor((1.0 - numScales) / 2.0));
  const int hi = static_cast<int>(std::floor((numScales - 1.0) / 2.0));
  for (int i = lo; i <= hi; ++i) r.push_back(i);
  return r;
}

inline Detection detect_at_scale(const Image& frame, double centerX, double centerY,
                                 const SampleGeometry& geom, const std::vector<Spectrum>& filter,
                                 const DetectionParams& params, int r) {
  const double factor = std::pow(params.scaleStep, r);
  const FeatureMap z = extract_sample(frame, centerX, centerY, geom, factor, params.extract);
  ScoreField field = score_field(z, filter);
  field.scaleIndex = r;
  const SubgridPeak peak = subgrid_maximize(field, params.newtonIters);
  Detection det;
  det.scaleIndex = r;
  det.scaleFactor = factor;
  det.score = peak.score;
  det.newtonIters = peak.iterations;
  det.rowOffset = unwrap_offset(peak.u, geom.gridSize);
  det.colOffset = unwrap_offset(peak.v, geom.gridSize);
  const double ppc = geom.pixels_per_cell(factor);
  det.dy = det.rowOffset * ppc;
  det.dx = det.colOffset * ppc;
  return det;
}

/// True when a beats b: higher score, then smaller |r|, then smaller r.
inline bool better_detection(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (std::abs(a.scaleIndex) != std::abs(b.scaleIndex)) {
    return std::abs(a.scaleIndex) < std::abs(b.scaleIndex);
  }
  return a.scaleIndex < b.scaleIndex;
}

inline Detection multi_scale_detect(const Image& frame, double centerX, double centerY,
                                    const SampleGeometry& geom, const std::vector<Spectrum>& filter,
                                    const DetectionParams& params) {
  if (params.numScales < 1) throw InvalidInput("multi_scale_detect: need at least one scale");
  bool first = true;
  Detection best;
  for (int r : scale_indices(params.numScales)) {
    const Detection det = detect_at_scale(frame, centerX, centerY, geom, filter, params, r);
    if (first || better_detection(det, best)) best = det;
    first = false;
  }
  return best;
}

}  // namespace srdcf
