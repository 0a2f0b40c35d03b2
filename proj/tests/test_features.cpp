#include <gtest/gtest.h>

#include "oracles.hpp"
#include "srdcf/features.hpp"

using namespace srdcf;

namespace {

Image checkerboard(int size, int square) {
  Image img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) img.at(x, y) = ((x / square + y / square) % 2) ? 255.0f : 0.0f;
  return img;
}

Image smooth_image(int w, int h) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = static_cast<float>(128 + 60 * std::sin(x * 0.07) * std::cos(y * 0.05) + 40 * std::sin((x + y) * 0.031));
  return img;
}

/// Per-cell orientation histogram without spatial interpolation: each pixel
/// votes its gradient magnitude into the nearest of 9 undirected orientations.
std::vector<std::array<double, 9>> naive_orientation_histogram(const Image& img, int cell) {
  const int cols = img.width / cell;
  std::vector<std::array<double, 9>> hist(static_cast<std::size_t>(cols) * (img.height / cell));
  for (auto& h : hist) h.fill(0.0);
  auto px = [&](int x, int y) {
    return img.at(std::clamp(x, 0, img.width - 1), std::clamp(y, 0, img.height - 1));
  };
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double dx = px(x + 1, y) - px(x - 1, y);
      const double dy = px(x, y + 1) - px(x, y - 1);
      const double mag = std::hypot(dx, dy);
      if (mag == 0.0) continue;
      double ang = std::atan2(dy, dx);
      if (ang < 0) ang += std::numbers::pi;
      int bin = static_cast<int>(std::floor(ang / (std::numbers::pi / 9) + 0.5)) % 9;
      hist[static_cast<std::size_t>(y / cell) * cols + x / cell][bin] += mag;
    }
  return hist;
}

}  // namespace

TEST(Hann, ThreeByThree) {
  const RealGrid w = hann_window({3, 3});
  EXPECT_DOUBLE_EQ(w(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(w(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(w(2, 2), 0.0);
}

TEST(Hann, SingleCell) { EXPECT_DOUBLE_EQ(hann_window({1, 1})(0, 0), 1.0); }

TEST(Hann, FiveByFive) { EXPECT_NEAR(hann_window({5, 5})(1, 1), 0.25, 1e-15); }

TEST(Label, CenterIsOne) {
  const LabelMap l = gaussian_label({9, 7}, 3.0, 2.0);
  EXPECT_DOUBLE_EQ(l.values(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(l.values.maxCoeff(), 1.0);
  EXPECT_GT(l.values.minCoeff(), 0.0);
}

TEST(Label, SigmaOneOnFiftyGrid) {
  const LabelMap l = gaussian_label({50, 50}, 16.0, 16.0);
  EXPECT_DOUBLE_EQ(l.sigma, 1.0);
  EXPECT_NEAR(l.values(1, 0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(l.values(0, 49), 0.6065306597, 1e-9);
}

TEST(Label, SmallSigmaApproachesImpulse) {
  const LabelMap l = gaussian_label({8, 8}, 1.0, 1.0, 0.05);
  EXPECT_DOUBLE_EQ(l.values(0, 0), 1.0);
  EXPECT_LT(l.values(0, 1), 1e-40);
}

TEST(Label, ReflectionSymmetric) {
  for (int m : {5, 6, 9}) {
    const GridDomain d(m, m + 1);
    const LabelMap l = gaussian_label(d, 2.0, 3.0);
    for (int p = 0; p < d.size(); ++p) {
      const int q = d.reflect(p);
      EXPECT_DOUBLE_EQ(l.values(d.row_of(p), d.col_of(p)), l.values(d.row_of(q), d.col_of(q)));
    }
  }
}

TEST(Geometry, GridFromAreaAndCap) {
  const SampleGeometry g = make_geometry(20, 30, 16.0, 4, 50);
  EXPECT_EQ(g.gridSize, static_cast<int>(std::lround(std::sqrt(16.0 * 600) / 4)));
  const SampleGeometry big = make_geometry(200, 200, 16.0, 4, 50);
  EXPECT_EQ(big.gridSize, 50);
  EXPECT_DOUBLE_EQ(big.crop_side(), 800.0);
  EXPECT_DOUBLE_EQ(big.pixels_per_cell(), 16.0);
  EXPECT_DOUBLE_EQ(big.target_rows_cells(), 12.5);
  EXPECT_THROW(make_geometry(0, 10, 16.0, 4, 50), InvalidInput);
}

TEST(Extract, UniformGrayIsZeroWithMeanRemoval) {
  const Image img(40, 40, 1, 128.0f);
  const SampleGeometry g = make_geometry(8, 8, 16.0, 4, 50);
  const FeatureMap fm = extract_sample(img, 20, 20, g, 1.0, {FeatureKind::Grayscale, true});
  ASSERT_EQ(fm.depth(), 1);
  EXPECT_LT(fm.channels[0].abs().maxCoeff(), 1e-12);
}

TEST(Extract, CellSizeOneIsWindowedPixels) {
  const Image img = smooth_image(20, 20);
  const SampleGeometry g = make_geometry(5, 5, 16.0, 1, 50);
  ASSERT_EQ(g.gridSize, 20);
  const FeatureMap fm = extract_sample(img, 10.0, 10.0, g, 1.0, {FeatureKind::Grayscale, false});
  const RealGrid w = hann_window({20, 20});
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_NEAR(fm.channels[0](y, x), img.at(x, y) / 255.0 * w(y, x), 1e-6);
}

TEST(Extract, BorderIsZero) {
  const Image img = smooth_image(120, 90);
  const SampleGeometry g = make_geometry(20, 16, 16.0, 4, 50);
  for (FeatureKind k : {FeatureKind::Grayscale, FeatureKind::Hog}) {
    const FeatureMap fm = extract_sample(img, 60, 45, g, 1.0, {k, true});
    const int m = g.gridSize - 1;
    for (const auto& ch : fm.channels) {
      EXPECT_EQ(ch.row(0).abs().maxCoeff(), 0.0);
      EXPECT_EQ(ch.row(m).abs().maxCoeff(), 0.0);
      EXPECT_EQ(ch.col(0).abs().maxCoeff(), 0.0);
      EXPECT_EQ(ch.col(m).abs().maxCoeff(), 0.0);
    }
  }
}

TEST(Extract, ErrorPaths) {
  const SampleGeometry g = make_geometry(8, 8, 16.0, 4, 50);
  EXPECT_THROW(extract_sample(Image(), 0, 0, g, 1.0), InvalidInput);
  EXPECT_THROW(extract_sample(Image(10, 10, 1), 5, 5, g, 0.0), InvalidInput);
  SampleGeometry bad = g;
  bad.targetWidth = 0.0;
  EXPECT_THROW(extract_sample(Image(10, 10, 1), 5, 5, bad, 1.0), InvalidInput);
}

TEST(Extract, ReplicatesBorderOutsideImage) {
  const Image img(10, 10, 1, 77.0f);
  const SampleGeometry g = make_geometry(8, 8, 16.0, 1, 50);
  const FeatureMap fm = extract_sample(img, -20.0, -20.0, g, 1.0, {FeatureKind::Grayscale, false});
  const RealGrid w = hann_window(g.domain());
  EXPECT_LT((fm.channels[0] - w * (77.0 / 255.0)).abs().maxCoeff(), 1e-6);
}

TEST(ExtractProperty, ScaleCovariance) {
  const Image img = smooth_image(240, 240);
  const SampleGeometry g = make_geometry(12, 12, 16.0, 1, 50);
  for (double s : {0.8, 1.25, 1.6}) {
    const Image resized = resize_bilinear(img, static_cast<int>(std::lround(240 / s)),
                                          static_cast<int>(std::lround(240 / s)));
    const double sx = 240.0 / resized.width;
    const Image a = crop_sample_region(img, 120.0, 120.0, g, s);
    const Image b = crop_sample_region(resized, 120.0 / sx, 120.0 / sx, g, 1.0);
    double sq = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) sq += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    EXPECT_LE(std::sqrt(sq / a.data.size()), 2.0) << s;
  }
}

TEST(Hog, CheckerboardShapeAndAxisBins) {
  const Image img = checkerboard(64, 8);
  const auto h = compute_fhog(img, 4);
  ASSERT_EQ(h.size(), 31u);
  EXPECT_EQ(h[0].rows(), 16);
  EXPECT_EQ(h[0].cols(), 16);

  // Oracle: the horizontal (0) and vertical (4/5, straddling 90 degrees)
  // orientations dominate every oblique orientation, in both histograms.
  const auto naive = naive_orientation_histogram(img, 4);
  std::array<double, 9> naiveTotal{};
  for (const auto& cell : naive)
    for (int o = 0; o < 9; ++o) naiveTotal[o] += cell[o];
  std::array<double, 9> ours{};
  for (int o = 0; o < 9; ++o) ours[o] = h[18 + o].sum();
  for (const auto* hist : {&naiveTotal, &ours}) {
    const double vertical = (*hist)[4] + (*hist)[5];
    for (int o : {1, 2, 3, 6, 7, 8}) {
      EXPECT_GT((*hist)[0], 2.0 * (*hist)[o]) << o;
      EXPECT_GT(vertical, 2.0 * (*hist)[o]) << o;
    }
  }
}

TEST(Hog, DeterministicAndFinite) {
  const Image img = smooth_image(48, 40);
  const auto a = compute_fhog(img, 4);
  const auto b = compute_fhog(img, 4);
  for (int c = 0; c < 31; ++c) {
    EXPECT_TRUE((a[c] == b[c]).all());
    EXPECT_TRUE(a[c].isFinite().all());
    EXPECT_GE(a[c].minCoeff(), 0.0);
  }
}

TEST(Hog, FlatImageIsZero) {
  const auto h = compute_fhog(Image(16, 16, 1, 50.0f), 4);
  for (const auto& ch : h) EXPECT_EQ(ch.abs().maxCoeff(), 0.0);
}

TEST(Hog, RejectsNonMultipleSize) { EXPECT_THROW(compute_fhog(Image(10, 12, 1), 4), InvalidInput); }

TEST(Hog, ColourUsesStrongestChannel) {
  Image rgb(16, 16, 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      rgb.at(x, y, 0) = x < 8 ? 0.0f : 200.0f;  // strong vertical edge in red
      rgb.at(x, y, 1) = y < 8 ? 0.0f : 20.0f;   // weak horizontal edge in green
    }
  const PixelGradient g = pixel_gradient(rgb, 8, 3);
  EXPECT_EQ(g.bin, 0);
  EXPECT_NEAR(g.magnitude, 200.0, 1e-9);
}
