#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "srdcf/bench.hpp"

using namespace srdcf;

namespace {

/// Fresh scratch directory under the build tree's temp area.
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("srdcf_bench_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_frames(const fs::path& seq, const std::vector<int>& numbers) {
  fs::create_directories(seq / "img");
  for (int n : numbers) write_image((seq / "img" / frame_file_name(n)).string(), Image(16, 12, 1, 90.0f));
}

/// Box with a prescribed IoU against (0, 0, 10, 10): same height, shifted.
Box shifted_box(double targetIoU) {
  // Overlap width o: o*10 / (200 - o*10) = t  ->  o = 20 t / (1 + t).
  const double o = 20.0 * targetIoU / (1.0 + targetIoU);
  return {10.0 - o, 0.0, 10.0, 10.0};
}

}  // namespace

TEST(LoadSequence, FixtureRoundTrip) {
  const fs::path seq = scratch("fixture");
  write_frames(seq, {1, 2, 3});
  write_text(seq / "groundtruth_rect.txt", "10,20,30,40\n11\t21\t31\t41\n12 22 32 42\n");
  const Sequence s = load_sequence(seq.string());
  ASSERT_EQ(s.frames.size(), 3u);
  ASSERT_EQ(s.groundTruth.size(), 3u);
  EXPECT_EQ(s.groundTruth[0], (Box{9, 19, 30, 40}));
  EXPECT_EQ(s.groundTruth[1], (Box{10, 20, 31, 41}));
  EXPECT_EQ(s.groundTruth[2], (Box{11, 21, 32, 42}));
  EXPECT_EQ(fs::path(s.frames[2]).filename(), "0003.png");
  EXPECT_EQ(s.name, "srdcf_bench_fixture");
}

TEST(LoadSequence, OneIndexedConversion) {
  const fs::path seq = scratch("index");
  write_frames(seq, {1});
  write_text(seq / "groundtruth_rect.txt", "12.5,30,40,60\n");
  const Sequence s = load_sequence(seq.string());
  EXPECT_EQ(s.groundTruth[0], (Box{11.5, 29, 40, 60}));
}

TEST(LoadSequence, NumericOrderNotLexicographic) {
  const fs::path seq = scratch("order");
  fs::create_directories(seq / "img");
  for (int n : {9, 10, 8}) write_image((seq / "img" / (std::to_string(n) + ".png")).string(), Image(4, 4, 1));
  const Sequence s = load_sequence(seq.string(), false);
  ASSERT_EQ(s.frames.size(), 3u);
  EXPECT_EQ(fs::path(s.frames[0]).stem(), "8");
  EXPECT_EQ(fs::path(s.frames[2]).stem(), "10");
  EXPECT_FALSE(s.has_ground_truth());
}

TEST(LoadSequence, GapIsNamed) {
  const fs::path seq = scratch("gap");
  write_frames(seq, {1, 3});
  write_text(seq / "groundtruth_rect.txt", "1,1,2,2\n1,1,2,2\n");
  try {
    load_sequence(seq.string());
    FAIL() << "expected an ingestion error";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 2 missing"), std::string::npos) << e.what();
  }
}

TEST(LoadSequence, BadLinesCarryLineNumbers) {
  const fs::path seq = scratch("badline");
  write_frames(seq, {1, 2});
  write_text(seq / "groundtruth_rect.txt", "1,1,2,2\n1,x,2,2\n");
  try {
    load_sequence(seq.string());
    FAIL() << "expected an ingestion error";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  write_text(seq / "groundtruth_rect.txt", "1,1,2,2\n");
  EXPECT_THROW(load_sequence(seq.string()), IngestionError);
  write_text(seq / "groundtruth_rect.txt", "1,1,2,2\n1,1,0,2\n");
  EXPECT_THROW(load_sequence(seq.string()), IngestionError);
  fs::remove(seq / "groundtruth_rect.txt");
  EXPECT_THROW(load_sequence(seq.string()), IngestionError);
  EXPECT_NO_THROW(load_sequence(seq.string(), false));
  EXPECT_THROW(load_sequence((seq / "nope").string()), IngestionError);
}

TEST(LoadSequenceProperty, BoxValuesSurviveWriteAndLoad) {
  oracle::Rng rng(41);
  const fs::path seq = scratch("roundtrip");
  write_frames(seq, {1, 2, 3, 4, 5});
  std::vector<Box> boxes;
  std::string text;
  char buf[160];
  for (int i = 0; i < 5; ++i) {
    const Box b{rng.uniform(0, 300), rng.uniform(0, 200), rng.uniform(1, 80), rng.uniform(1, 80)};
    boxes.push_back(b);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", b.x + 1, b.y + 1, b.width, b.height);
    text += buf;
  }
  write_text(seq / "groundtruth_rect.txt", text);
  const Sequence s = load_sequence(seq.string());
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(s.groundTruth[i].x, boxes[i].x, 1e-9);
    EXPECT_NEAR(s.groundTruth[i].y, boxes[i].y, 1e-9);
    EXPECT_NEAR(s.groundTruth[i].width, boxes[i].width, 1e-9);
    EXPECT_NEAR(s.groundTruth[i].height, boxes[i].height, 1e-9);
  }
}

TEST(Iou, ClosedForms) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {5, 5, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {2, 0, 2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 0, 2, 2}), 1.0 / 3.0);
  EXPECT_THROW(iou({0, 0, 0, 2}, {1, 0, 2, 2}), InvalidInput);
}

TEST(IouProperty, SymmetricAndBounded) {
  oracle::Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const Box a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.1, 6), rng.uniform(0.1, 6)};
    const Box b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.1, 6), rng.uniform(0.1, 6)};
    EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
  }
}

TEST(Evaluate, IdentityPredictions) {
  const std::vector<Box> gt = {{0, 0, 10, 10}, {5, 5, 20, 10}};
  const EvalReport r = evaluate(gt, gt);
  EXPECT_DOUBLE_EQ(r.opAtHalf, 1.0);
  EXPECT_DOUBLE_EQ(r.successCurve[100], 0.0);
  EXPECT_NEAR(r.auc, 100.0 / 101.0, 1e-15);
}

TEST(Evaluate, DisjointPredictions) {
  const EvalReport r = evaluate({{100, 100, 5, 5}}, {{0, 0, 5, 5}});
  EXPECT_EQ(r.opAtHalf, 0.0);
  EXPECT_EQ(r.auc, 0.0);
}

TEST(Evaluate, FourFrameFixture) {
  std::vector<Box> pred;
  std::vector<Box> gt;
  for (double t : {0.9, 0.6, 0.4, 0.2}) {
    pred.push_back(shifted_box(t));
    gt.push_back({0, 0, 10, 10});
  }
  const EvalReport r = evaluate(pred, gt);
  EXPECT_NEAR(r.perFrameIoU[0], 0.9, 1e-12);
  EXPECT_NEAR(r.perFrameIoU[3], 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(r.opAtHalf, 0.5);
}

TEST(Evaluate, StrictThreshold) {
  // IoU exactly 0.5 does not count at threshold 0.50.
  const EvalReport r = evaluate({{0, 0, 2, 1}}, {{0, 0, 1, 1}});
  EXPECT_DOUBLE_EQ(r.perFrameIoU[0], 0.5);
  EXPECT_DOUBLE_EQ(r.successCurve[49], 1.0);
  EXPECT_DOUBLE_EQ(r.opAtHalf, 0.0);
}

TEST(Evaluate, LengthMismatchThrows) {
  EXPECT_THROW(evaluate({{0, 0, 1, 1}}, {}), InvalidInput);
  EXPECT_THROW(evaluate({}, {}), InvalidInput);
}

TEST(EvaluateProperty, CurveShapeAndPermutation) {
  oracle::Rng rng(43);
  for (int t = 0; t < 20; ++t) {
    std::vector<Box> pred;
    std::vector<Box> gt;
    const int n = rng.integer(1, 30);
    for (int i = 0; i < n; ++i) {
      gt.push_back({rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(1, 8), rng.uniform(1, 8)});
      pred.push_back({rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(1, 8), rng.uniform(1, 8)});
    }
    const EvalReport r = evaluate(pred, gt);
    ASSERT_EQ(r.successCurve.size(), 101u);
    for (int k = 1; k < 101; ++k) EXPECT_LE(r.successCurve[k], r.successCurve[k - 1]);
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
    EXPECT_EQ(r.opAtHalf, r.successCurve[50]);
    std::reverse(pred.begin(), pred.end());
    std::reverse(gt.begin(), gt.end());
    const EvalReport back = evaluate(pred, gt);
    EXPECT_EQ(back.successCurve, r.successCurve);
    for (int i = 0; i < n; ++i) EXPECT_EQ(back.perFrameIoU[i], r.perFrameIoU[n - 1 - i]);
  }
}

TEST(Outputs, PredictionsFormat) {
  const fs::path dir = scratch("pred");
  write_predictions((dir / "p.txt").string(), {{1.234, 5, 10.005, 20}, {-3.5, 0, 1, 2}});
  EXPECT_EQ(slurp(dir / "p.txt"), "1.23,5.00,10.01,20.00\n-3.50,0.00,1.00,2.00\n");
  const auto back = read_predictions((dir / "p.txt").string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back[0].x, 1.23);
}

TEST(Outputs, MetricsCsvLayout) {
  const fs::path dir = scratch("csv");
  const std::vector<Box> gt = {{0, 0, 10, 10}};
  write_metrics_csv((dir / "m.csv").string(), evaluate(gt, gt));
  std::ifstream in(dir / "m.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 103u);
  EXPECT_EQ(lines[0], "threshold,op");
  EXPECT_EQ(lines[1], "0.00,1.000000");
  EXPECT_EQ(lines[101], "1.00,0.000000");
  EXPECT_EQ(lines[102].rfind("# auc=", 0), 0u);
  EXPECT_NE(lines[102].find("op50=1.000000"), std::string::npos);
}

TEST(Synth, ZeroMotionKeepsBox) {
  SynthSpec s;
  s.frames = 5;
  s.motionX = 0;
  const SynthSequence q = render_synth(s, 1);
  for (const Box& b : q.boxes) EXPECT_EQ(b, q.boxes[0]);
  EXPECT_DOUBLE_EQ(q.boxes[0].center_x(), 160.0);
}

TEST(Synth, ArithmeticMotion) {
  SynthSpec s;
  s.frames = 10;
  s.motionX = 3;
  const SynthSequence q = render_synth(s, 1);
  for (int t = 1; t < 10; ++t) EXPECT_NEAR(q.boxes[t].x - q.boxes[t - 1].x, 3.0, 1e-12);
  EXPECT_EQ(q.frames.size(), 10u);
}

TEST(Synth, GrowthAboutCentre) {
  SynthSpec s;
  s.frames = 11;
  s.motionX = 0;
  s.scaleRate = 0.01;
  const SynthSequence q = render_synth(s, 1);
  EXPECT_NEAR(q.boxes[10].width, 48.0 * std::pow(1.01, 10), 1e-9);
  EXPECT_NEAR(q.boxes[10].center_x(), q.boxes[0].center_x(), 1e-9);
}

TEST(Synth, TargetBrighterThanBackground) {
  SynthSpec s;
  s.frames = 2;
  const SynthSequence q = render_synth(s, 3);
  const Box& b = q.boxes[0];
  const Image& img = q.frames[0];
  for (int y = 0; y < img.height; y += 7)
    for (int x = 0; x < img.width; x += 7) {
      const float v = img.at(x, y);
      EXPECT_EQ(v, std::round(v));
      const bool inside = x >= b.x + 1 && x + 1 <= b.x + b.width - 1 && y >= b.y + 1 && y + 1 <= b.y + b.height - 1;
      const bool outside = x + 1 < b.x || x > b.x + b.width || y + 1 < b.y || y > b.y + b.height;
      if (inside) EXPECT_GE(v, 140.0f);
      if (outside) EXPECT_LE(v, 110.0f);
    }
}

TEST(Synth, ClutterStaysOffTarget) {
  SynthSpec s;
  s.frames = 20;
  s.clutter = 6;
  const SynthSequence with = render_synth(s, 5);
  // Pixels inside the target box are unaffected by distractors.
  s.clutter = 0;
  const SynthSequence without = render_synth(s, 5);
  const Box& b = with.boxes[10];
  for (int y = static_cast<int>(b.y) + 1; y < b.y + b.height - 1; ++y)
    for (int x = static_cast<int>(b.x) + 1; x < b.x + b.width - 1; ++x)
      EXPECT_EQ(with.frames[10].at(x, y), without.frames[10].at(x, y));
  double diff = 0.0;
  for (std::size_t i = 0; i < with.frames[10].data.size(); ++i)
    diff += std::abs(with.frames[10].data[i] - without.frames[10].data[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(Synth, ValidationErrors) {
  SynthSpec s;
  s.frames = 1;
  EXPECT_THROW(render_synth(s, 1), InvalidInput);
  s.frames = 64;
  s.motionX = 20;
  EXPECT_THROW(render_synth(s, 1), InvalidInput);
}

TEST(Synth, FixedSeedByteIdenticalFiles) {
  SynthSpec s;
  s.frames = 3;
  const fs::path a = scratch("synth_a");
  const fs::path b = scratch("synth_b");
  synth_sequence(s, 77, a.string());
  synth_sequence(s, 77, b.string());
  for (int i = 1; i <= 3; ++i)
    EXPECT_EQ(slurp(a / "img" / frame_file_name(i)), slurp(b / "img" / frame_file_name(i)));
  EXPECT_EQ(slurp(a / "groundtruth_rect.txt"), slurp(b / "groundtruth_rect.txt"));
  const fs::path c = scratch("synth_c");
  synth_sequence(s, 78, c.string());
  EXPECT_NE(slurp(a / "img" / frame_file_name(1)), slurp(c / "img" / frame_file_name(1)));

  // Written files load back to the rendered frames and boxes.
  const Sequence loaded = load_sequence(a.string());
  const SynthSequence direct = render_synth(s, 77);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(loaded.groundTruth[i].x, direct.boxes[i].x, 1e-9);
    const Image img = read_image(loaded.frames[i]);
    EXPECT_EQ(img.data, direct.frames[i].data);
  }
}
