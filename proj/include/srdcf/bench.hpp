#pragma once

// Sequence ingestion (OTB layout), overlap metrics, predictions/metrics
// files, and seeded synthetic sequences.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "srdcf/box.hpp"
#include "srdcf/image_io.hpp"
#include "srdcf/tracker.hpp"

namespace srdcf {

namespace fs = std::filesystem;

struct Sequence {
  std::string name;
  std::vector<std::string> frames;
  std::vector<Box> groundTruth;  // empty when absent

  [[nodiscard]] bool has_ground_truth() const { return !groundTruth.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Splits on commas, tabs and spaces (runs of separators count once).
inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool sawComma = false;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      else if (ch == ',' && sawComma) out.emplace_back();  // empty field between commas
      sawComma = ch == ',';
      cur.clear();
    } else {
      cur.push_back(ch);
      sawComma = false;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline bool parse_double(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e && std::isfinite(v);
}

}  // namespace detail

/// Parses a box file, one "x,y,w,h" per line. `indexOffset` is subtracted
/// from x and y (1 for OTB ground truth, 0 for predictions).
inline std::vector<Box> parse_box_file(const std::string& path, double indexOffset) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path);
  std::vector<Box> boxes;
  std::string line;
  int lineNo = 0;
  std::vector<std::string> pendingBlank;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = detail::trim(line);
    if (t.empty()) {
      pendingBlank.push_back(std::to_string(lineNo));
      continue;
    }
    if (!pendingBlank.empty()) {
      throw IngestionError(path + ":" + pendingBlank.front() + ": blank line inside box list");
    }
    const auto fields = detail::split_fields(t);
    if (fields.size() != 4) {
      throw IngestionError(path + ":" + std::to_string(lineNo) + ": expected 4 numbers, got " +
                           std::to_string(fields.size()) + " fields");
    }
    double v[4];
    for (int k = 0; k < 4; ++k) {
      if (!detail::parse_double(fields[k], v[k])) {
        throw IngestionError(path + ":" + std::to_string(lineNo) + ": cannot parse \"" + fields[k] + "\"");
      }
    }
    if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
      throw IngestionError(path + ":" + std::to_string(lineNo) + ": box width and height must be positive");
    }
    boxes.push_back({v[0] - indexOffset, v[1] - indexOffset, v[2], v[3]});
  }
  return boxes;
}

inline bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".bmp" || ext == ".pgm" ||
         ext == ".ppm";
}

/// Loads `<dir>/img/*` (numeric names, no gaps) and, when present or
/// required, `<dir>/groundtruth_rect.txt` (1-indexed).
inline Sequence load_sequence(const std::string& dir, bool requireGroundTruth = true) {
  const fs::path root(dir);
  const fs::path imgDir = root / "img";
  if (!fs::is_directory(imgDir)) throw IngestionError("missing image directory " + imgDir.string());

  std::vector<std::pair<std::uint64_t, std::string>> numbered;
  for (const auto& entry : fs::directory_iterator(imgDir)) {
    if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), n);
    if (ec != std::errc() || p != stem.data() + stem.size()) {
      throw IngestionError("non-numeric frame name " + entry.path().string());
    }
    numbered.emplace_back(n, entry.path().string());
  }
  if (numbered.empty()) throw IngestionError("no frames in " + imgDir.string());
  std::sort(numbered.begin(), numbered.end());
  for (std::size_t i = 1; i < numbered.size(); ++i) {
    if (numbered[i].first == numbered[i - 1].first) {
      throw IngestionError("duplicate frame number " + std::to_string(numbered[i].first) + " in " +
                           imgDir.string());
    }
    if (numbered[i].first != numbered[i - 1].first + 1) {
      throw IngestionError("frame " + std::to_string(numbered[i - 1].first + 1) + " missing in " +
                           imgDir.string() + " (gap before " + fs::path(numbered[i].second).filename().string() + ")");
    }
  }

  Sequence seq;
  seq.name = root.filename().empty() ? root.parent_path().filename().string() : root.filename().string();
  for (auto& [n, path] : numbered) seq.frames.push_back(path);

  const fs::path gtPath = root / "groundtruth_rect.txt";
  if (fs::exists(gtPath)) {
    seq.groundTruth = parse_box_file(gtPath.string(), 1.0);
    if (seq.groundTruth.size() != seq.frames.size()) {
      throw IngestionError(gtPath.string() + ": " + std::to_string(seq.groundTruth.size()) +
                           " boxes for " + std::to_string(seq.frames.size()) + " frames");
    }
  } else if (requireGroundTruth) {
    throw IngestionError("missing ground truth " + gtPath.string());
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Metrics

inline double iou(const Box& a, const Box& b) {
  if (!(a.width > 0.0) || !(a.height > 0.0) || !(b.width > 0.0) || !(b.height > 0.0)) {
    throw InvalidInput("iou: boxes must have positive area");
  }
  const double iw = std::max(0.0, std::min(a.x + a.width, b.x + b.width) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.height, b.y + b.height) - std::max(a.y, b.y));
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

inline constexpr int kSuccessSamples = 101;

inline double success_threshold(int k) { return k / 100.0; }

struct EvalReport {
  std::vector<double> perFrameIoU;
  std::vector<double> successCurve;  // OP at thresholds 0.00, 0.01, ..., 1.00
  double opAtHalf = 0.0;
  double auc = 0.0;
};

/// OP(t) = fraction of frames with IoU > t; AUC is the mean of the curve.
inline EvalReport evaluate(const std::vector<Box>& predictions, const std::vector<Box>& groundTruth) {
  if (predictions.size() != groundTruth.size()) {
    throw InvalidInput("evaluate: " + std::to_string(predictions.size()) + " predictions for " +
                       std::to_string(groundTruth.size()) + " ground-truth boxes");
  }
  if (predictions.empty()) throw InvalidInput("evaluate: no frames");
  EvalReport r;
  r.perFrameIoU.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    r.perFrameIoU.push_back(iou(predictions[i], groundTruth[i]));
  }
  const double n = static_cast<double>(predictions.size());
  r.successCurve.resize(kSuccessSamples);
  for (int k = 0; k < kSuccessSamples; ++k) {
    const double t = success_threshold(k);
    const auto above = std::count_if(r.perFrameIoU.begin(), r.perFrameIoU.end(),
                                     [t](double v) { return v > t; });
    r.successCurve[k] = static_cast<double>(above) / n;
  }
  r.opAtHalf = r.successCurve[50];
  double sum = 0.0;
  for (double v : r.successCurve) sum += v;
  r.auc = sum / kSuccessSamples;
  return r;
}

inline double mean_iou(const EvalReport& r) {
  double s = 0.0;
  for (double v : r.perFrameIoU) s += v;
  return r.perFrameIoU.empty() ? 0.0 : s / static_cast<double>(r.perFrameIoU.size());
}

inline std::string format_box(const Box& b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.2f", b.x, b.y, b.width, b.height);
  return buf;
}

/// One 0-indexed "x,y,w,h" line per frame, two decimals.
inline void write_predictions(const std::string& path, const std::vector<Box>& boxes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& b : boxes) out << format_box(b) << '\n';
  if (!out) throw Error("write failed: " + path);
}

inline std::vector<Box> read_predictions(const std::string& path) { return parse_box_file(path, 0.0); }

inline void write_metrics_csv(const std::string& path, const EvalReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  char buf[96];
  out << "threshold,op\n";
  for (int k = 0; k < kSuccessSamples; ++k) {
    std::snprintf(buf, sizeof buf, "%.2f,%.6f\n", success_threshold(k), r.successCurve[k]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "# auc=%.6f op50=%.6f\n", r.auc, r.opAtHalf);
  out << buf;
  if (!out) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Running the tracker

struct TrackRun {
  std::vector<Box> boxes;
  double seconds = 0.0;

  [[nodiscard]] double fps() const {
    return seconds > 0.0 ? static_cast<double>(boxes.size()) / seconds : 0.0;
  }
};

/// Frame 0 reports `init`; later frames report the tracker state.
inline TrackRun track_frames(const std::vector<Image>& frames, const Box& init, const TrackerConfig& config) {
  if (frames.empty()) throw InvalidInput("track_frames: no frames");
  TrackRun run;
  const auto t0 = std::chrono::steady_clock::now();
  Tracker tracker = Tracker::init(frames.front(), init, config);
  run.boxes.push_back(init);
  for (std::size_t i = 1; i < frames.size(); ++i) run.boxes.push_back(tracker.step(frames[i]).box());
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

/// Streams frames from disk so long sequences stay out of memory.
inline TrackRun track_sequence(const Sequence& seq, const Box& init, const TrackerConfig& config) {
  if (seq.frames.empty()) throw InvalidInput("track_sequence: no frames");
  TrackRun run;
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Tracker> tracker;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const Image frame = read_image(seq.frames[i]);
    if (i == 0) {
      tracker.emplace(Tracker::init(frame, init, config));
      run.boxes.push_back(init);
    } else {
      run.boxes.push_back(tracker->step(frame).box());
    }
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

// ---------------------------------------------------------------------------
// Synthetic sequences

struct SynthSpec {
  int frames = 64;
  int width = 320;
  int height = 240;
  double targetWidth = 48.0;
  double targetHeight = 40.0;
  double motionX = 3.0;  // pixels per frame
  double motionY = 0.0;
  double scaleRate = 0.0;  // relative size growth per frame
  int clutter = 0;         // distractor patches near the path
  double textureCell = 8.0;

  void validate() const {
    if (frames < 2) throw InvalidInput("synth: need at least 2 frames");
    if (width < 8 || height < 8) throw InvalidInput("synth: frame too small");
    if (!(targetWidth >= 2.0) || !(targetHeight >= 2.0)) throw InvalidInput("synth: target too small");
    if (!(scaleRate > -1.0)) throw InvalidInput("synth: scale rate must exceed -1");
    if (clutter < 0) throw InvalidInput("synth: clutter count must be non-negative");
    if (!(textureCell >= 1.0)) throw InvalidInput("synth: texture cell must be at least 1 pixel");
  }
};

struct SynthSequence {
  std::vector<Image> frames;
  std::vector<Box> boxes;  // 0-indexed
};

namespace detail {

/// Deterministic 64-bit generator output mapped to [0, 1).
class UnitRng {
 public:
  explicit UnitRng(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

/// Two-octave value noise on a lattice, smoothstep-interpolated, in [0, 1].
class ValueNoise {
 public:
  ValueNoise(UnitRng& rng, double width, double height, double cell) : cell_(cell) {
    for (int o = 0; o < 2; ++o) {
      const double c = cell / (1 << o);
      Lattice l;
      l.cols = static_cast<int>(std::ceil(width / c)) + 2;
      l.rows = static_cast<int>(std::ceil(height / c)) + 2;
      l.cell = c;
      l.v.resize(static_cast<std::size_t>(l.rows) * l.cols);
      for (auto& x : l.v) x = rng.next();
      octaves_.push_back(std::move(l));
    }
  }

  [[nodiscard]] double at(double x, double y) const {
    return 0.65 * sample(octaves_[0], x, y) + 0.35 * sample(octaves_[1], x, y);
  }

 private:
  struct Lattice {
    int rows = 0;
    int cols = 0;
    double cell = 1.0;
    std::vector<double> v;
  };

  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

  static double sample(const Lattice& l, double x, double y) {
    const double gx = std::clamp(x / l.cell, 0.0, l.cols - 1.000001);
    const double gy = std::clamp(y / l.cell, 0.0, l.rows - 1.000001);
    const int ix = static_cast<int>(gx);
    const int iy = static_cast<int>(gy);
    const double tx = smooth(gx - ix);
    const double ty = smooth(gy - iy);
    auto v = [&](int r, int c) { return l.v[static_cast<std::size_t>(r) * l.cols + c]; };
    const double top = v(iy, ix) + tx * (v(iy, ix + 1) - v(iy, ix));
    const double bot = v(iy + 1, ix) + tx * (v(iy + 1, ix + 1) - v(iy + 1, ix));
    return top + ty * (bot - top);
  }

  double cell_;
  std::vector<Lattice> octaves_;
};

/// Overlap of pixel [p, p+1) with [lo, hi).
inline double coverage_1d(int p, double lo, double hi) {
  return std::max(0.0, std::min(p + 1.0, hi) - std::max(static_cast<double>(p), lo));
}

struct TexturedPatch {
  Box box;
  const ValueNoise* noise;
  double refWidth;  // texture is defined over the initial size
  double refHeight;
  double lo;
  double hi;
};

inline void paint_patch(Image& img, const TexturedPatch& p) {
  const int x0 = std::max(0, static_cast<int>(std::floor(p.box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(p.box.y)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(p.box.x + p.box.width)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(p.box.y + p.box.height)));
  for (int y = y0; y <= y1; ++y) {
    const double cy = coverage_1d(y, p.box.y, p.box.y + p.box.height);
    if (cy <= 0.0) continue;
    const double v = std::clamp((y + 0.5 - p.box.y) / p.box.height, 0.0, 1.0) * p.refHeight;
    for (int x = x0; x <= x1; ++x) {
      const double cov = cy * coverage_1d(x, p.box.x, p.box.x + p.box.width);
      if (cov <= 0.0) continue;
      const double u = std::clamp((x + 0.5 - p.box.x) / p.box.width, 0.0, 1.0) * p.refWidth;
      const double val = p.lo + (p.hi - p.lo) * p.noise->at(u, v);
      float& px = img.at(x, y);
      px = static_cast<float>(cov * val + (1.0 - cov) * px);
    }
  }
}

inline bool boxes_overlap(const Box& a, const Box& b, double margin) {
  return a.x - margin < b.x + b.width && b.x - margin < a.x + a.width && a.y - margin < b.y + b.height &&
         b.y - margin < a.y + a.height;
}

}  // namespace detail

inline constexpr double kBackgroundLo = 20.0;
inline constexpr double kBackgroundHi = 110.0;
inline constexpr double kTargetLo = 140.0;
inline constexpr double kTargetHi = 235.0;

/// Renders a textured rectangle translating and growing about its centre
/// over a textured background. Gray 8-bit levels, deterministic per seed.
inline SynthSequence render_synth(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  SynthSequence out;
  const double cx0 = 0.5 * spec.width - 0.5 * (spec.frames - 1) * spec.motionX;
  const double cy0 = 0.5 * spec.height - 0.5 * (spec.frames - 1) * spec.motionY;
  for (int t = 0; t < spec.frames; ++t) {
    const double s = std::pow(1.0 + spec.scaleRate, t);
    const Box b = Box::from_center(cx0 + t * spec.motionX, cy0 + t * spec.motionY, spec.targetWidth * s,
                                   spec.targetHeight * s);
    if (b.x + b.width <= 0.0 || b.y + b.height <= 0.0 || b.x >= spec.width || b.y >= spec.height) {
      throw InvalidInput("synth: target leaves the frame at frame " + std::to_string(t + 1));
    }
    out.boxes.push_back(b);
  }

  detail::UnitRng rng(seed);
  const detail::ValueNoise background(rng, spec.width, spec.height, spec.textureCell);
  const detail::ValueNoise target(rng, spec.targetWidth, spec.targetHeight, spec.textureCell * 0.5);

  // Distractors share the target's size and intensity band, placed beside
  // the path without touching the target in any frame.
  std::vector<detail::ValueNoise> clutterNoise;
  std::vector<Box> clutterBoxes;
  for (int c = 0; c < spec.clutter; ++c) {
    clutterNoise.emplace_back(rng, spec.targetWidth, spec.targetHeight, spec.textureCell * 0.5);
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Box& anchor = out.boxes[static_cast<std::size_t>(rng.next() * spec.frames)];
      const double angle = rng.next() * 2.0 * std::numbers::pi;
      const double dist = (1.1 + 0.6 * rng.next()) * std::hypot(anchor.width, anchor.height);
      const Box cand = Box::from_center(anchor.center_x() + dist * std::cos(angle),
                                        anchor.center_y() + dist * std::sin(angle), spec.targetWidth,
                                        spec.targetHeight);
      const bool inside = cand.x >= 0.0 && cand.y >= 0.0 && cand.x + cand.width <= spec.width &&
                          cand.y + cand.height <= spec.height;
      const bool clear = std::none_of(out.boxes.begin(), out.boxes.end(), [&](const Box& b) {
        return detail::boxes_overlap(cand, b, 2.0);
      });
      if (inside && clear) {
        clutterBoxes.push_back(cand);
        break;
      }
    }
  }

  for (int t = 0; t < spec.frames; ++t) {
    Image img(spec.width, spec.height, 1);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        img.at(x, y) = static_cast<float>(kBackgroundLo + (kBackgroundHi - kBackgroundLo) *
                                                               background.at(x + 0.5, y + 0.5));
      }
    }
    for (std::size_t c = 0; c < clutterBoxes.size(); ++c) {
      detail::paint_patch(img, {clutterBoxes[c], &clutterNoise[c], spec.targetWidth, spec.targetHeight,
                                kTargetLo, kTargetHi});
    }
    detail::paint_patch(img, {out.boxes[t], &target, spec.targetWidth, spec.targetHeight, kTargetLo,
                              kTargetHi});
    for (auto& v : img.data) v = std::round(v);  // 8-bit levels, identical to the written PNGs
    out.frames.push_back(std::move(img));
  }
  return out;
}

inline std::string frame_file_name(int index1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d.png", index1);
  return buf;
}

/// Writes `<dir>/img/0001.png ...` and a 1-indexed `<dir>/groundtruth_rect.txt`.
inline Sequence synth_sequence(const SynthSpec& spec, std::uint64_t seed, const std::string& dir) {
  const SynthSequence syn = render_synth(spec, seed);
  const fs::path root(dir);
  fs::create_directories(root / "img");
  Sequence seq;
  seq.name = root.filename().string();
  for (std::size_t t = 0; t < syn.frames.size(); ++t) {
    const fs::path p = root / "img" / frame_file_name(static_cast<int>(t) + 1);
    write_image(p.string(), syn.frames[t]);
    seq.frames.push_back(p.string());
  }
  std::ofstream gt(root / "groundtruth_rect.txt", std::ios::binary);
  if (!gt) throw Error("cannot write ground truth in " + dir);
  char buf[160];
  for (const Box& b : syn.boxes) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", b.x + 1.0, b.y + 1.0, b.width, b.height);
    gt << buf;
  }
  seq.groundTruth = syn.boxes;
  return seq;
}

}  // namespace srdcf
