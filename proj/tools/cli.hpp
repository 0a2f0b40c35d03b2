#pragma once

// Command-line front end: track, eval, synth and batch subcommands.
// Exit codes: 0 success, 2 input/config error, 3 tracking error.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srdcf/bench.hpp"
#include "srdcf/config_json.hpp"
#include "srdcf/snapshot.hpp"

namespace srdcf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitTracking = 3;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Level from SRDCF_LOG (error, info, debug); unset or unknown means error.
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("SRDCF_LOG");
  if (v == nullptr) return LogLevel::Error;
  const std::string s(v);
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Error;
}

class Logger {
 public:
  Logger(std::ostream& err, LogLevel level) : err_(err), level_(level) {}

  void error(const std::string& msg) { write(LogLevel::Error, "error", msg); }
  void info(const std::string& msg) { write(LogLevel::Info, "info", msg); }
  void debug(const std::string& msg) { write(LogLevel::Debug, "debug", msg); }

 private:
  void write(LogLevel lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(level_)) return;
    std::lock_guard<std::mutex> lock(mu_);
    err_ << "srdcf [" << tag << "] " << msg << '\n';
  }

  std::ostream& err_;
  LogLevel level_;
  std::mutex mu_;
};

/// Parses "a,b" or "a,b,c,d" style lists of numbers.
inline std::vector<double> parse_number_list(const std::string& s, std::size_t count, const std::string& what) {
  std::vector<double> out;
  for (const auto& f : detail::split_fields(s)) {
    double v = 0.0;
    if (!detail::parse_double(f, v)) throw InvalidInput(what + ": cannot parse \"" + f + "\"");
    out.push_back(v);
  }
  if (out.size() != count) {
    throw InvalidInput(what + ": expected " + std::to_string(count) + " comma-separated numbers");
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Tracker settings plus the optional "seq", "out" and "init" path keys.
struct RunConfig {
  TrackerConfig tracker;
  std::string seq;
  std::string out;
  std::optional<Box> init;
};

inline RunConfig load_run_config(const std::string& path) {
  RunConfig rc;
  if (path.empty()) return rc;
  const nlohmann::json j = parse_json_text(read_text_file(path));
  rc.tracker = config_from_json(j, {}, {"seq", "out", "init"});
  rc.tracker.validate();
  auto str = [&](const char* key, std::string& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw InvalidConfig(std::string("config: key \"") + key + "\" must be a string");
    dst = j[key].get<std::string>();
  };
  str("seq", rc.seq);
  str("out", rc.out);
  if (j.contains("init")) {
    const auto& v = j["init"];
    if (!v.is_array() || v.size() != 4) throw InvalidConfig("config: key \"init\" must be [x, y, w, h]");
    std::array<double, 4> b{};
    for (int k = 0; k < 4; ++k) {
      if (!v[k].is_number()) throw InvalidConfig("config: key \"init\" must be [x, y, w, h]");
      b[k] = v[k].get<double>();
    }
    rc.init = Box{b[0], b[1], b[2], b[3]};
  }
  return rc;
}

inline void write_effective_config(const std::string& path, const RunConfig& rc) {
  nlohmann::ordered_json j = config_to_json(rc.tracker);
  j["seq"] = rc.seq;
  j["out"] = rc.out;
  if (rc.init) j["init"] = {rc.init->x, rc.init->y, rc.init->width, rc.init->height};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

/// Initial box: explicit, else the first ground-truth box, else init_rect.txt.
inline Box resolve_init_box(const Sequence& seq, const std::string& dir, const std::optional<Box>& init) {
  if (init) return *init;
  if (seq.has_ground_truth()) return seq.groundTruth.front();
  const auto alt = std::filesystem::path(dir) / "init_rect.txt";
  if (std::filesystem::exists(alt)) {
    const auto boxes = parse_box_file(alt.string(), 1.0);
    if (!boxes.empty()) return boxes.front();
  }
  throw IngestionError("no initial box: pass --init or provide groundtruth_rect.txt in " + dir);
}

struct TrackArgs {
  std::string seq;
  std::string config;
  std::string out;
  std::string init;
  std::string snapshot;
};

inline int cmd_track(const TrackArgs& args, std::ostream& out, Logger& log) {
  RunConfig rc;
  Sequence seq;
  Box init;
  try {
    rc = load_run_config(args.config);
    if (!args.seq.empty()) rc.seq = args.seq;
    if (!args.out.empty()) rc.out = args.out;
    if (!args.init.empty()) {
      const auto v = parse_number_list(args.init, 4, "--init");
      rc.init = Box{v[0], v[1], v[2], v[3]};
    }
    if (rc.seq.empty()) throw InvalidInput("track: no sequence directory given");
    if (rc.out.empty()) throw InvalidInput("track: no output file given");
    seq = load_sequence(rc.seq, false);
    init = resolve_init_box(seq, rc.seq, rc.init);
    write_effective_config(rc.out + ".config.json", rc);
  } catch (const Error& e) {
    log.error(e.what());
    return kExitInput;
  }
  log.info("tracking " + seq.name + ": " + std::to_string(seq.frames.size()) + " frames");

  TrackRun run;
  try {
    Sequence s = seq;
    run.seconds = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Tracker> tracker;
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Image frame = read_image(s.frames[i]);
      if (i == 0) {
        tracker.emplace(Tracker::init(frame, init, rc.tracker));
        run.boxes.push_back(init);
        const auto& g = tracker->geometry();
        log.debug("grid " + std::to_string(g.gridSize) + "x" + std::to_string(g.gridSize) + ", K=" +
                  std::to_string(tracker->weights().K()) + ", unknowns=" +
                  std::to_string(tracker->model().fReal.size()));
      } else {
        run.boxes.push_back(tracker->step(frame).box());
        const Detection& d = tracker->last_detection();
        log.debug("frame " + std::to_string(i + 1) + ": r=" + std::to_string(d.scaleIndex) +
                  " score=" + std::to_string(d.score) + " newton=" + std::to_string(d.newtonIters));
      }
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_predictions(rc.out, run.boxes);
    if (!args.snapshot.empty() && tracker) save_snapshot(args.snapshot, tracker->model());
  } catch (const IngestionError& e) {
    log.error(e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    log.error(std::string("tracking failed: ") + e.what());
    return kExitTracking;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "frames=%zu seconds=%.3f fps=%.2f\n", run.boxes.size(), run.seconds,
                run.fps());
  out << buf;
  return kExitOk;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string curve;
};

inline int cmd_eval(const EvalArgs& args, std::ostream& out, Logger& log) {
  try {
    const auto pred = read_predictions(args.pred);
    const auto gt = parse_box_file(args.gt, 1.0);
    const EvalReport r = evaluate(pred, gt);
    if (!args.curve.empty()) write_metrics_csv(args.curve, r);
    char buf[128];
    std::snprintf(buf, sizeof buf, "op50=%.4f auc=%.4f mean_iou=%.4f\n", r.opAtHalf, r.auc, mean_iou(r));
    out << buf;
  } catch (const Error& e) {
    log.error(e.what());
    return kExitInput;
  }
  return kExitOk;
}

struct SynthArgs {
  std::string out;
  int frames = 64;
  std::uint64_t seed = 1;
  std::string motion = "3,0";
  double scaleRate = 0.0;
  int clutter = 0;
  int width = 320;
  int height = 240;
  std::string target = "48,40";
};

inline int cmd_synth(const SynthArgs& args, std::ostream& out, Logger& log) {
  try {
    if (args.out.empty()) throw InvalidInput("synth: no output directory given");
    SynthSpec spec;
    spec.frames = args.frames;
    const auto m = parse_number_list(args.motion, 2, "--motion");
    spec.motionX = m[0];
    spec.motionY = m[1];
    const auto t = parse_number_list(args.target, 2, "--target");
    spec.targetWidth = t[0];
    spec.targetHeight = t[1];
    spec.scaleRate = args.scaleRate;
    spec.clutter = args.clutter;
    spec.width = args.width;
    spec.height = args.height;
    const Sequence seq = synth_sequence(spec, args.seed, args.out);
    out << "wrote " << seq.frames.size() << " frames to " << args.out << '\n';
  } catch (const Error& e) {
    log.error(e.what());
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    log.error(e.what());
    return kExitInput;
  }
  return kExitOk;
}

struct BatchArgs {
  std::vector<std::string> seqs;
  std::string config;
  std::string outDir;
  int jobs = 1;
};

/// Tracks several sequences, one tracker per worker. Output files are named
/// after the sequence directory; the summary is printed in input order.
inline int cmd_batch(const BatchArgs& args, std::ostream& out, Logger& log) {
  RunConfig rc;
  try {
    rc = load_run_config(args.config);
    if (args.seqs.empty()) throw InvalidInput("batch: no sequences given");
    if (args.jobs < 1) throw InvalidInput("batch: --jobs must be at least 1");
    if (args.outDir.empty()) throw InvalidInput("batch: no output directory given");
    std::filesystem::create_directories(args.outDir);
    write_effective_config((std::filesystem::path(args.outDir) / "config.json").string(), rc);
  } catch (const Error& e) {
    log.error(e.what());
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    log.error(e.what());
    return kExitInput;
  }

  struct Result {
    std::string line;
    int code = kExitOk;
  };
  std::vector<Result> results(args.seqs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < args.seqs.size(); i = next++) {
      const std::string& dir = args.seqs[i];
      Result& res = results[i];
      try {
        const Sequence seq = load_sequence(dir, false);
        const Box init = resolve_init_box(seq, dir, rc.init);
        const TrackRun run = track_sequence(seq, init, rc.tracker);
        const auto base = std::filesystem::path(args.outDir) / seq.name;
        write_predictions(base.string() + ".txt", run.boxes);
        char buf[256];
        if (seq.has_ground_truth()) {
          const EvalReport r = evaluate(run.boxes, seq.groundTruth);
          write_metrics_csv(base.string() + "_metrics.csv", r);
          std::snprintf(buf, sizeof buf, "%s frames=%zu fps=%.2f op50=%.4f auc=%.4f", seq.name.c_str(),
                        run.boxes.size(), run.fps(), r.opAtHalf, r.auc);
        } else {
          std::snprintf(buf, sizeof buf, "%s frames=%zu fps=%.2f", seq.name.c_str(), run.boxes.size(),
                        run.fps());
        }
        res.line = buf;
        log.info(res.line);
      } catch (const IngestionError& e) {
        res.code = kExitInput;
        res.line = dir + " error: " + e.what();
      } catch (const InvalidInput& e) {
        res.code = kExitInput;
        res.line = dir + " error: " + e.what();
      } catch (const std::exception& e) {
        res.code = kExitTracking;
        res.line = dir + " tracking failed: " + e.what();
      }
    }
  };
  const int n = std::min<int>(args.jobs, static_cast<int>(args.seqs.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int code = kExitOk;
  for (const auto& r : results) {
    out << r.line << '\n';
    if (r.code != kExitOk) {
      log.error(r.line);
      code = std::max(code, r.code);
    }
  }
  return code;
}

/// Parses argv and dispatches; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Logger log(err, log_level_from_env());
  CLI::App app{"Spatially regularized correlation filter tracker"};
  app.require_subcommand(1);

  TrackArgs track;
  auto* t = app.add_subcommand("track", "Track a sequence and write predictions");
  t->add_option("--seq", track.seq, "Sequence directory (img/ and optional groundtruth_rect.txt)");
  t->add_option("--config", track.config, "JSON configuration file");
  t->add_option("--out", track.out, "Predictions file");
  t->add_option("--init", track.init, "Initial box x,y,w,h (0-indexed)");
  t->add_option("--snapshot", track.snapshot, "Write the final model snapshot here");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score predictions against ground truth");
  e->add_option("--pred", eval.pred, "Predictions file (0-indexed)")->required();
  e->add_option("--gt", eval.gt, "Ground-truth file (1-indexed)")->required();
  e->add_option("--curve", eval.curve, "Success-curve CSV output");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic sequence");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--frames", synth.frames, "Frame count")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--motion", synth.motion, "Per-frame motion dx,dy in pixels")->capture_default_str();
  s->add_option("--scale-rate", synth.scaleRate, "Relative size growth per frame")->capture_default_str();
  s->add_option("--clutter", synth.clutter, "Distractor patches near the path")->capture_default_str();
  s->add_option("--width", synth.width, "Frame width")->capture_default_str();
  s->add_option("--height", synth.height, "Frame height")->capture_default_str();
  s->add_option("--target", synth.target, "Initial target size w,h")->capture_default_str();

  BatchArgs batch;
  auto* b = app.add_subcommand("batch", "Track several sequences in parallel");
  b->add_option("--seqs", batch.seqs, "Sequence directories")->required();
  b->add_option("--config", batch.config, "JSON configuration file");
  b->add_option("--out-dir", batch.outDir, "Output directory")->required();
  b->add_option("--jobs", batch.jobs, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    log.error(pe.what());
    return kExitInput;
  }
  try {
    if (t->parsed()) return cmd_track(track, out, log);
    if (e->parsed()) return cmd_eval(eval, out, log);
    if (s->parsed()) return cmd_synth(synth, out, log);
    if (b->parsed()) return cmd_batch(batch, out, log);
  } catch (const std::exception& ex) {
    log.error(ex.what());
    return kExitTracking;
  }
  return kExitInput;
}

}  // namespace srdcf::cli
