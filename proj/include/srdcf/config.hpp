#pragma once

#include <string>

#include "srdcf/error.hpp"
#include "srdcf/features.hpp"

namespace srdcf {

enum class RegMode { Srdcf, Uniform };

struct TrackerConfig {
  double mu = 0.1;
  double eta = 3.0;
  double gamma = 0.025;
  int nGS = 4;
  int nNe = 5;
  int numScales = 5;
  double scaleStep = 1.02;
  int cellSize = 4;
  double sampleAreaFactor = 16.0;
  int maxGridSize = 50;
  double labelSigmaFactor = 1.0 / 16.0;
  FeatureKind featureKind = FeatureKind::Hog;
  RegMode regMode = RegMode::Srdcf;
  double lambda = 0.01;  // uniform mode only
  int targetNnz = 10;
  bool grayMeanRemoval = true;
  double regJitter = 0.0;

  bool operator==(const TrackerConfig&) const = default;

  /// Throws InvalidConfig naming the first offending field.
  void validate() const {
    auto fail = [](const std::string& what) { throw InvalidConfig("config: " + what); };
    if (!(mu > 0.0)) fail("mu must be positive");
    if (!(eta >= 0.0)) fail("eta must be non-negative");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
    if (nGS < 1) fail("nGS must be at least 1");
    if (nNe < 0) fail("nNe must be non-negative");
    if (numScales < 1 || numScales % 2 == 0) fail("numScales must be odd and at least 1");
    if (!(scaleStep > 1.0)) fail("scaleStep must exceed 1");
    if (cellSize < 1) fail("cellSize must be positive");
    if (!(sampleAreaFactor >= 1.0)) fail("sampleAreaFactor must be at least 1");
    if (maxGridSize < 1) fail("maxGridSize must be positive");
    if (!(labelSigmaFactor > 0.0)) fail("labelSigmaFactor must be positive");
    if (!(lambda > 0.0)) fail("lambda must be positive");
    if (targetNnz < 1) fail("targetNnz must be positive");
    if (!(regJitter >= 0.0)) fail("regJitter must be non-negative");
  }
};

inline std::string to_string(FeatureKind k) { return k == FeatureKind::Hog ? "hog" : "grayscale"; }
inline std::string to_string(RegMode m) { return m == RegMode::Srdcf ? "srdcf" : "uniform"; }

inline FeatureKind parse_feature_kind(const std::string& s) {
  if (s == "hog") return FeatureKind::Hog;
  if (s == "grayscale") return FeatureKind::Grayscale;
  throw InvalidConfig("config: featureKind must be \"hog\" or \"grayscale\", got \"" + s + "\"");
}

inline RegMode parse_reg_mode(const std::string& s) {
  if (s == "srdcf") return RegMode::Srdcf;
  if (s == "uniform") return RegMode::Uniform;
  throw InvalidConfig("config: regMode must be \"srdcf\" or \"uniform\", got \"" + s + "\"");
}

}  // namespace srdcf
