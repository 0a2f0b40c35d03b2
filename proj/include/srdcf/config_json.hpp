#pragma once

// JSON form of TrackerConfig. Absent keys keep their defaults; unknown keys
// and wrongly typed values are rejected with the key name in the message.

#include <json.hpp>

#include <functional>
#include <map>
#include <string>

#include "srdcf/config.hpp"

namespace srdcf {

inline nlohmann::ordered_json config_to_json(const TrackerConfig& c) {
  nlohmann::ordered_json j;
  j["mu"] = c.mu;
  j["eta"] = c.eta;
  j["gamma"] = c.gamma;
  j["nGS"] = c.nGS;
  j["nNe"] = c.nNe;
  j["numScales"] = c.numScales;
  j["scaleStep"] = c.scaleStep;
  j["cellSize"] = c.cellSize;
  j["sampleAreaFactor"] = c.sampleAreaFactor;
  j["maxGridSize"] = c.maxGridSize;
  j["labelSigmaFactor"] = c.labelSigmaFactor;
  j["featureKind"] = to_string(c.featureKind);
  j["regMode"] = to_string(c.regMode);
  j["lambda"] = c.lambda;
  j["targetNnz"] = c.targetNnz;
  j["grayMeanRemoval"] = c.grayMeanRemoval;
  j["regJitter"] = c.regJitter;
  return j;
}

namespace detail {

template <typename T>
T json_get(const nlohmann::json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw InvalidConfig("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw InvalidConfig("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw InvalidConfig("");
    } else {
      if (!v.is_string()) throw InvalidConfig("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw InvalidConfig("config: key \"" + key + "\" has the wrong type");
  }
}

}  // namespace detail

/// Applies the keys of `j` on top of `base`. Keys listed in `extraKeys` are
/// skipped rather than rejected.
inline TrackerConfig config_from_json(const nlohmann::json& j, TrackerConfig base = {},
                                      const std::vector<std::string>& extraKeys = {}) {
  if (!j.is_object()) throw InvalidConfig("config: top level must be a JSON object");
  using Setter = std::function<void(TrackerConfig&, const nlohmann::json&, const std::string&)>;
  auto num = [](double TrackerConfig::*f) -> Setter {
    return [f](TrackerConfig& c, const nlohmann::json& v, const std::string& k) {
      c.*f = detail::json_get<double>(v, k);
    };
  };
  auto integer = [](int TrackerConfig::*f) -> Setter {
    return [f](TrackerConfig& c, const nlohmann::json& v, const std::string& k) {
      c.*f = detail::json_get<int>(v, k);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"mu", num(&TrackerConfig::mu)},
      {"eta", num(&TrackerConfig::eta)},
      {"gamma", num(&TrackerConfig::gamma)},
      {"nGS", integer(&TrackerConfig::nGS)},
      {"nNe", integer(&TrackerConfig::nNe)},
      {"numScales", integer(&TrackerConfig::numScales)},
      {"scaleStep", num(&TrackerConfig::scaleStep)},
      {"cellSize", integer(&TrackerConfig::cellSize)},
      {"sampleAreaFactor", num(&TrackerConfig::sampleAreaFactor)},
      {"maxGridSize", integer(&TrackerConfig::maxGridSize)},
      {"labelSigmaFactor", num(&TrackerConfig::labelSigmaFactor)},
      {"featureKind",
       [](TrackerConfig& c, const nlohmann::json& v, const std::string& k) {
         c.featureKind = parse_feature_kind(detail::json_get<std::string>(v, k));
       }},
      {"regMode",
       [](TrackerConfig& c, const nlohmann::json& v, const std::string& k) {
         c.regMode = parse_reg_mode(detail::json_get<std::string>(v, k));
       }},
      {"lambda", num(&TrackerConfig::lambda)},
      {"targetNnz", integer(&TrackerConfig::targetNnz)},
      {"grayMeanRemoval",
       [](TrackerConfig& c, const nlohmann::json& v, const std::string& k) {
         c.grayMeanRemoval = detail::json_get<bool>(v, k);
       }},
      {"regJitter", num(&TrackerConfig::regJitter)},
  };
  TrackerConfig c = base;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(extraKeys.begin(), extraKeys.end(), it.key()) != extraKeys.end()) continue;
    auto s = setters.find(it.key());
    if (s == setters.end()) throw InvalidConfig("config: unknown key \"" + it.key() + "\"");
    s->second(c, it.value(), it.key());
  }
  return c;
}

/// Parses JSON text; syntax errors become InvalidConfig.
inline nlohmann::json parse_json_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(std::string("config: malformed JSON: ") + e.what());
  }
}

}  // namespace srdcf
