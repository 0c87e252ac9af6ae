#pragma once

// Runtime tunables. JSON file with any subset of:
//   {"scene_dir": "...", "d_m": 5000, "presets": [...], "k_flight": 0.15,
//    "forward_speed": 15, "collision_radius": 1,
//    "thresholds": {"displacement_deg": 10, "velocity_deg_s": 20,
//                   "realign_rate_deg_s": 90, "deadband_deg": 0.5},
//    "http_port": 8080}

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ramacity/error.hpp"
#include "ramacity/nav.hpp"
#include "ramacity/scene.hpp"

namespace ramacity {

struct Config {
  std::filesystem::path scene_dir;
  nav::NavConfig nav;
  int http_port = 8080;
};

inline constexpr const char* kConfigEnv = "RAMACITY_CONFIG";

inline nlohmann::ordered_json to_json(const Config& c) {
  nlohmann::ordered_json j;
  j["scene_dir"] = c.scene_dir.string();
  j["d_m"] = c.nav.diameter_m;
  j["presets"] = c.nav.presets;
  j["k_flight"] = c.nav.k_flight;
  j["min_flight_s"] = c.nav.min_flight_s;
  j["transition_s"] = c.nav.transition_s;
  j["forward_speed"] = c.nav.forward_speed;
  j["collision_radius"] = c.nav.collision_radius;
  j["standoff_m"] = c.nav.standoff_m;
  j["thresholds"] = {{"displacement_deg", c.nav.follow_displacement_deg},
                     {"velocity_deg_s", c.nav.follow_velocity_deg_s},
                     {"realign_rate_deg_s", c.nav.realign_rate_deg_s},
                     {"deadband_deg", c.nav.realign_deadband_deg}};
  j["http_port"] = c.http_port;
  return j;
}

inline void validate(const Config& c) {
  const auto& n = c.nav;
  if (n.presets.empty()) throw Error(ErrorCode::ConfigError, "presets must not be empty");
  for (std::size_t i = 0; i < n.presets.size(); ++i) {
    if (!(n.presets[i] >= 0.0) || (i > 0 && !(n.presets[i] > n.presets[i - 1]))) {
      throw Error(ErrorCode::ConfigError, "presets must be non-negative and strictly increasing");
    }
  }
  if (!(n.diameter_m > 0.0) || !(n.flat_diameter_m >= n.diameter_m)) {
    throw Error(ErrorCode::ConfigError, "d_m must be positive and not exceed the flat diameter");
  }
  if (n.presets.back() >= n.diameter_m / 2.0) throw Error(ErrorCode::ConfigError, "top preset must be below d_m/2");
  for (double v : {n.k_flight, n.min_flight_s, n.transition_s, n.forward_speed, n.realign_rate_deg_s}) {
    if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, "flight, speed and rate tunables must be positive");
  }
  for (double v : {n.collision_radius, n.standoff_m, n.follow_displacement_deg, n.follow_velocity_deg_s,
                   n.realign_deadband_deg}) {
    if (!(v >= 0.0)) throw Error(ErrorCode::ConfigError, "radius, standoff and thresholds must be non-negative");
  }
  if (c.http_port < 1024 || c.http_port > 65535) throw Error(ErrorCode::ConfigError, "http_port must be in 1024..65535");
}

/// Checks d_m against the tallest building of a scene.
inline void validate_against(const Config& c, const scene::SceneManifest& m) {
  if (!(c.nav.diameter_m > 2.0 * m.max_height_m)) {
    throw Error(ErrorCode::ConfigError, "d_m must exceed twice the scene's tallest building (" +
                                            std::to_string(m.max_height_m) + " m)");
  }
}

inline Config parse_config(const std::string& text) {
  Config c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    static const char* known[] = {"scene_dir",     "d_m",       "presets",          "k_flight",
                                  "min_flight_s",  "transition_s", "forward_speed", "collision_radius",
                                  "standoff_m",    "thresholds",  "http_port"};
    for (const auto& [key, _] : j.items()) {
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
          std::end(known)) {
        throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
      }
    }
    auto& n = c.nav;
    if (j.contains("scene_dir")) c.scene_dir = j["scene_dir"].get<std::string>();
    n.diameter_m = j.value("d_m", n.diameter_m);
    n.presets = j.value("presets", n.presets);
    n.k_flight = j.value("k_flight", n.k_flight);
    n.min_flight_s = j.value("min_flight_s", n.min_flight_s);
    n.transition_s = j.value("transition_s", n.transition_s);
    n.forward_speed = j.value("forward_speed", n.forward_speed);
    n.collision_radius = j.value("collision_radius", n.collision_radius);
    n.standoff_m = j.value("standoff_m", n.standoff_m);
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      n.follow_displacement_deg = t.value("displacement_deg", n.follow_displacement_deg);
      n.follow_velocity_deg_s = t.value("velocity_deg_s", n.follow_velocity_deg_s);
      n.realign_rate_deg_s = t.value("realign_rate_deg_s", n.realign_rate_deg_s);
      n.realign_deadband_deg = t.value("deadband_deg", n.realign_deadband_deg);
    }
    c.http_port = j.value("http_port", c.http_port);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

/// Explicit path wins, then $RAMACITY_CONFIG, else defaults.
inline Config load_config(const std::optional<std::filesystem::path>& path) {
  std::optional<std::filesystem::path> p = path;
  if (!p) {
    if (const char* env = std::getenv(kConfigEnv); env && *env) p = env;
  }
  if (!p) {
    Config c;
    validate(c);
    return c;
  }
  try {
    return parse_config(scene::read_file(*p));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw Error(ErrorCode::ConfigError, e.what());
    throw;
  }
}

}  // namespace ramacity
