#pragma once

// Scripted sessions: JSON lines {"t": seconds, "cmd": name, "args": {...}}
// replayed through the navigation engine at a fixed 90 Hz tick.
//
//   start          {"position": [x, y], "heading": [x, y, z], "altitude_ix": i}   (first line, t = 0)
//   toggle_rama | altitude_up | altitude_down | pause_axis | resume_axis
//   move_forward   {"held": bool}
//   fly_to         {"building": id} | {"point": [x, y]}
//   head_pose      {"dir": [x, y, z]} | {"yaw_deg": a}
//   point          {"dir": [x, y, z], "target": id | [x, y, z]}
//   end            stop the session at t

#include <cmath>
#include <filesystem>
#include <istream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ramacity/config.hpp"
#include "ramacity/error.hpp"
#include "ramacity/nav.hpp"
#include "ramacity/scene_index.hpp"
#include "ramacity/telemetry.hpp"

namespace ramacity::sim {

inline constexpr double kTickHz = 90.0;
inline constexpr double kDt = 1.0 / kTickHz;
inline constexpr double kMaxSessionS = 3600.0;

struct StartPose {
  Vec2 position;
  Vec3 heading{1.0, 0.0, 0.0};
  int altitude_ix = 0;
};

struct PointSample {
  Vec3 dir;
  std::variant<Vec3, std::string> target;
};

struct EndSession {};

using ScriptAction = std::variant<nav::NavCommand, PointSample, EndSession>;

struct ScriptLine {
  double t = 0.0;
  ScriptAction action;
  std::size_t line_no = 0;
};

struct Script {
  StartPose start;
  std::vector<ScriptLine> lines;
};

namespace detail {

inline Vec3 read_vec(const nlohmann::json& j) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) throw std::invalid_argument("expected [x, y] or [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
}

inline ScriptAction parse_action(const std::string& cmd, const nlohmann::json& args) {
  using namespace nav;
  if (cmd == "toggle_rama") return NavCommand{ToggleRama{}};
  if (cmd == "altitude_up") return NavCommand{AltitudeUp{}};
  if (cmd == "altitude_down") return NavCommand{AltitudeDown{}};
  if (cmd == "pause_axis") return NavCommand{PauseAxis{}};
  if (cmd == "resume_axis") return NavCommand{ResumeAxis{}};
  if (cmd == "move_forward") return NavCommand{MoveForward{args.value("held", true)}};
  if (cmd == "fly_to") {
    if (args.contains("building")) return NavCommand{FlyTo{args.at("building").get<std::string>()}};
    return NavCommand{FlyTo{read_vec(args.at("point"))}};
  }
  if (cmd == "head_pose") {
    if (args.contains("yaw_deg")) {
      const double a = args.at("yaw_deg").get<double>() * std::numbers::pi / 180.0;
      return NavCommand{SetHeadPose{{std::cos(a), std::sin(a), 0.0}}};
    }
    return NavCommand{SetHeadPose{read_vec(args.at("dir"))}};
  }
  if (cmd == "point") {
    const auto& target = args.at("target");
    PointSample p{read_vec(args.at("dir")), {}};
    if (target.is_string()) {
      p.target = target.get<std::string>();
    } else {
      p.target = read_vec(target);
    }
    return p;
  }
  if (cmd == "end") return EndSession{};
  throw std::invalid_argument("unknown command '" + cmd + "'");
}

}  // namespace detail

inline Script parse_script(std::istream& is) {
  Script script;
  std::string text;
  std::size_t line_no = 0;
  double last_t = 0.0;
  bool any = false;
  while (std::getline(is, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(text);
      const double t = j.at("t").get<double>();
      const std::string cmd = j.at("cmd").get<std::string>();
      const auto args = j.value("args", nlohmann::json::object());
      if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("t must be a finite non-negative number");
      if (t < last_t) throw std::invalid_argument("t must be non-decreasing");
      if (cmd == "start") {
        if (any || t != 0.0) throw std::invalid_argument("start must be the first line, at t = 0");
        const Vec3 p = detail::read_vec(args.at("position"));
        script.start.position = {p.x, p.y};
        if (args.contains("heading")) script.start.heading = detail::read_vec(args["heading"]);
        script.start.altitude_ix = args.value("altitude_ix", 0);
      } else {
        script.lines.push_back({t, detail::parse_action(cmd, args), line_no});
      }
      last_t = t;
      any = true;
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ScriptError, "script line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return script;
}

inline Script parse_script_text(const std::string& text) {
  std::istringstream is(text);
  return parse_script(is);
}

struct SimulationResult {
  telemetry::SessionLog log;
  nav::NavState final_state;
  telemetry::SessionMetrics metrics;
};

/// Tick at which a command stamped t is applied (ticks are 1-based; tick k
/// ends at k/90 s).
inline std::size_t tick_for(double t) {
  const double k = std::ceil(t * kTickHz - 1e-9);
  return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

inline SimulationResult simulate(const Script& script, const SceneIndex& scene, const nav::NavConfig& cfg = {}) {
  using telemetry::EventKind;
  SimulationResult r;
  const auto top = static_cast<int>(cfg.presets.size()) - 1;
  if (script.start.altitude_ix < 0 || script.start.altitude_ix > top) {
    throw Error(ErrorCode::ScriptError, "start altitude_ix out of range", 1);
  }
  nav::NavState s;
  try {
    s = nav::initial_state(cfg, script.start.position, script.start.heading, script.start.altitude_ix);
  } catch (const Error& e) {
    throw Error(ErrorCode::ScriptError, std::string("start: ") + e.what(), 1);
  }
  r.log.push_back({0.0, EventKind::SessionStart,
                   {{"altitude_m", s.camera_pos.z},
                    {"mode", nav::to_string(s.mode)},
                    {"position", telemetry::vec_json(s.camera_pos)}}});

  std::optional<std::size_t> end_tick;
  for (const auto& l : script.lines) {
    if (std::holds_alternative<EndSession>(l.action)) {
      end_tick = l.t == 0.0 ? 0 : tick_for(l.t);
      break;
    }
  }
  const auto max_ticks = static_cast<std::size_t>(kMaxSessionS * kTickHz);

  std::size_t next = 0;
  for (std::size_t tick = 1;; ++tick) {
    if (end_tick ? tick > *end_tick : (next >= script.lines.size() && !nav::is_animating(s.mode))) break;
    if (tick > max_ticks) break;
    std::vector<nav::NavCommand> cmds;
    std::vector<const PointSample*> points;
    for (; next < script.lines.size() && tick_for(script.lines[next].t) <= tick; ++next) {
      const auto& a = script.lines[next].action;
      if (const auto* c = std::get_if<nav::NavCommand>(&a)) cmds.push_back(*c);
      if (const auto* p = std::get_if<PointSample>(&a)) points.push_back(p);
      if (std::holds_alternative<EndSession>(a)) next = script.lines.size() - 1;
    }
    s = nav::update(s, cmds, kDt, scene, cfg, &r.log);
    for (const auto* p : points) {
      Vec3 target;
      std::string label;
      if (const auto* id = std::get_if<std::string>(&p->target)) {
        const auto* b = scene.find(*id);
        if (!b) throw Error(ErrorCode::ScriptError, "point target '" + *id + "' is not in the scene");
        const Vec2 c = scene.centroid(*b);
        target = {c.x, c.y, b->height_m / 2.0};
        label = *id;
      } else {
        target = std::get<Vec3>(p->target);
      }
      r.log.push_back({s.clock, EventKind::PointingSample,
                       {{"target", label.empty() ? telemetry::Json(telemetry::vec_json(target)) : telemetry::Json(label)},
                        {"position", telemetry::vec_json(s.camera_pos)},
                        {"error_deg", telemetry::pointing_error(s.camera_pos, p->dir, target)}}});
    }
  }
  r.log.push_back({s.clock, EventKind::SessionEnd,
                   {{"mode", nav::to_string(s.mode)}, {"position", telemetry::vec_json(s.camera_pos)}}});
  r.final_state = s;
  r.metrics = telemetry::compute_metrics(r.log, cfg.presets);
  return r;
}

struct Report {
  std::string log;
  std::string metrics_json;
  std::string table;
};

inline Report report(const SimulationResult& r) {
  return {telemetry::log_text(r.log), telemetry::to_json(r.metrics).dump(2) + "\n", telemetry::metrics_table(r.metrics)};
}

}  // namespace ramacity::sim
