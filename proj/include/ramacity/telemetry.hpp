#pragma once

// Session event stream and the study-style measures derived from it.
//
// Log file: one JSON object per line, {"t": seconds, "kind": "...", "payload": {...}}.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ramacity/error.hpp"
#include "ramacity/vec3.hpp"

namespace ramacity::telemetry {

using Json = nlohmann::ordered_json;

enum class EventKind {
  SessionStart,
  SessionEnd,
  ModeChange,
  AltitudeChange,
  FlyStart,
  FlyEnd,
  MoveBlocked,
  CommandDropped,
  PointingSample,
};

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::SessionStart: return "session_start";
    case EventKind::SessionEnd: return "session_end";
    case EventKind::ModeChange: return "mode_change";
    case EventKind::AltitudeChange: return "altitude_change";
    case EventKind::FlyStart: return "fly_start";
    case EventKind::FlyEnd: return "fly_end";
    case EventKind::MoveBlocked: return "move_blocked";
    case EventKind::CommandDropped: return "command_dropped";
    case EventKind::PointingSample: return "pointing_sample";
  }
  return "unknown";
}

inline std::optional<EventKind> event_kind_from(std::string_view s) {
  for (auto k : {EventKind::SessionStart, EventKind::SessionEnd, EventKind::ModeChange, EventKind::AltitudeChange,
                 EventKind::FlyStart, EventKind::FlyEnd, EventKind::MoveBlocked, EventKind::CommandDropped,
                 EventKind::PointingSample}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct TelemetryEvent {
  double t = 0.0;
  EventKind kind = EventKind::ModeChange;
  Json payload = Json::object();

  friend bool operator==(const TelemetryEvent&, const TelemetryEvent&) = default;
};

using SessionLog = std::vector<TelemetryEvent>;

inline Json vec_json(Vec3 v) { return Json::array({v.x, v.y, v.z}); }

inline std::string to_json_line(const TelemetryEvent& e) {
  Json j;
  j["t"] = e.t;
  j["kind"] = to_string(e.kind);
  j["payload"] = e.payload;
  return j.dump();
}

inline void write_log(std::ostream& os, const SessionLog& log) {
  for (const auto& e : log) os << to_json_line(e) << '\n';
}

inline std::string log_text(const SessionLog& log) {
  std::ostringstream os;
  write_log(os, log);
  return os.str();
}

inline SessionLog read_log(std::istream& is) {
  SessionLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = Json::parse(line);
      const auto kind = event_kind_from(j.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::ParseError, "unknown event kind", line_no);
      log.push_back({j.at("t").get<double>(), *kind, j.value("payload", Json::object())});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "log line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return log;
}

// --- measures ----------------------------------------------------------------

inline const std::vector<double>& default_presets() {
  static const std::vector<double> presets{5.0, 100.0, 500.0, 1000.0, 2000.0};
  return presets;
}

/// Altitudes below this count as the street-level group {5 m, 100 m}.
inline constexpr double kLowHighSplitM = 300.0;

namespace detail {

struct AltitudeTrack {
  double start_t = 0.0;
  double end_t = 0.0;
  double initial_m = 0.0;
  std::vector<std::pair<double, double>> changes;  // (t, new altitude)
};

inline std::optional<AltitudeTrack> altitude_track(const SessionLog& log) {
  std::optional<AltitudeTrack> track;
  for (const auto& e : log) {
    if (e.kind == EventKind::SessionStart) {
      track = AltitudeTrack{e.t, e.t, e.payload.at("altitude_m").get<double>(), {}};
      break;
    }
  }
  if (!track) {
    // No session header: start from the first altitude change's departure.
    for (const auto& e : log) {
      if (e.kind == EventKind::AltitudeChange) {
        track = AltitudeTrack{log.front().t, log.front().t, e.payload.at("from_m").get<double>(), {}};
        break;
      }
    }
  }
  if (!track) return std::nullopt;
  for (const auto& e : log) {
    if (e.kind == EventKind::AltitudeChange) track->changes.emplace_back(e.t, e.payload.at("to_m").get<double>());
    track->end_t = std::max(track->end_t, e.t);
  }
  return track;
}

}  // namespace detail

/// Time-weighted share of the session spent at each altitude. An
/// altitude_change event marks arrival, so time spent climbing or
/// descending counts toward the departure altitude.
inline std::map<double, double> altitude_histogram(const SessionLog& log,
                                                    const std::vector<double>& presets = default_presets()) {
  const auto track = detail::altitude_track(log);
  if (!track) throw Error(ErrorCode::EmptyLog, "log has no session start or altitude events");
  std::map<double, double> time;
  for (double p : presets) time[p] = 0.0;
  double current = track->initial_m;
  double since = track->start_t;
  for (const auto& [t, alt] : track->changes) {
    time[current] += t - since;
    current = alt;
    since = t;
  }
  time[current] += track->end_t - since;

  double total = 0.0;
  for (const auto& [alt, secs] : time) total += secs;
  std::map<double, double> share;
  for (const auto& [alt, secs] : time) share[alt] = total > 0.0 ? secs / total : 0.0;
  if (!(total > 0.0)) share[current] = 1.0;  // zero-length session
  return share;
}

/// Crossings between the low group (5 m, 100 m) and the high group
/// (500 m, 1 km, 2 km); a round trip counts twice.
inline int perspective_switches(const SessionLog& log, double split_m = kLowHighSplitM) {
  const auto track = detail::altitude_track(log);
  if (!track) return 0;
  int switches = 0;
  bool low = track->initial_m < split_m;
  for (const auto& [t, alt] : track->changes) {
    const bool now_low = alt < split_m;
    switches += now_low != low;
    low = now_low;
  }
  return switches;
}

/// Angle in degrees between where the user pointed and the true direction.
inline double pointing_error(Vec3 user_pos, Vec3 pointed_dir, Vec3 target_pos) {
  const Vec3 truth = target_pos - user_pos;
  if (!(norm(pointed_dir) > 0.0) || !(norm(truth) > 0.0) || !is_finite(pointed_dir) || !is_finite(truth)) {
    throw Error(ErrorCode::DegenerateInput, "pointing direction and target offset must be nonzero");
  }
  return angle_between(pointed_dir, truth) * 180.0 / std::numbers::pi;
}

struct SessionMetrics {
  double completion_time_s = 0.0;
  std::map<double, double> altitude_share;
  int perspective_switches = 0;
  std::vector<double> pointing_errors_deg;
};

inline SessionMetrics compute_metrics(const SessionLog& log, const std::vector<double>& presets = default_presets()) {
  SessionMetrics m;
  const auto track = detail::altitude_track(log);
  if (track) m.completion_time_s = track->end_t - track->start_t;
  m.altitude_share = altitude_histogram(log, presets);
  m.perspective_switches = perspective_switches(log);
  for (const auto& e : log) {
    if (e.kind == EventKind::PointingSample) m.pointing_errors_deg.push_back(e.payload.at("error_deg").get<double>());
  }
  return m;
}

inline std::string altitude_label(double m) {
  char buf[32];
  if (m >= 1000.0 && std::fmod(m, 1000.0) == 0.0) {
    std::snprintf(buf, sizeof buf, "%gkm", m / 1000.0);
  } else {
    std::snprintf(buf, sizeof buf, "%gm", m);
  }
  return buf;
}

inline Json to_json(const SessionMetrics& m) {
  Json j;
  j["completion_time_s"] = m.completion_time_s;
  Json share = Json::object();
  for (const auto& [alt, s] : m.altitude_share) share[altitude_label(alt)] = s;
  j["altitude_share"] = share;
  j["perspective_switches"] = m.perspective_switches;
  j["pointing_errors_deg"] = m.pointing_errors_deg;
  return j;
}

/// Plain-text table: one header row of altitudes, one row of whole
/// percentages, then the scalar measures.
inline std::string metrics_table(const SessionMetrics& m, std::string_view group = "Session") {
  std::ostringstream os;
  os << "Group";
  for (const auto& [alt, s] : m.altitude_share) os << " & " << altitude_label(alt);
  os << "\n" << group;
  for (const auto& [alt, s] : m.altitude_share) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.0f%%", 100.0 * s);
    os << " & " << buf;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "\nCompletion time: %.3f s\nPerspective switches: %d\n", m.completion_time_s,
                m.perspective_switches);
  os << buf;
  if (!m.pointing_errors_deg.empty()) {
    double mean = 0.0;
    for (double e : m.pointing_errors_deg) mean += e;
    mean /= static_cast<double>(m.pointing_errors_deg.size());
    std::snprintf(buf, sizeof buf, "Pointing error: %.2f deg mean over %zu samples\n", mean,
                  m.pointing_errors_deg.size());
    os << buf;
  }
  return os.str();
}

}  // namespace ramacity::telemetry
