#pragma once

// Fixed-timestep navigation state machine.
//
// Modes:
//   Flat <-> EnteringRama -> RamaActive -> ExitingRama -> Flat
//   Flat | RamaActive -> Flying -> Flat | ExitingRama (Rama is switched off on arrival)
//   Flat | RamaActive -> ChangingAltitude -> (the mode it started from)
//
// Each update() first advances the running animation by dt, then applies the
// commands. While an animation runs every command except SetHeadPose is
// dropped. No wall-clock reads: the caller owns time.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ramacity/error.hpp"
#include "ramacity/geometry.hpp"
#include "ramacity/scene_index.hpp"
#include "ramacity/telemetry.hpp"
#include "ramacity/vec3.hpp"

namespace ramacity::nav {

struct NavConfig {
  std::vector<double> presets{5.0, 100.0, 500.0, 1000.0, 2000.0};
  double diameter_m = geometry::kRamaDiameter;
  double flat_diameter_m = geometry::kFlatDiameter;
  double transition_s = 3.0;
  double k_flight = 0.15;  // s / sqrt(m)
  double min_flight_s = 0.5;
  double forward_speed = 15.0;
  double collision_radius = 1.0;
  double standoff_m = 10.0;
  double follow_displacement_deg = 10.0;
  double follow_velocity_deg_s = 20.0;
  double realign_rate_deg_s = 90.0;
  double realign_deadband_deg = 0.5;

  friend bool operator==(const NavConfig&, const NavConfig&) = default;
};

enum class Mode { Flat, RamaActive, EnteringRama, ExitingRama, Flying, ChangingAltitude };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Flat: return "Flat";
    case Mode::RamaActive: return "RamaActive";
    case Mode::EnteringRama: return "EnteringRama";
    case Mode::ExitingRama: return "ExitingRama";
    case Mode::Flying: return "Flying";
    case Mode::ChangingAltitude: return "ChangingAltitude";
  }
  return "Unknown";
}

inline bool is_animating(Mode m) { return m != Mode::Flat && m != Mode::RamaActive; }

enum class PathKind { FlyTo, AltitudeChange, EnterRama, ExitRama };

struct FlightPath {
  Vec3 start;
  Vec3 end;
  double duration_s = 0.0;
  PathKind kind = PathKind::FlyTo;

  friend bool operator==(const FlightPath&, const FlightPath&) = default;
};

struct NavState {
  Vec3 camera_pos{0.0, 0.0, 5.0};
  Vec3 heading{1.0, 0.0, 0.0};  // unit, horizontal
  int altitude_ix = 0;
  Mode mode = Mode::Flat;
  double phase_t = 0.0;             // elapsed time of the running animation
  std::optional<FlightPath> path;   // set exactly while animating
  Mode resume_mode = Mode::Flat;    // where Flying / ChangingAltitude return to
  int target_altitude_ix = 0;       // ChangingAltitude destination
  bool rama_paused = false;
  geometry::CylinderSpec cylinder;
  double clock = 0.0;

  bool moving = false;       // forward button held
  bool blocked = false;      // last forward step hit a building
  bool realigning = false;   // cylinder turning toward the heading
  Vec3 prev_heading{1.0, 0.0, 0.0};

  friend bool operator==(const NavState&, const NavState&) = default;
};

// --- commands ------------------------------------------------------------------

struct ToggleRama {};
struct MoveForward {
  bool held = true;
};
struct AltitudeUp {};
struct AltitudeDown {};
struct FlyTo {
  std::variant<Vec3, std::string> target;  // ground point or building id
};
struct PauseAxis {};
struct ResumeAxis {};
struct SetHeadPose {
  Vec3 dir;
};

using NavCommand =
    std::variant<ToggleRama, MoveForward, AltitudeUp, AltitudeDown, FlyTo, PauseAxis, ResumeAxis, SetHeadPose>;

inline std::string_view command_name(const NavCommand& c) {
  static constexpr std::string_view names[] = {"toggle_rama", "move_forward", "altitude_up", "altitude_down",
                                               "fly_to",      "pause_axis",   "resume_axis", "head_pose"};
  return names[c.index()];
}

using EventSink = telemetry::SessionLog;

// --- pure building blocks --------------------------------------------------------

/// Cylinder diameter t seconds into an enter (or exit) animation: log-linear
/// between the flat diameter and the Rama diameter, exact at both ends.
inline double transition_diameter(double t, bool entering, const NavConfig& cfg = {}) {
  const double frac = std::clamp(t / cfg.transition_s, 0.0, 1.0);
  const double blend = entering ? frac : 1.0 - frac;
  return geometry::effective_diameter(blend, cfg.diameter_m, cfg.flat_diameter_m);
}

/// Cosine ease-in-out, 0 at t = 0 and 1 at t = T, zero slope at both ends.
inline double flight_progress(double t, double T) {
  if (t <= 0.0) return 0.0;
  if (t >= T) return 1.0;
  // (1 - cos(pi u)) / 2 written via sin so that u = 1/2 gives 0.5 exactly.
  return 0.5 - 0.5 * std::sin(std::numbers::pi * (0.5 - t / T));
}

inline double flight_duration(double distance_m, const NavConfig& cfg = {}) {
  return std::max(cfg.min_flight_s, cfg.k_flight * std::sqrt(std::max(0.0, distance_m)));
}

namespace detail {

inline Vec3 horizontal_unit(Vec3 v) {
  const Vec3 h{v.x, v.y, 0.0};
  const double len = norm(h);
  if (!(len > 1e-9 * std::max(1.0, norm(v))) || !std::isfinite(len)) {
    throw Error(ErrorCode::DegenerateView, "direction has no horizontal component");
  }
  return h / len;
}

inline double signed_yaw(Vec3 from, Vec3 to) {
  return std::atan2(from.x * to.y - from.y * to.x, from.x * to.x + from.y * to.y);
}

inline Vec3 rotate_yaw(Vec3 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, 0.0};
}

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline void emit(EventSink* sink, double t, telemetry::EventKind kind, telemetry::Json payload) {
  if (sink) sink->push_back({t, kind, std::move(payload)});
}

inline void set_mode(NavState& s, Mode next, EventSink* sink) {
  detail::emit(sink, s.clock, telemetry::EventKind::ModeChange,
               {{"from", to_string(s.mode)}, {"to", to_string(next)}});
  s.mode = next;
  s.phase_t = 0.0;
  if (!is_animating(next)) s.path.reset();
}

inline void drop(const NavState& s, const NavCommand& c, std::string_view reason, EventSink* sink) {
  emit(sink, s.clock, telemetry::EventKind::CommandDropped, {{"cmd", command_name(c)}, {"reason", reason}});
}

inline void sync_flat_cylinder(NavState& s, const NavConfig& cfg) {
  s.cylinder.frame = geometry::make_user_frame(s.camera_pos, s.heading);
  s.cylinder.diameter_m = cfg.diameter_m;
  s.cylinder.flat_diameter_m = cfg.flat_diameter_m;
  s.cylinder.blend = 0.0;
}

}  // namespace detail

inline NavState initial_state(const NavConfig& cfg, Vec2 ground_xy = {}, Vec3 heading = {1, 0, 0},
                              int altitude_ix = 0) {
  NavState s;
  s.altitude_ix = std::clamp(altitude_ix, 0, static_cast<int>(cfg.presets.size()) - 1);
  s.target_altitude_ix = s.altitude_ix;
  s.camera_pos = {ground_xy.x, ground_xy.y, cfg.presets[static_cast<std::size_t>(s.altitude_ix)]};
  s.heading = detail::horizontal_unit(heading);
  s.prev_heading = s.heading;
  detail::sync_flat_cylinder(s, cfg);
  return s;
}

/// Arrival point for a fly-to. Buildings: standoff_m beyond the footprint
/// edge on the side facing the user, along the line from the centroid.
/// Ground points: the point itself. Altitude is always kept.
inline Vec3 resolve_fly_target(const std::variant<Vec3, std::string>& selection, const NavState& state,
                               const SceneIndex& scene, const NavConfig& cfg = {}) {
  if (const auto* p = std::get_if<Vec3>(&selection)) {
    if (!is_finite(*p)) throw Error(ErrorCode::TargetUnresolvable, "non-finite target point");
    return {p->x, p->y, state.camera_pos.z};
  }
  const auto& id = std::get<std::string>(selection);
  const auto* b = scene.find(id);
  if (!b) throw Error(ErrorCode::TargetUnresolvable, "unknown building id '" + id + "'");
  const Vec2 c = scene.centroid(*b);
  Vec2 dir{state.camera_pos.x - c.x, state.camera_pos.y - c.y};
  double len = length2(dir);
  if (!(len > 1e-9)) {
    dir = {-state.heading.x, -state.heading.y};
    len = length2(dir);
  }
  dir = dir * (1.0 / len);
  const double s = SceneIndex::exit_distance(b->footprint, c, dir) + cfg.standoff_m;
  return {c.x + dir.x * s, c.y + dir.y * s, state.camera_pos.z};
}

/// Updates the heading and, in Rama mode, lets the cylinder follow it.
/// A turn starts once the cylinder lags by more than the displacement
/// threshold or the head turns faster than the velocity threshold; it then
/// rotates at a fixed rate until within the deadband. Paused axes never move.
inline NavState head_follow(NavState s, Vec3 new_heading, double dt, const NavConfig& cfg = {}) {
  s.heading = detail::horizontal_unit(new_heading);
  const double velocity = std::abs(detail::signed_yaw(s.prev_heading, s.heading)) / dt;
  s.prev_heading = s.heading;
  if (s.mode != Mode::RamaActive || s.rama_paused) return s;

  const double lag = detail::signed_yaw(s.cylinder.frame.forward, s.heading);
  if (!s.realigning &&
      (std::abs(lag) > detail::rad(cfg.follow_displacement_deg) || velocity > detail::rad(cfg.follow_velocity_deg_s))) {
    s.realigning = true;
  }
  if (!s.realigning) return s;

  const double max_step = detail::rad(cfg.realign_rate_deg_s) * dt;
  Vec3 forward;
  double remaining;
  if (std::abs(lag) <= max_step) {
    forward = s.heading;
    remaining = 0.0;
  } else {
    forward = detail::rotate_yaw(s.cylinder.frame.forward, std::copysign(max_step, lag));
    remaining = std::abs(lag) - max_step;
  }
  s.cylinder.frame.forward = forward;
  s.cylinder.frame.left = cross(kUp, forward);
  if (remaining <= detail::rad(cfg.realign_deadband_deg)) s.realigning = false;
  return s;
}

/// One forward step along the horizontal heading. Returns the state
/// unchanged with `blocked` set when the swept disc would clip a building
/// taller than the current altitude.
inline NavState move_forward(NavState s, double dt, const SceneIndex& scene, const NavConfig& cfg = {}) {
  const Vec3 next = s.camera_pos + s.heading * (cfg.forward_speed * dt);
  const bool hit = scene.sweep_blocked({s.camera_pos.x, s.camera_pos.y}, {next.x, next.y}, cfg.collision_radius,
                                       s.camera_pos.z);
  s.blocked = hit;
  if (hit) return s;
  s.camera_pos = next;
  if (s.mode == Mode::RamaActive) s.cylinder.frame.origin = {next.x, next.y, 0.0};
  return s;
}

/// Advances a Flying animation by dt. No collision tests; the cylinder stays
/// frozen. On arrival the camera snaps to the target and Rama, if it was on,
/// starts switching off.
inline NavState fly_dynamics(NavState s, double dt, const NavConfig& cfg, EventSink* sink) {
  const FlightPath& path = *s.path;
  s.phase_t += dt;
  if (s.phase_t < path.duration_s) {
    s.camera_pos = lerp(path.start, path.end, flight_progress(s.phase_t, path.duration_s));
    return s;
  }
  s.camera_pos = path.end;
  detail::emit(sink, s.clock, telemetry::EventKind::FlyEnd, {{"position", telemetry::vec_json(path.end)}});
  if (s.resume_mode == Mode::RamaActive) {
    detail::set_mode(s, Mode::ExitingRama, sink);
    s.path = FlightPath{s.camera_pos, s.camera_pos, cfg.transition_s, PathKind::ExitRama};
  } else {
    detail::set_mode(s, Mode::Flat, sink);
    detail::sync_flat_cylinder(s, cfg);
  }
  return s;
}

namespace detail {

inline NavState advance(NavState s, double dt, const SceneIndex& scene, const NavConfig& cfg, EventSink* sink) {
  switch (s.mode) {
    case Mode::EnteringRama:
    case Mode::ExitingRama: {
      const bool entering = s.mode == Mode::EnteringRama;
      s.phase_t += dt;
      if (s.phase_t >= cfg.transition_s) {
        if (entering) {
          s.cylinder.blend = 1.0;
          set_mode(s, Mode::RamaActive, sink);
        } else {
          set_mode(s, Mode::Flat, sink);
          s.rama_paused = false;
          s.realigning = false;
          sync_flat_cylinder(s, cfg);
        }
      } else {
        const double frac = s.phase_t / cfg.transition_s;
        s.cylinder.blend = entering ? frac : 1.0 - frac;
      }
      s.prev_heading = s.heading;
      return s;
    }
    case Mode::Flying:
      s = fly_dynamics(std::move(s), dt, cfg, sink);
      s.prev_heading = s.heading;
      return s;
    case Mode::ChangingAltitude: {
      const FlightPath& path = *s.path;
      s.phase_t += dt;
      if (s.phase_t < path.duration_s) {
        s.camera_pos = lerp(path.start, path.end, flight_progress(s.phase_t, path.duration_s));
      } else {
        s.camera_pos = path.end;
        const double from = cfg.presets[static_cast<std::size_t>(s.altitude_ix)];
        s.altitude_ix = s.target_altitude_ix;
        emit(sink, s.clock, telemetry::EventKind::AltitudeChange,
             {{"from_m", from}, {"to_m", cfg.presets[static_cast<std::size_t>(s.altitude_ix)]}});
        set_mode(s, s.resume_mode, sink);
        if (s.mode == Mode::Flat) sync_flat_cylinder(s, cfg);
      }
      s.prev_heading = s.heading;
      return s;
    }
    case Mode::Flat:
    case Mode::RamaActive: {
      if (s.moving) {
        const bool was_blocked = s.blocked;
        s = move_forward(std::move(s), dt, scene, cfg);
        if (s.blocked && !was_blocked) {
          emit(sink, s.clock, telemetry::EventKind::MoveBlocked, {{"position", telemetry::vec_json(s.camera_pos)}});
        }
      }
      s = head_follow(std::move(s), s.heading, dt, cfg);
      if (s.mode == Mode::Flat) sync_flat_cylinder(s, cfg);
      return s;
    }
  }
  return s;
}

inline void start_path(NavState& s, Mode mode, FlightPath path, EventSink* sink) {
  s.resume_mode = s.mode;
  s.moving = false;
  s.blocked = false;
  set_mode(s, mode, sink);
  s.path = path;
}

inline void apply(NavState& s, const NavCommand& cmd, const SceneIndex& scene, const NavConfig& cfg,
                  EventSink* sink) {
  if (const auto* pose = std::get_if<SetHeadPose>(&cmd)) {
    const Vec3 h{pose->dir.x, pose->dir.y, 0.0};
    if (!(norm(h) > 1e-9 * std::max(1.0, norm(pose->dir))) || !is_finite(pose->dir)) {
      drop(s, cmd, "vertical_or_invalid_direction", sink);
      return;
    }
    s.heading = horizontal_unit(pose->dir);
    return;
  }
  if (is_animating(s.mode)) {
    drop(s, cmd, "transition_in_progress", sink);
    return;
  }
  const int top = static_cast<int>(cfg.presets.size()) - 1;

  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ToggleRama>) {
          const bool entering = s.mode == Mode::Flat;
          s.moving = false;
          s.blocked = false;
          s.realigning = false;
          if (entering) {
            sync_flat_cylinder(s, cfg);
            set_mode(s, Mode::EnteringRama, sink);
          } else {
            set_mode(s, Mode::ExitingRama, sink);
          }
          s.path = FlightPath{s.camera_pos, s.camera_pos, cfg.transition_s,
                              entering ? PathKind::EnterRama : PathKind::ExitRama};
        } else if constexpr (std::is_same_v<T, MoveForward>) {
          s.moving = c.held;
          if (!c.held) s.blocked = false;
        } else if constexpr (std::is_same_v<T, AltitudeUp> || std::is_same_v<T, AltitudeDown>) {
          const int next = s.altitude_ix + (std::is_same_v<T, AltitudeUp> ? 1 : -1);
          if (next < 0 || next > top) {
            drop(s, cmd, "altitude_clamped", sink);
            return;
          }
          s.target_altitude_ix = next;
          const Vec3 end{s.camera_pos.x, s.camera_pos.y, cfg.presets[static_cast<std::size_t>(next)]};
          start_path(s, Mode::ChangingAltitude,
                     {s.camera_pos, end, flight_duration(std::abs(end.z - s.camera_pos.z), cfg),
                      PathKind::AltitudeChange},
                     sink);
        } else if constexpr (std::is_same_v<T, FlyTo>) {
          Vec3 target;
          try {
            target = resolve_fly_target(c.target, s, scene, cfg);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::TargetUnresolvable) throw;
            drop(s, cmd, "target_unresolvable", sink);
            return;
          }
          const double dist = std::hypot(target.x - s.camera_pos.x, target.y - s.camera_pos.y);
          const FlightPath path{s.camera_pos, target, flight_duration(dist, cfg), PathKind::FlyTo};
          emit(sink, s.clock, telemetry::EventKind::FlyStart,
               {{"from", telemetry::vec_json(path.start)},
                {"to", telemetry::vec_json(path.end)},
                {"duration_s", path.duration_s}});
          start_path(s, Mode::Flying, path, sink);
        } else if constexpr (std::is_same_v<T, PauseAxis> || std::is_same_v<T, ResumeAxis>) {
          if (s.mode != Mode::RamaActive) {
            drop(s, cmd, "rama_inactive", sink);
            return;
          }
          s.rama_paused = std::is_same_v<T, PauseAxis>;
          if (s.rama_paused) s.realigning = false;
        }
      },
      cmd);
}

}  // namespace detail

/// One fixed step: animation/dynamics by dt, then the commands in order.
inline NavState update(const NavState& state, std::span<const NavCommand> commands, double dt,
                       const SceneIndex& scene, const NavConfig& cfg = {}, EventSink* sink = nullptr) {
  if (!(dt > 0.0 && dt <= 0.1)) throw Error(ErrorCode::InvalidArgument, "dt must lie in (0, 0.1]");
  NavState s = state;
  s.clock += dt;
  s = detail::advance(std::move(s), dt, scene, cfg, sink);
  for (const auto& c : commands) detail::apply(s, c, scene, cfg, sink);
  return s;
}

}  // namespace ramacity::nav
