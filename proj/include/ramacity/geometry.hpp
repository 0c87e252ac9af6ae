#pragma once

// Cylindrical space deformation around a street-level user.
//
// Frame-local coordinates: +X is the horizontal view direction, +Y runs along
// the cylinder axis, +Z is up. The cylinder is tangent to the ground along the
// Y axis and its axis is the line (0, t, d/2). Ground points in front of the
// user are wrapped onto the cylinder; elevated points are then pushed toward
// the axis by their height. Points at or behind the user (X <= 0) are left
// untouched.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ramacity/error.hpp"
#include "ramacity/vec3.hpp"

namespace ramacity::geometry {

inline constexpr double kRamaDiameter = 5000.0;
inline constexpr double kFlatDiameter = 1.0e7;

/// Log-space interpolation between the flat diameter (blend 0) and the target
/// diameter (blend 1). Endpoints are returned exactly.
inline double effective_diameter(double blend, double diameter_m, double flat_diameter_m = kFlatDiameter) {
  if (blend <= 0.0) return flat_diameter_m;
  if (blend >= 1.0) return diameter_m;
  return std::exp((1.0 - blend) * std::log(flat_diameter_m) + blend * std::log(diameter_m));
}

struct UserFrame {
  Vec3 origin;                   // user position on the ground, z = 0
  Vec3 forward{1.0, 0.0, 0.0};  // horizontal unit view direction
  Vec3 left{0.0, 1.0, 0.0};     // up x forward; the cylinder axis direction

  static UserFrame identity() { return {}; }

  Vec3 to_local(Vec3 p) const {
    const Vec3 rel{p.x - origin.x, p.y - origin.y, p.z};
    return {dot(rel, forward), dot(rel, left), p.z};
  }

  Vec3 to_world(Vec3 local) const {
    return {origin.x + local.x * forward.x + local.y * left.x,
            origin.y + local.x * forward.y + local.y * left.y, local.z};
  }

  friend bool operator==(const UserFrame&, const UserFrame&) = default;
};

/// Builds the frame for a user standing at `ground_pos` and looking along
/// `view_dir`. Only the horizontal part of the view direction matters.
inline UserFrame make_user_frame(Vec3 ground_pos, Vec3 view_dir) {
  const Vec3 horizontal{view_dir.x, view_dir.y, 0.0};
  const double len = norm(horizontal);
  const double full = norm(view_dir);
  if (!(full > 0.0) || len <= 1e-9 * full) {
    throw Error(ErrorCode::DegenerateView, "view direction has no horizontal component");
  }
  UserFrame frame;
  frame.origin = {ground_pos.x, ground_pos.y, 0.0};
  frame.forward = horizontal / len;
  frame.left = cross(kUp, frame.forward);
  return frame;
}

struct CylinderSpec {
  UserFrame frame;
  double diameter_m = kRamaDiameter;
  double blend = 1.0;  // 1 = fully deformed, 0 = flat
  double flat_diameter_m = kFlatDiameter;

  double effective_diameter() const {
    return geometry::effective_diameter(blend, diameter_m, flat_diameter_m);
  }

  friend bool operator==(const CylinderSpec&, const CylinderSpec&) = default;
};

struct DeformedPoint {
  Vec3 position;
  Vec3 source;
};

/// Wraps the ground point (X, Y, 0) onto the cylinder of diameter d.
inline Vec3 project_ground(double X, double Y, double d) {
  const double d2 = d * d;
  const double denom = d2 + X * X;
  return {d2 * X / denom, Y, d * X * X / denom};
}

/// Deformation in frame-local coordinates. Y is copied through untouched.
inline Vec3 deform_local(Vec3 p, double d) {
  const double radius = 0.5 * d;
  if (!(p.z < radius)) {
    throw Error(ErrorCode::HeightExceedsRadius, "point height " + std::to_string(p.z) +
                                                    " m is not below the cylinder radius " +
                                                    std::to_string(radius) + " m");
  }
  if (p.x <= 0.0) return p;

  const Vec3 on_cylinder = project_ground(p.x, p.y, d);
  // Toward the axis, perpendicular to the circle's tangent.
  const double dir_x = -on_cylinder.x;
  const double dir_z = radius - on_cylinder.z;
  const double len = std::hypot(dir_x, dir_z);
  return {on_cylinder.x + p.z * dir_x / len, p.y, on_cylinder.z + p.z * dir_z / len};
}

inline DeformedPoint deform_point(Vec3 p, const CylinderSpec& spec) {
  if (!is_finite(p)) throw Error(ErrorCode::InvalidArgument, "non-finite point");
  const Vec3 local = spec.frame.to_local(p);
  const double d = spec.effective_diameter();
  if (local.x <= 0.0) {
    deform_local(local, d);  // height check only
    return {p, p};
  }
  return {spec.frame.to_world(deform_local(local, d)), p};
}

/// Closed-form inverse of deform_local for points in the deformed front half.
inline Vec3 inverse_local(Vec3 q, double d) {
  const double radius = 0.5 * d;
  const double rx = q.x;
  const double rz = q.z - radius;
  const double r = std::hypot(rx, rz);
  if (!(q.x > 0.0)) {
    throw Error(ErrorCode::NotInvertible, "point is on or behind the tangent plane");
  }
  if (!(r > 0.0)) throw Error(ErrorCode::NotInvertible, "point lies on the cylinder axis");
  if (r > radius * (1.0 + 1e-12)) {
    throw Error(ErrorCode::NotInvertible, "point lies outside the cylinder");
  }
  // Extend radially back onto the cylinder surface.
  const double scale = radius / r;
  const double sx = rx * scale;
  const double sz = radius + rz * scale;
  if (!(sz < d)) throw Error(ErrorCode::NotInvertible, "point maps to the top of the cylinder");
  const double X = d * sx / (d - sz);
  const double Z = std::max(0.0, radius - r);
  return {X, q.y, Z};
}

inline Vec3 inverse_deform(Vec3 q, const CylinderSpec& spec) {
  const Vec3 local = spec.frame.to_local(q);
  return spec.frame.to_world(inverse_local(local, spec.effective_diameter()));
}

/// Element-wise deform_point; a height violation reports the vertex index.
inline std::vector<DeformedPoint> deform_mesh(std::span<const Vec3> vertices, const CylinderSpec& spec) {
  std::vector<DeformedPoint> out;
  out.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    try {
      out.push_back(deform_point(vertices[i], spec));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::HeightExceedsRadius) throw;
      throw Error(ErrorCode::HeightExceedsRadius, "vertex " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

struct Segment {
  Vec3 a;
  Vec3 b;
};

/// Closest distance between two straight segments.
inline double segment_distance(const Segment& s1, const Segment& s2) {
  const Vec3 d1 = s1.b - s1.a;
  const Vec3 d2 = s2.b - s2.a;
  const Vec3 r = s1.a - s2.a;
  const double a = dot(d1, d1);
  const double e = dot(d2, d2);
  const double f = dot(d2, r);
  constexpr double eps = 1e-300;
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) return norm(r);
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return norm((s1.a + d1 * s) - (s2.a + d2 * t));
}

struct CurveDistanceOptions {
  double densify_step_m = 1.0;
  double stop_below_m = -1.0;  // early exit once a distance below this is found
};

/// Minimum distance between the deformed images of two straight segments.
///
/// The images are curves. They are compared as polylines densified at
/// `densify_step_m` in source space, searched by branch and bound: the
/// deformation is L-Lipschitz (L = 1 for non-negative heights), so a source
/// piece of half-length h stays within L*h of the image of its midpoint.
inline double min_distance_after_deform(const Segment& s1, const Segment& s2, const CylinderSpec& spec,
                                        CurveDistanceOptions opts = {}) {
  const double d = spec.effective_diameter();
  const double zmin = std::min({s1.a.z, s1.b.z, s2.a.z, s2.b.z});
  const double lipschitz = std::max(1.0, (0.5 * d - zmin) / (0.5 * d));
  const double len1 = distance(s1.a, s1.b);
  const double len2 = distance(s2.a, s2.b);

  auto image = [&](const Segment& s, double t) { return deform_point(lerp(s.a, s.b, t), spec).position; };

  struct Piece {
    double t0, t1;
    Vec3 img0, img1, mid;
  };
  auto make_piece = [&](const Segment& s, double t0, double t1, Vec3 img0, Vec3 img1) {
    return Piece{t0, t1, img0, img1, image(s, 0.5 * (t0 + t1))};
  };
  struct Pair {
    Piece p, q;
  };

  std::vector<Pair> stack;
  stack.push_back({make_piece(s1, 0.0, 1.0, image(s1, 0.0), image(s1, 1.0)),
                   make_piece(s2, 0.0, 1.0, image(s2, 0.0), image(s2, 1.0))});
  double best = std::numeric_limits<double>::infinity();

  while (!stack.empty()) {
    const Pair pair = stack.back();
    stack.pop_back();
    const double l1 = (pair.p.t1 - pair.p.t0) * len1;
    const double l2 = (pair.q.t1 - pair.q.t0) * len2;
    const double centre = distance(pair.p.mid, pair.q.mid);
    best = std::min(best, centre);
    const double lower = centre - 0.5 * lipschitz * (l1 + l2);
    if (lower >= best) continue;

    const bool leaf1 = l1 <= opts.densify_step_m;
    const bool leaf2 = l2 <= opts.densify_step_m;
    if (leaf1 && leaf2) {
      best = std::min(best, segment_distance({pair.p.img0, pair.p.img1}, {pair.q.img0, pair.q.img1}));
      if (best < opts.stop_below_m) return best;
      continue;
    }
    if (best < opts.stop_below_m) return best;

    auto split = [&](const Segment& s, const Piece& piece) {
      const double tm = 0.5 * (piece.t0 + piece.t1);
      return std::pair{make_piece(s, piece.t0, tm, piece.img0, piece.mid),
                       make_piece(s, tm, piece.t1, piece.mid, piece.img1)};
    };
    // Split the longer piece; push the nearer child last so it is explored first.
    if (!leaf1 && (leaf2 || l1 >= l2)) {
      auto [a, b] = split(s1, pair.p);
      Pair pa{a, pair.q}, pb{b, pair.q};
      if (distance(a.mid, pair.q.mid) < distance(b.mid, pair.q.mid)) std::swap(pa, pb);
      stack.push_back(pa);
      stack.push_back(pb);
    } else {
      auto [a, b] = split(s2, pair.q);
      Pair pa{pair.p, a}, pb{pair.p, b};
      if (distance(a.mid, pair.p.mid) < distance(b.mid, pair.p.mid)) std::swap(pa, pb);
      stack.push_back(pa);
      stack.push_back(pb);
    }
  }
  return best;
}

inline constexpr double kIntersectionThreshold = 1e-6;

/// True when the deformed images of the two segments come within 1e-6 m.
inline bool segments_intersect_after_deform(const Segment& s1, const Segment& s2, const CylinderSpec& spec) {
  CurveDistanceOptions opts;
  opts.stop_below_m = kIntersectionThreshold;
  return min_distance_after_deform(s1, s2, spec, opts) < kIntersectionThreshold;
}

}  // namespace ramacity::geometry
