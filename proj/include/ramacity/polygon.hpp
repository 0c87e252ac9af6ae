#pragma once

// Planar polygon utilities in local ENU meters: orientation, simplicity,
// containment, centroids and ear-clipping triangulation with holes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ramacity/error.hpp"

namespace ramacity {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double cross2(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double dot2(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double length2(Vec2 a) { return std::hypot(a.x, a.y); }

using Ring = std::vector<Vec2>;
/// First ring is the outer boundary (CCW), the rest are holes (CW).
using Polygon = std::vector<Ring>;
using Polyline = std::vector<Vec2>;

struct Rect {
  Vec2 min;
  Vec2 max;
};

inline double signed_area(const Ring& ring) {
  double twice = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) twice += cross2(ring[i], ring[(i + 1) % n]);
  return 0.5 * twice;
}

inline double polygon_area(const Polygon& poly) {
  double a = 0.0;
  for (const auto& r : poly) a += signed_area(r);
  return std::abs(poly.empty() ? 0.0 : a);
}

/// Drops a repeated closing vertex and consecutive duplicates.
inline Ring clean_ring(Ring ring) {
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

inline int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross2(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

/// Closed-segment intersection test, touching included.
inline bool segments_touch(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

/// At least three distinct vertices, non-zero area, and no two
/// non-adjacent edges touching.
inline bool is_simple(const Ring& ring) {
  const std::size_t n = ring.size();
  if (n < 3 || std::abs(signed_area(ring)) <= 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Vec2 c = ring[j], d = ring[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folding back.
        const Vec2 shared = (j == i + 1) ? b : a;
        const Vec2 other_ab = (j == i + 1) ? a : b;
        const Vec2 other_cd = (j == i + 1) ? d : c;
        if (orient(shared, other_ab, other_cd) == 0 && dot2(other_ab - shared, other_cd - shared) > 0.0) {
          return false;
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

/// Even-odd containment over all rings, so holes are excluded.
inline bool point_in_polygon(const Polygon& poly, Vec2 p) {
  bool inside = false;
  for (const auto& ring : poly) {
    for (std::size_t i = 0, n = ring.size(), j = n - 1; i < n; j = i++) {
      const Vec2 a = ring[i], b = ring[j];
      if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
  }
  return inside;
}

/// Area centroid; holes subtract.
inline Vec2 polygon_centroid(const Polygon& poly) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (const auto& ring : poly) {
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
      const Vec2 p = ring[i], q = ring[(i + 1) % n];
      const double c = cross2(p, q);
      a += c;
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
    }
  }
  if (a == 0.0) {
    // Degenerate: vertex average of the outer ring.
    Vec2 sum;
    for (const auto& p : poly.front()) sum = sum + p;
    return sum * (1.0 / static_cast<double>(poly.front().size()));
  }
  return {cx / (3.0 * a), cy / (3.0 * a)};
}

inline Rect bounds_of(const std::vector<Vec2>& pts) {
  Rect r{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
         {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const auto& p : pts) {
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
  }
  return r;
}

/// Liang-Barsky clip of segment ab against a closed rectangle.
inline bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = b - a;
  const std::array<double, 4> p{-d.x, d.x, -d.y, d.y};
  const std::array<double, 4> q{a.x - r.min.x, r.max.x - a.x, a.y - r.min.y, r.max.y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double t = q[i] / p[i];
      if (p[i] < 0.0) t0 = std::max(t0, t);
      else t1 = std::min(t1, t);
      if (t0 > t1) return false;
    }
  }
  return true;
}

inline bool polyline_intersects_rect(const Polyline& line, const Rect& r) {
  if (line.size() == 1) return segment_intersects_rect(line[0], line[0], r);
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    if (segment_intersects_rect(line[i], line[i + 1], r)) return true;
  }
  return false;
}

inline bool polygon_intersects_rect(const Polygon& poly, const Rect& r) {
  for (const auto& ring : poly) {
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
      if (segment_intersects_rect(ring[i], ring[(i + 1) % n], r)) return true;
    }
  }
  return point_in_polygon(poly, {(r.min.x + r.max.x) * 0.5, (r.min.y + r.max.y) * 0.5});
}

/// Distance from p to segment ab.
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot2(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot2(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return length2(p - (a + ab * t));
}

inline double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  if (segments_touch(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

/// Normalizes ring orientation (outer CCW, holes CW) after cleaning. Throws
/// BadPolygon if any ring is not simple.
inline Polygon normalize_polygon(Polygon poly) {
  if (poly.empty()) throw Error(ErrorCode::BadPolygon, "polygon has no rings");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    poly[i] = clean_ring(std::move(poly[i]));
    if (!is_simple(poly[i])) {
      throw Error(ErrorCode::BadPolygon, "ring " + std::to_string(i) + " is degenerate or self-intersecting", i);
    }
    const bool ccw = signed_area(poly[i]) > 0.0;
    if ((i == 0) != ccw) std::reverse(poly[i].begin(), poly[i].end());
  }
  return poly;
}

using Triangle = std::array<std::uint32_t, 3>;

namespace detail {

inline bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  return cross2(b - a, p - a) >= 0.0 && cross2(c - b, p - b) >= 0.0 && cross2(a - c, p - c) >= 0.0;
}

// Splices each hole into the outer loop through a mutually visible bridge
// (hole's rightmost vertex to a visible outer vertex), yielding one weakly
// simple loop of vertex indices.
inline std::vector<std::uint32_t> bridge_holes(const Polygon& poly, const std::vector<Vec2>& pts) {
  std::vector<std::uint32_t> loop(poly[0].size());
  for (std::uint32_t i = 0; i < loop.size(); ++i) loop[i] = i;

  struct HoleRef {
    std::uint32_t first, count, rightmost;
  };
  std::vector<HoleRef> holes;
  std::uint32_t offset = static_cast<std::uint32_t>(poly[0].size());
  for (std::size_t h = 1; h < poly.size(); ++h) {
    const auto count = static_cast<std::uint32_t>(poly[h].size());
    std::uint32_t best = offset;
    for (std::uint32_t k = offset; k < offset + count; ++k) {
      if (pts[k].x > pts[best].x || (pts[k].x == pts[best].x && pts[k].y < pts[best].y)) best = k;
    }
    holes.push_back({offset, count, best});
    offset += count;
  }
  std::sort(holes.begin(), holes.end(),
            [&](const HoleRef& a, const HoleRef& b) { return pts[a.rightmost].x > pts[b.rightmost].x; });

  for (const auto& hole : holes) {
    const Vec2 m = pts[hole.rightmost];
    // Nearest loop edge hit by the ray from m toward +x.
    double best_x = std::numeric_limits<double>::infinity();
    std::size_t best_edge = loop.size();
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vec2 a = pts[loop[i]], b = pts[loop[(i + 1) % loop.size()]];
      if (a.y == b.y) {
        if (a.y != m.y) continue;
        const double x = std::min(a.x, b.x);
        if (x >= m.x && x < best_x) {
          best_x = x;
          best_edge = i;
        }
        continue;
      }
      if ((a.y - m.y) * (b.y - m.y) > 0.0) continue;
      const double x = a.x + (m.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x >= m.x && x < best_x) {
        best_x = x;
        best_edge = i;
      }
    }
    if (best_edge == loop.size()) throw Error(ErrorCode::BadPolygon, "hole lies outside the outer ring");

    const std::size_t ia = best_edge, ib = (best_edge + 1) % loop.size();
    std::size_t bridge = pts[loop[ia]].x > pts[loop[ib]].x ? ia : ib;
    const Vec2 hit{best_x, m.y};
    const Vec2 p = pts[loop[bridge]];
    if (!(p == hit)) {
      // A reflex vertex inside triangle (m, hit, p) would block visibility;
      // take the one closest in angle to the ray.
      double best_angle = std::numeric_limits<double>::infinity();
      double best_dist = std::numeric_limits<double>::infinity();
      const bool ccw = cross2(hit - m, p - m) > 0.0;
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec2 q = pts[loop[i]];
        if (i == bridge || q.x < m.x) continue;
        const bool inside = ccw ? point_in_triangle(q, m, hit, p) : point_in_triangle(q, m, p, hit);
        if (!inside) continue;
        const Vec2 prev = pts[loop[(i + loop.size() - 1) % loop.size()]];
        const Vec2 next = pts[loop[(i + 1) % loop.size()]];
        if (cross2(q - prev, next - q) > 0.0) continue;  // convex
        const double angle = std::abs(std::atan2(q.y - m.y, q.x - m.x));
        const double dist = length2(q - m);
        if (angle < best_angle || (angle == best_angle && dist < best_dist)) {
          best_angle = angle;
          best_dist = dist;
          bridge = i;
        }
      }
    }

    std::vector<std::uint32_t> spliced;
    spliced.reserve(loop.size() + hole.count + 2);
    spliced.insert(spliced.end(), loop.begin(), loop.begin() + static_cast<std::ptrdiff_t>(bridge) + 1);
    const std::uint32_t start = hole.rightmost - hole.first;
    for (std::uint32_t k = 0; k <= hole.count; ++k) spliced.push_back(hole.first + (start + k) % hole.count);
    spliced.insert(spliced.end(), loop.begin() + static_cast<std::ptrdiff_t>(bridge), loop.end());
    loop = std::move(spliced);
  }
  return loop;
}

}  // namespace detail

/// Ear-clipping triangulation of a normalized polygon. Indices refer to the
/// rings' vertices concatenated in order. Output triangles are CCW.
inline std::vector<Triangle> triangulate(const Polygon& poly) {
  std::vector<Vec2> pts;
  for (const auto& ring : poly) pts.insert(pts.end(), ring.begin(), ring.end());
  std::vector<std::uint32_t> loop = poly.size() > 1 ? detail::bridge_holes(poly, pts) : [&] {
    std::vector<std::uint32_t> l(pts.size());
    for (std::uint32_t i = 0; i < l.size(); ++i) l[i] = i;
    return l;
  }();

  std::vector<Triangle> tris;
  tris.reserve(loop.size());
  auto is_ear = [&](std::size_t i) {
    const std::size_t n = loop.size();
    const std::uint32_t ia = loop[(i + n - 1) % n], ib = loop[i], ic = loop[(i + 1) % n];
    const Vec2 a = pts[ia], b = pts[ib], c = pts[ic];
    if (cross2(b - a, c - b) <= 0.0) return false;
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t v = loop[k];
      if (v == ia || v == ib || v == ic) continue;
      const Vec2 p = pts[v];
      if (p == a || p == b || p == c) continue;
      if (detail::point_in_triangle(p, a, b, c)) return false;
    }
    return true;
  };

  std::size_t guard = 0;
  std::size_t i = 0;
  while (loop.size() > 3) {
    const std::size_t n = loop.size();
    if (is_ear(i % n)) {
      const std::size_t k = i % n;
      tris.push_back({loop[(k + n - 1) % n], loop[k], loop[(k + 1) % n]});
      loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(k));
      guard = 0;
      continue;
    }
    ++i;
    if (++guard > n) {
      // Only collinear or numerically tied vertices remain. Drop a
      // zero-area vertex if there is one, otherwise give up.
      bool dropped = false;
      for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = pts[loop[(k + n - 1) % n]], b = pts[loop[k]], c = pts[loop[(k + 1) % n]];
        if (cross2(b - a, c - b) == 0.0) {
          loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(k));
          dropped = true;
          break;
        }
      }
      if (!dropped) throw Error(ErrorCode::BadPolygon, "triangulation failed");
      guard = 0;
    }
  }
  if (loop.size() == 3) {
    const Vec2 a = pts[loop[0]], b = pts[loop[1]], c = pts[loop[2]];
    if (cross2(b - a, c - b) > 0.0) tris.push_back({loop[0], loop[1], loop[2]});
  }
  return tris;
}

}  // namespace ramacity
