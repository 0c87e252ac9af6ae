#pragma once

#include <cstdint>
#include <vector>

#include "ramacity/error.hpp"
#include "ramacity/polygon.hpp"
#include "ramacity/vec3.hpp"

namespace ramacity {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;  // CCW seen from outside
};

/// Signed enclosed volume by the divergence theorem.
inline double mesh_volume(const TriangleMesh& mesh) {
  double six_v = 0.0;
  for (const auto& t : mesh.triangles) {
    six_v += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
  }
  return six_v / 6.0;
}

inline Vec3 triangle_normal(const TriangleMesh& mesh, const Triangle& t) {
  const Vec3 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
  return cross(b - a, c - a);
}

/// Prism over the footprint: ground vertices first, then roof vertices in
/// the same order. Roof and floor come from one triangulation; every side
/// edge contributes two triangles.
inline TriangleMesh extrude_building(const Polygon& footprint, double height_m) {
  if (!(height_m > 0.0)) throw Error(ErrorCode::BadPolygon, "building height must be positive");
  const Polygon poly = normalize_polygon(footprint);
  const std::vector<Triangle> cap = triangulate(poly);

  TriangleMesh mesh;
  std::uint32_t n = 0;
  for (const auto& ring : poly) n += static_cast<std::uint32_t>(ring.size());
  mesh.vertices.reserve(2 * n);
  for (double z : {0.0, height_m}) {
    for (const auto& ring : poly) {
      for (const auto& p : ring) mesh.vertices.push_back({p.x, p.y, z});
    }
  }

  mesh.triangles.reserve(2 * cap.size() + 2 * n);
  for (const auto& t : cap) {
    mesh.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});  // roof, facing up
    mesh.triangles.push_back({t[0], t[2], t[1]});              // floor, facing down
  }
  std::uint32_t base = 0;
  for (const auto& ring : poly) {
    const auto m = static_cast<std::uint32_t>(ring.size());
    for (std::uint32_t i = 0; i < m; ++i) {
      const std::uint32_t a = base + i, b = base + (i + 1) % m;
      mesh.triangles.push_back({a, b, b + n});
      mesh.triangles.push_back({a, b + n, a + n});
    }
    base += m;
  }
  return mesh;
}

inline constexpr double kRoadElevation = 0.01;
inline constexpr double kDefaultRoadWidth = 8.0;

/// Flat ribbon of half-width width_m/2 around the polyline, one quad per
/// segment, lifted slightly above the ground.
inline TriangleMesh road_ribbon(const Polyline& line, double width_m) {
  if (!(width_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "road width must be positive");
  TriangleMesh mesh;
  const double half = 0.5 * width_m;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 a = line[i], b = line[i + 1];
    const Vec2 d = b - a;
    const double len = length2(d);
    if (len == 0.0) continue;
    const Vec2 off{-d.y / len * half, d.x / len * half};
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (Vec2 p : {a - off, b - off, b + off, a + off}) mesh.vertices.push_back({p.x, p.y, kRoadElevation});
    mesh.triangles.push_back({base, base + 1, base + 2});
    mesh.triangles.push_back({base, base + 2, base + 3});
  }
  return mesh;
}

}  // namespace ramacity
