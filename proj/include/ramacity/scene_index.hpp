#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ramacity/polygon.hpp"
#include "ramacity/scene.hpp"

namespace ramacity {

/// Read-only building lookup for navigation: id lookup plus a uniform grid
/// for swept-disc collision queries.
class SceneIndex {
 public:
  SceneIndex() = default;

  explicit SceneIndex(std::vector<scene::Building> buildings, double cell_m = 100.0)
      : buildings_(std::move(buildings)), cell_(cell_m) {
    for (std::size_t i = 0; i < buildings_.size(); ++i) {
      const auto& b = buildings_[i];
      by_id_.emplace(b.id, i);
      centroids_.push_back(polygon_centroid(b.footprint));
      const Rect box = bounds_of(b.footprint.front());
      boxes_.push_back(box);
      const auto lo = cell_of(box.min), hi = cell_of(box.max);
      for (auto cx = lo.first; cx <= hi.first; ++cx) {
        for (auto cy = lo.second; cy <= hi.second; ++cy) grid_[{cx, cy}].push_back(i);
      }
    }
  }

  static SceneIndex from_tiles(const std::vector<scene::SceneTile>& tiles) {
    std::vector<scene::Building> all;
    for (const auto& t : tiles) all.insert(all.end(), t.buildings.begin(), t.buildings.end());
    return SceneIndex(std::move(all));
  }

  static SceneIndex load(const std::filesystem::path& scene_dir) {
    return from_tiles(scene::load_tiles(scene_dir, scene::load_manifest(scene_dir)));
  }

  const std::vector<scene::Building>& buildings() const { return buildings_; }

  const scene::Building* find(const std::string& id) const {
    const auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &buildings_[it->second];
  }

  Vec2 centroid(const scene::Building& b) const { return centroids_[index_of(b)]; }

  /// True when a disc of `radius` moving from `from` to `to` touches a
  /// building taller than `altitude`. Buildings the disc already overlaps
  /// at `from` are ignored so a user dropped inside a footprint can walk out.
  bool sweep_blocked(Vec2 from, Vec2 to, double radius, double altitude) const {
    const Rect sweep{{std::min(from.x, to.x) - radius, std::min(from.y, to.y) - radius},
                     {std::max(from.x, to.x) + radius, std::max(from.y, to.y) + radius}};
    std::vector<bool> tested(buildings_.size(), false);
    const auto lo = cell_of(sweep.min), hi = cell_of(sweep.max);
    for (auto cx = lo.first; cx <= hi.first; ++cx) {
      for (auto cy = lo.second; cy <= hi.second; ++cy) {
        const auto it = grid_.find({cx, cy});
        if (it == grid_.end()) continue;
        for (const auto i : it->second) {
          if (tested[i]) continue;
          tested[i] = true;
          const auto& b = buildings_[i];
          if (!(b.height_m > altitude)) continue;
          const Rect& box = boxes_[i];
          if (box.max.x < sweep.min.x || box.min.x > sweep.max.x || box.max.y < sweep.min.y ||
              box.min.y > sweep.max.y) {
            continue;
          }
          if (disc_touches(b.footprint, from, from, radius)) continue;
          if (disc_touches(b.footprint, from, to, radius)) return true;
        }
      }
    }
    return false;
  }

  /// Distance along the ray origin + s*dir (dir unit) past which the ray
  /// never re-enters the footprint; 0 if it never crosses the boundary.
  static double exit_distance(const Polygon& footprint, Vec2 origin, Vec2 dir) {
    double s_max = 0.0;
    for (const auto& ring : footprint) {
      for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        const Vec2 a = ring[i], b = ring[(i + 1) % n];
        const Vec2 e = b - a;
        const double denom = cross2(dir, e);
        if (denom == 0.0) continue;
        const Vec2 w = a - origin;
        const double s = cross2(w, e) / denom;
        const double u = cross2(w, dir) / denom;
        if (s >= 0.0 && u >= 0.0 && u <= 1.0) s_max = std::max(s_max, s);
      }
    }
    return s_max;
  }

 private:
  using Cell = std::pair<std::int64_t, std::int64_t>;

  Cell cell_of(Vec2 p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)), static_cast<std::int64_t>(std::floor(p.y / cell_))};
  }

  std::size_t index_of(const scene::Building& b) const {
    return static_cast<std::size_t>(&b - buildings_.data());
  }

  static bool disc_touches(const Polygon& poly, Vec2 from, Vec2 to, double radius) {
    if (point_in_polygon(poly, to) || point_in_polygon(poly, from)) return true;
    for (const auto& ring : poly) {
      for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        if (segment_segment_distance(from, to, ring[i], ring[(i + 1) % n]) <= radius) return true;
      }
    }
    return false;
  }

  std::vector<scene::Building> buildings_;
  std::vector<Vec2> centroids_;
  std::vector<Rect> boxes_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<Cell, std::vector<std::size_t>> grid_;
  double cell_ = 100.0;
};

}  // namespace ramacity
