#pragma once

// GeoJSON (pre-extracted OpenStreetMap) to tiled scene directory.
//
// Recognized features:
//   building=*                      Polygon / MultiPolygon -> Building
//   natural=water, water=*, waterway=riverbank, landuse=reservoir  -> water
//   leisure=park|garden, landuse=grass|park|recreation_ground       -> park
//   highway=*                       LineString / MultiLineString -> road
// Everything else is ignored.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ramacity/error.hpp"
#include "ramacity/geo.hpp"
#include "ramacity/geometry.hpp"
#include "ramacity/mesh.hpp"
#include "ramacity/scene.hpp"

namespace ramacity::ingest {

inline constexpr double kMetersPerLevel = 3.0;
inline constexpr double kDefaultHeight = 10.0;

namespace detail {

// Leading decimal number of a tag value ("93", "93 m", 93.5); nullopt if absent or non-positive.
inline std::optional<double> positive_number(const nlohmann::json& v) {
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    x = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (!std::isfinite(x) || x <= 0.0) return std::nullopt;
  return x;
}

inline std::string tag(const nlohmann::json& props, const char* key) {
  if (!props.is_object()) return {};
  const auto it = props.find(key);
  if (it == props.end()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_boolean()) return it->get<bool>() ? "yes" : "no";
  if (it->is_number()) return it->dump();
  return {};
}

}  // namespace detail

/// Height from OSM tags: `height`, else `building:levels` x 3 m, else 10 m.
inline double infer_height(const nlohmann::json& properties) {
  if (properties.is_object()) {
    if (auto it = properties.find("height"); it != properties.end()) {
      if (auto h = detail::positive_number(*it)) return *h;
    }
    if (auto it = properties.find("building:levels"); it != properties.end()) {
      if (auto l = detail::positive_number(*it)) return *l * kMetersPerLevel;
    }
  }
  return kDefaultHeight;
}

struct IngestOptions {
  std::optional<geo::LonLat> origin;  // bounding-box center when unset
  double diameter_m = geometry::kRamaDiameter;
  unsigned threads = 1;
};

/// Parsed, projected, not yet tiled.
struct ParsedCity {
  geo::LonLat origin;
  std::vector<scene::Building> buildings;  // sorted by id
  std::vector<scene::GroundFeature> ground;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline std::optional<scene::GroundClass> ground_class(const nlohmann::json& props) {
  const auto natural = tag(props, "natural");
  const auto waterway = tag(props, "waterway");
  const auto landuse = tag(props, "landuse");
  const auto leisure = tag(props, "leisure");
  if (natural == "water" || !tag(props, "water").empty() || waterway == "riverbank" || landuse == "reservoir") {
    return scene::GroundClass::Water;
  }
  if (leisure == "park" || leisure == "garden" || landuse == "grass" || landuse == "park" ||
      landuse == "recreation_ground") {
    return scene::GroundClass::Park;
  }
  if (!tag(props, "highway").empty()) return scene::GroundClass::Road;
  return std::nullopt;
}

inline std::string feature_id(const nlohmann::json& feature, const nlohmann::json& props, std::size_t index) {
  if (auto it = feature.find("id"); it != feature.end()) {
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    if (it->is_number()) return it->dump();
  }
  for (const char* key : {"@id", "id"}) {
    if (auto s = tag(props, key); !s.empty()) return s;
  }
  return "feature/" + std::to_string(index);
}

inline geo::LonLat read_position(const nlohmann::json& pos) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    throw Error(ErrorCode::ParseError, "position must be [lon, lat]");
  }
  return {pos[0].get<double>(), pos[1].get<double>()};
}

// Visits every coordinate of a geometry (any nesting depth).
template <typename F>
void for_each_position(const nlohmann::json& coords, F&& f) {
  if (coords.is_array() && !coords.empty() && coords[0].is_number()) {
    f(read_position(coords));
    return;
  }
  if (coords.is_array()) {
    for (const auto& c : coords) for_each_position(c, f);
  }
}

struct RawFeature {
  std::size_t index;
  std::string id;
  const nlohmann::json* feature;
};

}  // namespace detail

/// Parses and projects a GeoJSON FeatureCollection held in memory.
inline ParsedCity parse_geojson(const std::string& text, const IngestOptions& opts = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto line = detail::line_of_offset(text, e.byte);
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what(), line);
  }
  if (!doc.is_object() || detail::tag(doc, "type") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw Error(ErrorCode::ParseError, "top level must be a FeatureCollection with a features array");
  }
  const auto& features = doc["features"];

  ParsedCity city;
  if (opts.origin) {
    city.origin = *opts.origin;
  } else {
    double lon0 = 1e300, lon1 = -1e300, lat0 = 1e300, lat1 = -1e300;
    for (std::size_t i = 0; i < features.size(); ++i) {
      try {
        if (!features[i].contains("geometry") || features[i]["geometry"].is_null()) continue;
        detail::for_each_position(features[i]["geometry"].value("coordinates", nlohmann::json()),
                                  [&](geo::LonLat p) {
                                    lon0 = std::min(lon0, p.lon);
                                    lon1 = std::max(lon1, p.lon);
                                    lat0 = std::min(lat0, p.lat);
                                    lat1 = std::max(lat1, p.lat);
                                  });
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, "feature " + std::to_string(i) + ": " + e.what(), i);
      }
    }
    city.origin = lon0 <= lon1 ? geo::LonLat{0.5 * (lon0 + lon1), 0.5 * (lat0 + lat1)} : geo::LonLat{};
  }
  if (!geo::valid_origin(city.origin)) throw Error(ErrorCode::OutOfDomain, "origin outside the valid range");

  std::vector<detail::RawFeature> raws;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (!f.is_object() || detail::tag(f, "type") != "Feature") {
      throw Error(ErrorCode::ParseError, "feature " + std::to_string(i) + ": not a GeoJSON Feature", i);
    }
    const auto& props = f.contains("properties") ? f["properties"] : nlohmann::json();
    raws.push_back({i, detail::feature_id(f, props, i), &f});
  }
  std::stable_sort(raws.begin(), raws.end(),
                   [](const detail::RawFeature& a, const detail::RawFeature& b) { return a.id < b.id; });

  const double max_height = 0.5 * opts.diameter_m;
  for (const auto& raw : raws) {
    const auto& f = *raw.feature;
    const auto context = "feature " + std::to_string(raw.index) + " (" + raw.id + ")";
    const auto& props = f.contains("properties") ? f["properties"] : nlohmann::json();
    if (!f.contains("geometry") || f["geometry"].is_null()) continue;
    const auto& geom = f["geometry"];
    const auto type = detail::tag(geom, "type");
    if (!geom.contains("coordinates")) throw Error(ErrorCode::ParseError, context + ": geometry has no coordinates", raw.index);
    const auto& coords = geom["coordinates"];

    auto project = [&](const nlohmann::json& pos) { return geo::project_lonlat(detail::read_position(pos), city.origin); };
    auto read_ring = [&](const nlohmann::json& ring) {
      if (!ring.is_array()) throw Error(ErrorCode::ParseError, "ring must be an array");
      Ring out;
      for (const auto& pos : ring) out.push_back(project(pos));
      return out;
    };
    auto read_polygon = [&](const nlohmann::json& rings) {
      if (!rings.is_array() || rings.empty()) throw Error(ErrorCode::ParseError, "polygon must have rings");
      Polygon poly;
      for (const auto& r : rings) poly.push_back(read_ring(r));
      return normalize_polygon(std::move(poly));
    };

    try {
      const auto building = detail::tag(props, "building");
      const bool is_building = !building.empty() && building != "no";
      if (is_building && (type == "Polygon" || type == "MultiPolygon")) {
        const double height = infer_height(props);
        if (!(height < max_height)) {
          throw Error(ErrorCode::HeightExceedsRadius,
                      context + ": height " + std::to_string(height) + " m is not below d/2 = " +
                          std::to_string(max_height) + " m",
                      raw.index);
        }
        const auto name = detail::tag(props, "name");
        std::vector<Polygon> parts;
        if (type == "Polygon") {
          parts.push_back(read_polygon(coords));
        } else {
          for (const auto& p : coords) parts.push_back(read_polygon(p));
        }
        for (std::size_t k = 0; k < parts.size(); ++k) {
          scene::Building b;
          b.id = parts.size() == 1 ? raw.id : raw.id + "#" + std::to_string(k);
          b.footprint = std::move(parts[k]);
          b.height_m = height;
          if (!name.empty()) b.name = name;
          city.buildings.push_back(std::move(b));
        }
        continue;
      }
      const auto cls = detail::ground_class(props);
      if (!cls) continue;
      if (*cls == scene::GroundClass::Road) {
        std::vector<Polyline> lines;
        if (type == "LineString") {
          lines.push_back(read_ring(coords));
        } else if (type == "MultiLineString") {
          for (const auto& l : coords) lines.push_back(read_ring(l));
        } else {
          continue;
        }
        double width = kDefaultRoadWidth;
        if (auto it = props.find("width"); it != props.end()) {
          if (auto w = detail::positive_number(*it)) width = *w;
        }
        for (auto& line : lines) {
          line.erase(std::unique(line.begin(), line.end()), line.end());
          if (line.size() < 2) continue;
          city.ground.push_back({scene::GroundClass::Road, {std::move(line)}, width});
        }
      } else if (type == "Polygon") {
        city.ground.push_back({*cls, read_polygon(coords), 0.0});
      } else if (type == "MultiPolygon") {
        for (const auto& p : coords) city.ground.push_back({*cls, read_polygon(p), 0.0});
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::HeightExceedsRadius) throw;
      throw Error(ErrorCode::ParseError, context + ": " + e.what(), raw.index);
    }
  }
  // Split parts of a multipolygon can collide with an existing id ordering; resort.
  std::stable_sort(city.buildings.begin(), city.buildings.end(),
                   [](const scene::Building& a, const scene::Building& b) { return a.id < b.id; });
  return city;
}

/// Buildings go to the tile holding their footprint centroid; ground
/// features go to every tile they intersect. Tiles are ordered by (ix, iy).
inline std::vector<scene::SceneTile> partition(const ParsedCity& city) {
  std::map<scene::TileKey, scene::SceneTile> tiles;
  auto tile = [&](scene::TileKey k) -> scene::SceneTile& {
    auto& t = tiles[k];
    t.key = k;
    return t;
  };
  for (const auto& b : city.buildings) tile(scene::tile_of(polygon_centroid(b.footprint))).buildings.push_back(b);
  for (const auto& g : city.ground) {
    std::vector<Vec2> pts;
    for (const auto& r : g.geometry) pts.insert(pts.end(), r.begin(), r.end());
    const Rect box = bounds_of(pts);
    const auto lo = scene::tile_of(box.min), hi = scene::tile_of(box.max);
    for (auto ix = lo.ix; ix <= hi.ix; ++ix) {
      for (auto iy = lo.iy; iy <= hi.iy; ++iy) {
        const Rect r = scene::tile_bounds({ix, iy});
        const bool hit = g.cls == scene::GroundClass::Road ? polyline_intersects_rect(g.geometry[0], r)
                                                            : polygon_intersects_rect(g.geometry, r);
        if (hit) tile({ix, iy}).ground.push_back(g);
      }
    }
  }
  std::vector<scene::SceneTile> out;
  out.reserve(tiles.size());
  for (auto& [k, t] : tiles) out.push_back(std::move(t));
  return out;
}

/// Writes tiles/ and manifest.json under out_dir. Tile encoding and writing
/// fan out over `opts.threads` workers; output bytes do not depend on it.
inline scene::SceneManifest write_scene(const ParsedCity& city, const std::filesystem::path& out_dir, unsigned threads) {
  namespace fs = std::filesystem;
  const auto tiles = partition(city);
  fs::create_directories(out_dir / "tiles");
  // Stale tiles from an earlier run would be served as if current.
  for (const auto& entry : fs::directory_iterator(out_dir / "tiles")) {
    if (entry.path().extension() == ".rama") fs::remove(entry.path());
  }

  std::vector<std::uint64_t> sizes(tiles.size());
  std::vector<std::exception_ptr> errors(tiles.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tiles.size())));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < tiles.size(); i += workers) {
      try {
        const auto bytes = scene::encode_tile(tiles[i]);
        scene::write_file(scene::tile_path(out_dir, tiles[i].key), bytes);
        sizes[i] = bytes.size();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  scene::SceneManifest m;
  m.origin_lat = city.origin.lat;
  m.origin_lon = city.origin.lon;
  for (std::size_t i = 0; i < tiles.size(); ++i) m.tiles.push_back({tiles[i].key.ix, tiles[i].key.iy, sizes[i]});
  for (const auto& b : city.buildings) m.max_height_m = std::max(m.max_height_m, b.height_m);
  scene::write_file(scene::manifest_path(out_dir), scene::manifest_text(m));
  return m;
}

inline scene::SceneManifest ingest(const std::filesystem::path& geojson_path, const std::filesystem::path& out_dir,
                                   const IngestOptions& opts = {}) {
  const auto city = parse_geojson(scene::read_file(geojson_path), opts);
  return write_scene(city, out_dir, opts.threads);
}

}  // namespace ramacity::ingest
