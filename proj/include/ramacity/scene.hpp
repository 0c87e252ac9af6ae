#pragma once

// Scene data and its on-disk forms.
//
// Tile binary layout, little-endian throughout:
//   "RAMA"  u16 version(=1)  i32 tile_ix  i32 tile_iy  u32 n_buildings  u32 n_ground
//   building: u32 id_len, id bytes, f64 height_m, u32 n_rings,
//             per ring { u32 n_vertices, n x (f64 x, f64 y) },
//             u32 name_len, name bytes
//   ground:   u8 class (0 water, 1 park, 2 road), f64 width_m, u32 n_rings, rings as above
// Roads carry one ring holding the polyline; water and parks carry polygons.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ramacity/error.hpp"
#include "ramacity/polygon.hpp"

namespace ramacity::scene {

inline constexpr double kTileSize = 1000.0;
inline constexpr std::uint16_t kTileVersion = 1;
inline constexpr std::string_view kTileMagic = "RAMA";

struct Building {
  std::string id;
  Polygon footprint;
  double height_m = 0.0;
  std::optional<std::string> name;

  friend bool operator==(const Building&, const Building&) = default;
};

enum class GroundClass : std::uint8_t { Water = 0, Park = 1, Road = 2 };

inline std::string_view to_string(GroundClass c) {
  switch (c) {
    case GroundClass::Water: return "water";
    case GroundClass::Park: return "park";
    case GroundClass::Road: return "road";
  }
  return "unknown";
}

struct GroundFeature {
  GroundClass cls = GroundClass::Water;
  Polygon geometry;     // roads: a single polyline in geometry[0]
  double width_m = 0.0; // roads only

  friend bool operator==(const GroundFeature&, const GroundFeature&) = default;
};

struct TileKey {
  std::int32_t ix = 0;
  std::int32_t iy = 0;

  friend auto operator<=>(const TileKey&, const TileKey&) = default;
};

inline TileKey tile_of(Vec2 p) {
  return {static_cast<std::int32_t>(std::floor(p.x / kTileSize)),
          static_cast<std::int32_t>(std::floor(p.y / kTileSize))};
}

inline Rect tile_bounds(TileKey k) {
  return {{k.ix * kTileSize, k.iy * kTileSize}, {(k.ix + 1) * kTileSize, (k.iy + 1) * kTileSize}};
}

struct SceneTile {
  TileKey key;
  std::vector<Building> buildings;
  std::vector<GroundFeature> ground;

  friend bool operator==(const SceneTile&, const SceneTile&) = default;
};

struct TileEntry {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  std::uint64_t byte_size = 0;

  friend bool operator==(const TileEntry&, const TileEntry&) = default;
};

struct SceneManifest {
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  double tile_size_m = kTileSize;
  std::vector<TileEntry> tiles;
  double max_height_m = 0.0;

  friend bool operator==(const SceneManifest&, const SceneManifest&) = default;
};

// --- binary codec -----------------------------------------------------------

namespace detail {

class Writer {
 public:
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() { return std::string(bytes(u32())); }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::ParseError, "tile truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline void write_rings(Writer& w, const Polygon& rings) {
  w.u32(static_cast<std::uint32_t>(rings.size()));
  for (const auto& ring : rings) {
    w.u32(static_cast<std::uint32_t>(ring.size()));
    for (const auto& p : ring) {
      w.f64(p.x);
      w.f64(p.y);
    }
  }
}

inline Polygon read_rings(Reader& r) {
  Polygon rings(r.u32());
  for (auto& ring : rings) {
    ring.resize(r.u32());
    for (auto& p : ring) {
      p.x = r.f64();
      p.y = r.f64();
    }
  }
  return rings;
}

}  // namespace detail

inline std::string encode_tile(const SceneTile& tile) {
  detail::Writer w;
  w.bytes(kTileMagic);
  w.u16(kTileVersion);
  w.i32(tile.key.ix);
  w.i32(tile.key.iy);
  w.u32(static_cast<std::uint32_t>(tile.buildings.size()));
  w.u32(static_cast<std::uint32_t>(tile.ground.size()));
  for (const auto& b : tile.buildings) {
    w.str(b.id);
    w.f64(b.height_m);
    detail::write_rings(w, b.footprint);
    w.str(b.name.value_or(""));
  }
  for (const auto& g : tile.ground) {
    w.u8(static_cast<std::uint8_t>(g.cls));
    w.f64(g.width_m);
    detail::write_rings(w, g.geometry);
  }
  return w.take();
}

inline SceneTile decode_tile(std::string_view data) {
  detail::Reader r(data);
  if (r.bytes(4) != kTileMagic) throw Error(ErrorCode::ParseError, "bad tile magic");
  if (const auto v = r.u16(); v != kTileVersion) {
    throw Error(ErrorCode::ParseError, "unsupported tile version " + std::to_string(v));
  }
  SceneTile tile;
  tile.key.ix = r.i32();
  tile.key.iy = r.i32();
  tile.buildings.resize(r.u32());
  tile.ground.resize(r.u32());
  for (auto& b : tile.buildings) {
    b.id = r.str();
    b.height_m = r.f64();
    b.footprint = detail::read_rings(r);
    auto name = r.str();
    if (!name.empty()) b.name = std::move(name);
  }
  for (auto& g : tile.ground) {
    const auto cls = r.u8();
    if (cls > 2) throw Error(ErrorCode::ParseError, "unknown ground class " + std::to_string(cls));
    g.cls = static_cast<GroundClass>(cls);
    g.width_m = r.f64();
    g.geometry = detail::read_rings(r);
  }
  if (!r.done()) throw Error(ErrorCode::ParseError, "trailing bytes after tile payload");
  return tile;
}

// --- manifest ----------------------------------------------------------------

inline nlohmann::ordered_json to_json(const SceneManifest& m) {
  nlohmann::ordered_json j;
  j["origin_lat"] = m.origin_lat;
  j["origin_lon"] = m.origin_lon;
  j["tile_size_m"] = m.tile_size_m;
  j["tiles"] = nlohmann::ordered_json::array();
  for (const auto& t : m.tiles) {
    j["tiles"].push_back({{"tile_ix", t.ix}, {"tile_iy", t.iy}, {"byte_size", t.byte_size}});
  }
  j["max_height_m"] = m.max_height_m;
  return j;
}

inline SceneManifest manifest_from_json(const nlohmann::json& j) {
  try {
    SceneManifest m;
    m.origin_lat = j.at("origin_lat").get<double>();
    m.origin_lon = j.at("origin_lon").get<double>();
    m.tile_size_m = j.at("tile_size_m").get<double>();
    m.max_height_m = j.at("max_height_m").get<double>();
    for (const auto& t : j.at("tiles")) {
      m.tiles.push_back({t.at("tile_ix").get<std::int32_t>(), t.at("tile_iy").get<std::int32_t>(),
                         t.at("byte_size").get<std::uint64_t>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
}

inline std::string manifest_text(const SceneManifest& m) { return to_json(m).dump(2) + "\n"; }

inline std::string tile_filename(TileKey k) {
  return std::to_string(k.ix) + "_" + std::to_string(k.iy) + ".rama";
}

inline std::filesystem::path manifest_path(const std::filesystem::path& scene_dir) {
  return scene_dir / "manifest.json";
}

inline std::filesystem::path tile_path(const std::filesystem::path& scene_dir, TileKey k) {
  return scene_dir / "tiles" / tile_filename(k);
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + p.string());
}

inline SceneManifest load_manifest(const std::filesystem::path& scene_dir) {
  const auto text = read_file(manifest_path(scene_dir));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return manifest_from_json(j);
}

/// Every tile listed in the manifest, in manifest order.
inline std::vector<SceneTile> load_tiles(const std::filesystem::path& scene_dir, const SceneManifest& m) {
  std::vector<SceneTile> tiles;
  tiles.reserve(m.tiles.size());
  for (const auto& t : m.tiles) tiles.push_back(decode_tile(read_file(tile_path(scene_dir, {t.ix, t.iy}))));
  return tiles;
}

}  // namespace ramacity::scene
