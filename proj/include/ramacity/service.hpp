#pragma once

// Read-only HTTP front end for a scene directory.
//
//   GET /api/manifest            manifest.json
//   GET /api/tile/{ix}/{iy}      tile bytes (application/octet-stream)
//   GET /api/goldens             golden vectors, text
//   GET /api/config              navigation tunables and key bindings
//   GET /...                     static viewer assets, if a viewer dir is given
//
// Everything is read into memory at construction and never written again,
// so handlers run concurrently without locks.

#include <charconv>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "ramacity/config.hpp"
#include "ramacity/error.hpp"
#include "ramacity/golden.hpp"
#include "ramacity/scene.hpp"

namespace ramacity::service {

inline constexpr const char* kCacheControl = "public, max-age=86400, immutable";

struct ServiceOptions {
  std::optional<std::filesystem::path> viewer_dir;
  std::size_t golden_count = 1000;
  std::uint64_t golden_seed = 42;
};

struct SceneData {
  std::string manifest;
  std::map<scene::TileKey, std::string> tiles;
  std::string goldens;
  std::string config;
};

inline nlohmann::ordered_json default_bindings() {
  return {{"toggle_rama", "KeyR"},   {"move_forward", "KeyW"}, {"altitude_up", "KeyQ"},
          {"altitude_down", "KeyE"}, {"fly_to", "KeyF"},       {"pause_axis", "Space"}};
}

inline SceneData load_scene_data(const std::filesystem::path& scene_dir, const Config& cfg,
                                 const ServiceOptions& opts = {}) {
  SceneData d;
  const auto m = scene::load_manifest(scene_dir);
  validate_against(cfg, m);
  d.manifest = scene::read_file(scene::manifest_path(scene_dir));
  for (const auto& t : m.tiles) {
    const scene::TileKey k{t.ix, t.iy};
    auto bytes = scene::read_file(scene::tile_path(scene_dir, k));
    if (bytes.size() != t.byte_size) {
      throw Error(ErrorCode::IoError, "tile " + scene::tile_filename(k) + " does not match its manifest size");
    }
    d.tiles.emplace(k, std::move(bytes));
  }
  d.goldens = golden::to_text(golden::generate(opts.golden_count, opts.golden_seed, cfg.nav.diameter_m));
  auto j = to_json(cfg);
  j.erase("scene_dir");
  j["bindings"] = default_bindings();
  d.config = j.dump(2) + "\n";
  return d;
}

/// Strict decimal int parse: optional '-', digits only, fits in int32.
inline std::optional<std::int32_t> parse_index(std::string_view s) {
  std::int32_t v = 0;
  if (s.empty() || s.front() == '+') return std::nullopt;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

class Service {
 public:
  explicit Service(SceneData data, const ServiceOptions& opts = {})
      : data_(std::make_shared<const SceneData>(std::move(data))) {
    server_.set_default_headers({{"Cache-Control", kCacheControl}});
    auto data_ptr = data_;
    server_.Get("/api/manifest", [data_ptr](const httplib::Request&, httplib::Response& res) {
      res.set_content(data_ptr->manifest, "application/json");
    });
    server_.Get("/api/goldens", [data_ptr](const httplib::Request&, httplib::Response& res) {
      res.set_content(data_ptr->goldens, "text/plain");
    });
    server_.Get("/api/config", [data_ptr](const httplib::Request&, httplib::Response& res) {
      res.set_content(data_ptr->config, "application/json");
    });
    server_.Get(R"(/api/tile/([^/]*)/([^/]*))", [data_ptr](const httplib::Request& req, httplib::Response& res) {
      const auto ix = parse_index(req.matches[1].str()), iy = parse_index(req.matches[2].str());
      if (!ix || !iy) {
        res.status = 400;
        res.set_content("malformed tile index\n", "text/plain");
        return;
      }
      const auto it = data_ptr->tiles.find({*ix, *iy});
      if (it == data_ptr->tiles.end()) {
        res.status = 404;
        res.set_content("no such tile\n", "text/plain");
        return;
      }
      res.set_content(it->second, "application/octet-stream");
    });
    if (opts.viewer_dir) {
      if (!server_.set_mount_point("/", opts.viewer_dir->string())) {
        throw Error(ErrorCode::IoError, "viewer directory not found: " + opts.viewer_dir->string());
      }
    }
  }

  /// Binds to `port`, or to a free port when 0; returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      port = server_.bind_to_any_port(host);
      if (port < 0) throw Error(ErrorCode::IoError, "could not bind any port on " + host);
      return port;
    }
    if (!server_.bind_to_port(host, port)) throw Error(ErrorCode::IoError, "could not bind " + host + ":" + std::to_string(port));
    return port;
  }

  /// Blocks until stop() is called.
  void run() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  std::shared_ptr<const SceneData> data_;
  httplib::Server server_;
};

}  // namespace ramacity::service
