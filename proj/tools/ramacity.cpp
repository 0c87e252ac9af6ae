// ramacity ingest|goldens|simulate|serve
//
// Exit codes: 0 success, 1 runtime failure, 2 bad input (parse/script/config).

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ramacity/config.hpp"
#include "ramacity/error.hpp"
#include "ramacity/golden.hpp"
#include "ramacity/ingest.hpp"
#include "ramacity/scene_index.hpp"
#include "ramacity/service.hpp"
#include "ramacity/simulate.hpp"

namespace fs = std::filesystem;
using namespace ramacity;

namespace {

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::BadPolygon:
    case ErrorCode::OutOfDomain:
    case ErrorCode::HeightExceedsRadius:
    case ErrorCode::ScriptError:
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return 2;
    default:
      return 1;
  }
}

fs::path scene_or_config(const std::string& flag, const Config& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.scene_dir.empty()) return cfg.scene_dir;
  throw Error(ErrorCode::ConfigError, "no scene directory: pass --scene or set scene_dir in the config");
}

service::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"City-scale cylindrical deformation engine"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "JSON config file (default: $RAMACITY_CONFIG)");

  auto* ingest_cmd = app.add_subcommand("ingest", "Convert a GeoJSON city extract into a tiled scene");
  std::string geojson, out_dir;
  std::optional<double> lat, lon;
  unsigned threads = 1;
  ingest_cmd->add_option("geojson", geojson, "Input GeoJSON FeatureCollection")->required();
  ingest_cmd->add_option("-o,--out", out_dir, "Output scene directory")->required();
  auto* lat_opt = ingest_cmd->add_option("--lat", lat, "Origin latitude (default: bounding-box center)");
  auto* lon_opt = ingest_cmd->add_option("--lon", lon, "Origin longitude");
  lat_opt->needs(lon_opt);
  lon_opt->needs(lat_opt);
  ingest_cmd->add_option("-j,--threads", threads, "Tile writer threads")->check(CLI::Range(1u, 256u));

  auto* goldens_cmd = app.add_subcommand("goldens", "Write reference deformation vectors");
  std::size_t n = 1000;
  std::uint64_t seed = 42;
  std::string golden_out;
  goldens_cmd->add_option("-n,--count", n, "Random samples (3 fixed cases are added)")->check(CLI::PositiveNumber);
  goldens_cmd->add_option("--seed", seed, "RNG seed");
  goldens_cmd->add_option("-o,--out", golden_out, "Output file (default: stdout)");

  auto* sim_cmd = app.add_subcommand("simulate", "Replay a scripted session and report metrics");
  std::string sim_scene, script_path, sim_out, group = "Session";
  sim_cmd->add_option("--scene", sim_scene, "Scene directory (default: config scene_dir)");
  sim_cmd->add_option("script", script_path, "Session script (JSON lines)")->required();
  sim_cmd->add_option("-o,--out", sim_out, "Output directory for log.jsonl, metrics.json, table.txt")->required();
  sim_cmd->add_option("--group", group, "Row label for the metrics table");

  auto* serve_cmd = app.add_subcommand("serve", "Serve a scene over HTTP");
  std::string serve_scene, host = "127.0.0.1";
  std::optional<int> port;
  std::optional<std::string> viewer;
  serve_cmd->add_option("--scene", serve_scene, "Scene directory (default: config scene_dir)");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("-p,--port", port, "Port (default: config http_port; 0 picks a free port)");
  serve_cmd->add_option("--viewer", viewer, "Static viewer directory mounted at /");

  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt);

    if (*ingest_cmd) {
      ingest::IngestOptions opts;
      if (lat) opts.origin = geo::LonLat{*lon, *lat};
      opts.diameter_m = cfg.nav.diameter_m;
      opts.threads = threads;
      const auto m = ingest::ingest(geojson, out_dir, opts);
      std::cout << scene::manifest_path(out_dir).string() << "\n";
      std::cerr << m.tiles.size() << " tiles, max height " << m.max_height_m << " m\n";
      return 0;
    }

    if (*goldens_cmd) {
      const auto records = golden::generate(n, seed, cfg.nav.diameter_m);
      if (golden_out.empty()) {
        golden::write(std::cout, records);
      } else {
        scene::write_file(golden_out, golden::to_text(records));
      }
      return 0;
    }

    if (*sim_cmd) {
      const fs::path dir = scene_or_config(sim_scene, cfg);
      validate_against(cfg, scene::load_manifest(dir));
      const auto scene_index = SceneIndex::load(dir);
      const auto script = sim::parse_script_text(scene::read_file(script_path));
      const auto result = sim::simulate(script, scene_index, cfg.nav);
      auto rep = sim::report(result);
      rep.table = telemetry::metrics_table(result.metrics, group);
      fs::create_directories(sim_out);
      scene::write_file(fs::path(sim_out) / "log.jsonl", rep.log);
      scene::write_file(fs::path(sim_out) / "metrics.json", rep.metrics_json);
      scene::write_file(fs::path(sim_out) / "table.txt", rep.table);
      std::cout << rep.table;
      return 0;
    }

    if (*serve_cmd) {
      const fs::path dir = scene_or_config(serve_scene, cfg);
      service::ServiceOptions opts;
      if (viewer) opts.viewer_dir = *viewer;
      service::Service svc(service::load_scene_data(dir, cfg, opts), opts);
      const int bound = svc.bind(host, port.value_or(cfg.http_port));
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << "/" << std::endl;
      svc.run();
      g_service = nullptr;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (e.index()) std::cerr << " [index " << *e.index() << "]";
    std::cerr << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
