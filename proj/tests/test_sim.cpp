#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ramacity/config.hpp"
#include "ramacity/golden.hpp"
#include "ramacity/ingest.hpp"
#include "ramacity/simulate.hpp"

using namespace ramacity;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = RAMACITY_FIXTURES;
const std::string kBin = RAMACITY_BIN;

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ramacity_sim_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const fs::path& fixture_scene() {
  static const fs::path dir = [] {
    auto d = temp_dir("scene");
    ingest::ingest(kFixtures / "city.geojson", d, {geo::LonLat{-74.0060, 40.7128}});
    return d;
  }();
  return dir;
}

int count_kind(const telemetry::SessionLog& log, telemetry::EventKind k) {
  int n = 0;
  for (const auto& e : log) n += e.kind == k;
  return n;
}

int run(const std::string& args) { return WEXITSTATUS(std::system((kBin + " " + args).c_str())); }

}  // namespace

TEST(Script, ParsesCommands) {
  const auto s = sim::parse_script_text(
      "{\"t\":0,\"cmd\":\"start\",\"args\":{\"position\":[10,20],\"altitude_ix\":2}}\n"
      "\n"
      "{\"t\":1,\"cmd\":\"fly_to\",\"args\":{\"point\":[5,6]}}\n"
      "{\"t\":1,\"cmd\":\"head_pose\",\"args\":{\"yaw_deg\":90}}\n"
      "{\"t\":2,\"cmd\":\"end\"}\n");
  EXPECT_EQ(s.start.altitude_ix, 2);
  EXPECT_EQ(s.start.position.x, 10.0);
  ASSERT_EQ(s.lines.size(), 3u);
  EXPECT_EQ(s.lines[0].line_no, 3u);
  const auto& fly = std::get<nav::FlyTo>(std::get<nav::NavCommand>(s.lines[0].action));
  EXPECT_EQ(std::get<Vec3>(fly.target), (Vec3{5, 6, 0}));
}

TEST(Script, ErrorsCarryLineNumbers) {
  const std::pair<const char*, std::size_t> cases[] = {
      {"{\"t\":0,\"cmd\":\"toggle_rama\"}\n{\"t\":1,\"cmd\":\"warp\"}\n", 2},
      {"{\"t\":2,\"cmd\":\"toggle_rama\"}\n{\"t\":1,\"cmd\":\"toggle_rama\"}\n", 2},
      {"{\"t\":0,\"cmd\":\"toggle_rama\"}\n\n{not json\n", 3},
      {"{\"t\":1,\"cmd\":\"start\",\"args\":{\"position\":[0,0]}}\n", 1},
      {"{\"cmd\":\"toggle_rama\"}\n", 1},
  };
  for (const auto& [text, line] : cases) {
    try {
      sim::parse_script_text(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ScriptError) << text;
      EXPECT_EQ(e.index(), line) << text;
    }
  }
}

TEST(Simulate, ToggleOnceGivesTwoModeChanges) {
  const auto r = sim::simulate(sim::parse_script_text("{\"t\":0.5,\"cmd\":\"toggle_rama\"}\n"), SceneIndex{});
  EXPECT_EQ(count_kind(r.log, telemetry::EventKind::ModeChange), 2);
  EXPECT_EQ(r.final_state.mode, nav::Mode::RamaActive);
}

TEST(Simulate, EmptyScriptIsIdleAtStreetLevel) {
  const auto r = sim::simulate(sim::parse_script_text(""), SceneIndex{});
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.log.front().kind, telemetry::EventKind::SessionStart);
  EXPECT_EQ(r.log.back().kind, telemetry::EventKind::SessionEnd);
  EXPECT_EQ(r.metrics.altitude_share.at(5.0), 1.0);
  EXPECT_EQ(r.metrics.completion_time_s, 0.0);
}

TEST(Simulate, CommandTimingOnNinetyHertzGrid) {
  EXPECT_EQ(sim::tick_for(0.0), 1u);
  EXPECT_EQ(sim::tick_for(1.0), 90u);
  EXPECT_EQ(sim::tick_for(1.001), 91u);
  const auto r = sim::simulate(sim::parse_script_text("{\"t\":2,\"cmd\":\"end\"}\n"), SceneIndex{});
  EXPECT_NEAR(r.log.back().t, 2.0, 1e-9);
}

TEST(Simulate, UnknownPointTargetIsScriptError) {
  EXPECT_THROW(sim::simulate(sim::parse_script_text(
                                 "{\"t\":1,\"cmd\":\"point\",\"args\":{\"dir\":[1,0,0],\"target\":\"nope\"}}\n"),
                             SceneIndex{}),
               Error);
}

TEST(Simulate, TourOnFixtureCity) {
  const auto scene = SceneIndex::load(fixture_scene());
  std::ifstream in(kFixtures / "tour.jsonl");
  const auto script = sim::parse_script(in);
  const auto r = sim::simulate(script, scene);
  EXPECT_EQ(count_kind(r.log, telemetry::EventKind::FlyEnd), 5);
  EXPECT_EQ(count_kind(r.log, telemetry::EventKind::CommandDropped), 0);
  EXPECT_EQ(count_kind(r.log, telemetry::EventKind::PointingSample), 3);
  // 5 -> 100 -> 500 | 100 | 500 -> 1000 | 500 -> 100 | 5: four crossings.
  EXPECT_EQ(r.metrics.perspective_switches, 4);
  double sum = 0.0;
  for (const auto& [alt, s] : r.metrics.altitude_share) sum += s;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_NEAR(r.metrics.completion_time_s, 150.0, 1e-6);
  const auto again = sim::report(sim::simulate(script, scene));
  EXPECT_EQ(sim::report(r).log, again.log);
  EXPECT_EQ(sim::report(r).metrics_json, again.metrics_json);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(R"({"d_m": 6000, "thresholds": {"velocity_deg_s": 30}, "http_port": 9000})");
  EXPECT_EQ(c.nav.diameter_m, 6000.0);
  EXPECT_EQ(c.nav.follow_velocity_deg_s, 30.0);
  EXPECT_EQ(c.nav.follow_displacement_deg, 10.0);
  EXPECT_EQ(c.http_port, 9000);
  EXPECT_EQ(c.nav.presets, (std::vector<double>{5, 100, 500, 1000, 2000}));
}

TEST(Config, RejectsBadValues) {
  for (const char* text : {R"({"http_port": 80})", R"({"http_port": 70000})", R"({"presets": [5, 5]})",
                           R"({"d_m": 3000})", R"({"k_flight": 0})", R"({"unknown": 1})", "[1]", "{"}) {
    try {
      parse_config(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError) << text;
    }
  }
}

TEST(Config, DiameterMustClearTallestBuilding) {
  scene::SceneManifest m;
  m.max_height_m = 300.0;
  Config c;
  EXPECT_NO_THROW(validate_against(c, m));
  m.max_height_m = 2500.0;
  EXPECT_THROW(validate_against(c, m), Error);
}

TEST(Config, EnvironmentVariable) {
  const auto dir = temp_dir("config");
  scene::write_file(dir / "c.json", R"({"forward_speed": 7})");
  ::setenv(kConfigEnv, (dir / "c.json").c_str(), 1);
  EXPECT_EQ(load_config(std::nullopt).nav.forward_speed, 7.0);
  scene::write_file(dir / "d.json", R"({"forward_speed": 9})");
  EXPECT_EQ(load_config(dir / "d.json").nav.forward_speed, 9.0);
  ::unsetenv(kConfigEnv);
  EXPECT_EQ(load_config(std::nullopt).nav.forward_speed, 15.0);
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
}

TEST(Cli, IngestMalformedExitsTwo) {
  const auto dir = temp_dir("cli_bad");
  scene::write_file(dir / "bad.geojson",
                    R"({"type":"FeatureCollection","features":[{"type":"Feature","id":"way/1","properties":{"building":"yes"},)"
                    R"("geometry":{"type":"Polygon","coordinates":[[[0,0],[0.001,0.001],[0.001,0],[0,0.001],[0,0]]]}}]})");
  const auto err = dir / "stderr.txt";
  EXPECT_EQ(run("ingest " + (dir / "bad.geojson").string() + " -o " + (dir / "out").string() + " 2> " + err.string()), 2);
  const auto msg = scene::read_file(err);
  EXPECT_NE(msg.find("way/1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("[index 0]"), std::string::npos) << msg;
}

TEST(Cli, IngestIsByteIdenticalOnRerun) {
  const auto dir = temp_dir("cli_ingest");
  const auto in = (kFixtures / "city.geojson").string();
  ASSERT_EQ(run("ingest " + in + " -o " + (dir / "a").string() + " -j 1 2>/dev/null >/dev/null"), 0);
  ASSERT_EQ(run("ingest " + in + " -o " + (dir / "b").string() + " -j 4 2>/dev/null >/dev/null"), 0);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(scene::read_file(e.path()), scene::read_file(dir / "b" / rel)) << rel;
  }
}

TEST(Cli, GoldensCountAndDeterminism) {
  const auto dir = temp_dir("cli_goldens");
  ASSERT_EQ(run("goldens -n 1000 --seed 42 -o " + (dir / "a.txt").string()), 0);
  ASSERT_EQ(run("goldens -n 1000 --seed 42 -o " + (dir / "b.txt").string()), 0);
  const auto a = scene::read_file(dir / "a.txt");
  EXPECT_EQ(a, scene::read_file(dir / "b.txt"));
  std::istringstream is(a);
  const auto records = golden::read(is);
  EXPECT_EQ(records.size(), 1003u);
  EXPECT_NE(a.find("5000 0 0 5000 -> 2500 0 2500\n"), std::string::npos);
  EXPECT_NE(run("goldens -n 0 2>/dev/null"), 0);
}

TEST(Cli, SimulateWritesReport) {
  const auto dir = temp_dir("cli_sim");
  const auto cmd = "simulate --scene " + fixture_scene().string() + " " + (kFixtures / "tour.jsonl").string() + " -o ";
  ASSERT_EQ(run(cmd + (dir / "a").string() + " >/dev/null"), 0);
  ASSERT_EQ(run(cmd + (dir / "b").string() + " >/dev/null"), 0);
  for (const char* f : {"log.jsonl", "metrics.json", "table.txt"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(scene::read_file(dir / "a" / f), scene::read_file(dir / "b" / f)) << f;
  }
  EXPECT_NE(scene::read_file(dir / "a" / "table.txt").find("Perspective switches: 4"), std::string::npos);
  scene::write_file(dir / "bad.jsonl", "{\"t\":1,\"cmd\":\"toggle_rama\"}\n{\"t\":2,\"cmd\":\"jump\"}\n");
  EXPECT_EQ(run("simulate --scene " + fixture_scene().string() + " " + (dir / "bad.jsonl").string() + " -o " +
                (dir / "c").string() + " 2>/dev/null"),
            2);
}
