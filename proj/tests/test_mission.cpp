#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "doctest.h"
#include "semnav/mission.hpp"

using namespace semnav;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario demo() { return load_scenario_file(data_dir() + "/demo.scenario"); }

int scenario_error_line(const std::string& text) {
  try {
    parse_scenario(text, data_dir());
  } catch (const ScenarioError& e) {
    return e.line;
  }
  return -1;
}

bool has_episode(const MissionReport& r, EpisodeKind k) {
  return std::any_of(r.episodes.begin(), r.episodes.end(), [&](const EpisodeEvent& e) { return e.kind == k; });
}

}  // namespace

TEST_CASE("scenario parsing") {
  const auto sc = demo();
  CHECK(sc.world_path == data_dir() + "/convention_center.world");
  CHECK(sc.rules_path == data_dir() + "/rules.txt");
  REQUIRE(sc.sensors.lidar2d);
  REQUIRE(sc.sensors.semantic3d);
  CHECK(sc.sensors.lidar2d->beam_count == 180);
  CHECK(sc.tiers[index_of(TierId::Network)].latency == 5);
  CHECK_FALSE(sc.tiers[index_of(TierId::Cloud)].capacity);
  CHECK(sc.goal == std::vector<Fact>{Fact{"at", {"robot", "hall_b"}}});
  CHECK(sc.start_space == "lobby");
  CHECK(sc.seed == 7);

  const auto minimal = parse_scenario("[world]\npath = w.world\n[sensors]\nlidar.range = 4\n[mission]\ngoal = at(robot,x)\n",
                                      "/tmp/base");
  CHECK(minimal.world_path == "/tmp/base/w.world");
  CHECK(minimal.behaviors_path == "/tmp/base/behaviors.txt");
  CHECK(minimal.rules_path.empty());
  CHECK(minimal.sensors.lidar2d->range == 4.0);
  CHECK(minimal.sensors.lidar2d->beam_count == 180);
  CHECK_FALSE(minimal.sensors.semantic3d);
  CHECK(minimal.max_ticks == 3000);
}

TEST_CASE("scenario errors") {
  const std::string head = "[world]\npath = w.world\n[sensors]\nlidar.range = 4\n[mission]\ngoal = at(robot,x)\n";
  CHECK(scenario_error_line(head + "[bogus]\n") == 7);
  CHECK(scenario_error_line(head + "[sim]\nseed = many\n") == 8);
  CHECK(scenario_error_line(head + "[sim]\nnot a pair\n") == 8);
  CHECK(scenario_error_line(head + "[tiers]\ndisk.capacity = 3\n") == 8);
  CHECK(scenario_error_line("[mission]\ngoal = at(robot,x)\n") == 0);
  CHECK(scenario_error_line("[world]\npath = w\n[sensors]\nlidar.fov = 9\n[mission]\ngoal = at(robot,x)\n") == 0);
  CHECK(scenario_error_line(head + "[sim]\ndt = 0\n") == 0);
  CHECK(scenario_error_line(head) == -1);
}

TEST_CASE("demo mission") {
  const auto run = run_mission(demo());
  const auto& r = run.report;
  CHECK(r.success);
  CHECK(r.failure.empty());
  CHECK(r.plan == std::vector<std::string>{"navigate(lobby,hall_a)", "navigate(hall_a,hall_b)"});
  CHECK(r.static_collisions == 0);
  CHECK(r.replans >= 1);
  CHECK(r.learned_in_cloud >= 1);
  CHECK(r.learned_entries >= r.learned_in_cloud);
  CHECK(r.ticks == run.trace.size());
  CHECK(r.trace_digest == trace_hash(run.trace));
  CHECK(r.distance > 26.0);
  for (auto k : {EpisodeKind::MissionStart, EpisodeKind::WaypointReached, EpisodeKind::Replan,
                 EpisodeKind::ObstacleDetected, EpisodeKind::NovelObject, EpisodeKind::MissionComplete})
    CHECK(has_episode(r, k));
  CHECK(r.episodes.front().kind == EpisodeKind::MissionStart);
  CHECK(r.episodes.back().kind == EpisodeKind::MissionComplete);
  for (std::size_t i = 1; i < r.episodes.size(); ++i) CHECK(r.episodes[i - 1].tick <= r.episodes[i].tick);

  // the robot ends inside the goal space
  const auto* hall_b = run.store->peek("env:hall_b", TierId::Cloud);
  REQUIRE(hall_b);
  const auto& pose = r.episodes.back().pose;
  CHECK(point_in_footprint(pose.position(), *std::get<ElementRecord>(hall_b->payload).explicit_model.model2d));
  CHECK(run.store->peek("map:driving", TierId::Stm) != nullptr);
}

TEST_CASE("report and trace text") {
  const auto run = run_mission(demo());
  const auto text = serialize_report(run.report);
  CHECK(text.starts_with("success: true\nfailure: none\nplan: navigate(lobby,hall_a) navigate(hall_a,hall_b)\n"));
  CHECK(text.find("tier CLOUD: hits=") != std::string::npos);
  CHECK(text.find(fmt::format("trace_digest: {:016x}\n", run.report.trace_digest)) != std::string::npos);
  const auto csv = trace_csv(run);
  CHECK(csv.starts_with("tick,x,y,theta,v,omega\n"));
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == run.report.ticks + 1);
}

TEST_CASE("runs are reproducible, and the noise seed matters") {
  auto sc = demo();
  sc.noise_sigma = 0.05;
  sc.seed = 1;
  const auto in = load_mission_inputs(sc);
  const auto a = run_mission(sc, in), b = run_mission(sc, in);
  CHECK(serialize_report(a.report) == serialize_report(b.report));
  CHECK(a.trace == b.trace);
  sc.seed = 2;
  const auto c = run_mission(sc, in);
  CHECK(c.report.trace_digest != a.report.trace_digest);
}

TEST_CASE("without a camera nothing is learned from detections") {
  const auto run = run_mission(load_scenario_file(data_dir() + "/demo_2d.scenario"));
  CHECK(run.report.success);
  CHECK_FALSE(has_episode(run.report, EpisodeKind::NovelObject));
}

TEST_CASE("failure modes") {
  SUBCASE("isolated goal") {
    const auto run = run_mission(load_scenario_file(data_dir() + "/impossible.scenario"));
    CHECK_FALSE(run.report.success);
    CHECK(run.report.failure == kFailUnsolvable);
    CHECK(run.report.ticks == 0);
  }
  SUBCASE("unknown goal") {
    auto sc = demo();
    sc.goal = {Fact{"at", {"robot", "atrium"}}};
    CHECK(run_mission(sc).report.failure == kFailUnknownGoal);
  }
  SUBCASE("unknown start") {
    auto sc = demo();
    sc.start_space = "booth_1";
    CHECK(run_mission(sc).report.failure == kFailUnknownStart);
  }
  SUBCASE("timeout") {
    auto sc = demo();
    sc.max_ticks = 40;
    const auto run = run_mission(sc);
    CHECK(run.report.failure == kFailTimeout);
    CHECK(run.report.ticks == 40);
  }
  SUBCASE("door bricked up") {
    auto text = slurp(data_dir() + "/convention_center.world");
    const std::string anchor = "  <robot ";
    const auto pos = text.find(anchor);
    REQUIRE(pos != std::string::npos);
    text.insert(pos,
                "  <element class=\"wall\">\n    <symbol name=\"bricks\"/>\n"
                "    <explicit2d><footprint>9.8,4.9 10.2,4.9 10.2,7.1 9.8,7.1</footprint></explicit2d>\n"
                "    <relation pred=\"inside\" object=\"hall_a\"/>\n  </element>\n");
    const auto dir = fs::temp_directory_path() / "semnav_bricked";
    fs::create_directories(dir);
    std::ofstream(dir / "world.world") << text;
    auto sc = demo();
    sc.world_path = (dir / "world.world").string();
    sc.patience = 10;
    const auto run = run_mission(sc);
    CHECK(run.report.failure == kFailUnreachable);
    CHECK(run.report.behavior_replans == 1);
    fs::remove_all(dir);
  }
}
