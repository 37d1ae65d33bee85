#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "semnav/mission.hpp"

using namespace semnav;

namespace {

/// A 10 x 10 room with one box and optionally one actor pacing along x = 5.
WorldState room(bool with_actor, Pose2 spawn = {1, 1, 0}) {
  auto w = std::make_shared<WorldDescription>();
  ElementRecord space;
  space.symbolic = {"room", ElementCategory::Space, "room", "", {}};
  space.explicit_model.model2d = axis_box(0, 0, 10, 10);
  w->spaces.push_back(space);
  w->elements.push_back(gen::obstacle("box", "box", axis_box(4, 0.5, 5, 1.5)));
  w->elements.back().explicit_model.model3d = Model3d{1.0, "crate"};
  if (with_actor) w->actors.push_back(ActorScript{"walker", "person", 0.3, 1.0, {{5, 8}, {5, 4}}});
  w->robot_spawn = spawn;
  w->robot_radius = 0.25;
  return make_world_state(std::move(w));
}

}  // namespace

TEST_CASE("initial state") {
  const auto ws = room(true);
  CHECK(ws.tick == 0);
  CHECK(ws.robot.pose == Pose2{1, 1, 0});
  REQUIRE(ws.actors.size() == 1);
  CHECK(ws.actors[0].position == Point2{5, 8});
  CHECK(ws.actors[0].next_waypoint == 1);
  CHECK(ws.geometry->obstacles.size() == 1);
  CHECK(ws.geometry->edges.size() == 4);
}

TEST_CASE("unicycle motion") {
  auto ws = room(false, {1, 5, kPi / 2});
  ws = step(ws, 0.5, 1.0, 0.2);
  CHECK(ws.tick == 1);
  CHECK(ws.robot.pose.x == doctest::Approx(1.0));
  CHECK(ws.robot.pose.y == doctest::Approx(5.5));
  CHECK(ws.robot.pose.heading == doctest::Approx(kPi / 2 + 0.1));
  CHECK(ws.static_collisions == 0);
  CHECK_THROWS_AS(step(ws, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("driving into a footprint stops short and counts a collision") {
  auto ws = room(false, {3.9, 1, 0});
  ws = step(ws, 1.0, 1.0, 0.0);
  CHECK(ws.static_collisions == 1);
  CHECK(ws.robot.pose.x < 4.0);
  CHECK(ws.robot.pose.x == doctest::Approx(4.0 - 1e-6).epsilon(1e-9));
  ws = step(ws, 1.0, 1.0, 0.0);
  CHECK(ws.static_collisions == 2);
  CHECK(ws.robot.pose.x < 4.0);
}

TEST_CASE("actors follow their waypoints and contacts count once") {
  auto ws = room(true, {5.2, 3.8, 0});
  for (int i = 0; i < 3; ++i) ws = step(ws, 1.0, 0.0, 0.0);
  CHECK(ws.actors[0].position.y == doctest::Approx(5.0));
  CHECK(ws.actor_contacts == 0);
  ws = step(ws, 1.0, 0.0, 0.0);  // reaches (5, 4): touching
  CHECK(ws.actors[0].position.y == doctest::Approx(4.0));
  CHECK(ws.actor_contacts == 1);
  CHECK(ws.actors[0].touching_robot);
  ws = step(ws, 0.1, 0.0, 0.0);  // turned back but still touching
  CHECK(ws.actor_contacts == 1);
  for (int i = 0; i < 3; ++i) ws = step(ws, 1.0, 0.0, 0.0);
  CHECK_FALSE(ws.actors[0].touching_robot);
  for (int i = 0; i < 10 && ws.actor_contacts < 2; ++i) ws = step(ws, 1.0, 0.0, 0.0);
  CHECK(ws.actor_contacts == 2);
  CHECK(ws.static_collisions == 0);
}

TEST_CASE("beam geometry") {
  CHECK(lidar_angle_increment({8, 2 * kPi, 4}) == doctest::Approx(kPi / 2));
  CHECK(lidar_angle_increment({8, kPi, 3}) == doctest::Approx(kPi / 2));
  const auto ws = room(false, {2, 1, 0});
  const auto scan = lidar_scan(ws, {8, kPi, 3});
  REQUIRE(scan.ranges.size() == 3);
  CHECK(scan.beam_angle(0) == doctest::Approx(-kPi / 2));
  CHECK(scan.ranges[1] == doctest::Approx(2.0));  // box face at x = 4
  CHECK(scan.ranges[0] == 8.0);                   // room walls are not obstacles
}

TEST_CASE("lidar matches exhaustive intersection") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ws = gen::random_world(rng);
    const LidarSpec spec{15.0, 2 * kPi, 64};
    const auto scan = lidar_scan(ws, spec);
    for (std::size_t i = 0; i < scan.ranges.size(); ++i)
      REQUIRE(std::abs(scan.ranges[i] - oracle::exhaustive_beam(ws, scan.beam_angle(i), spec.range)) <= 1e-9);
  }
}

TEST_CASE("range noise is seeded per run and tick") {
  auto a = room(true, {2, 1, 0});
  a.range_noise_sigma = 0.05;
  a.seed = 1;
  auto b = a;
  auto c = a;
  c.seed = 2;
  const LidarSpec spec{8, 2 * kPi, 64};
  CHECK(lidar_scan(a, spec).ranges == lidar_scan(b, spec).ranges);
  CHECK(lidar_scan(a, spec).ranges != lidar_scan(c, spec).ranges);
  const auto later = step(a, 0.1, 0, 0);
  auto clean = a;
  clean.range_noise_sigma = 0.0;
  const auto noisy = lidar_scan(a, spec), exact = lidar_scan(clean, spec);
  CHECK(lidar_scan(later, spec).ranges != noisy.ranges);
  for (std::size_t i = 0; i < exact.ranges.size(); ++i) {
    if (exact.ranges[i] == spec.range) CHECK(noisy.ranges[i] == spec.range);
    CHECK(noisy.ranges[i] > 0.0);
    CHECK(noisy.ranges[i] <= spec.range);
  }
}

TEST_CASE("camera: range and fov are inclusive, occlusion by other footprints") {
  auto ws = room(false, {2, 1, 0});
  SUBCASE("in view") {
    const auto f = semantic_detect(ws, {5, kPi / 2});
    REQUIRE(f.detections.size() == 1);
    CHECK(f.detections[0].symbol == "box");
    CHECK(f.detections[0].semantic_class == "crate");
  }
  SUBCASE("exactly at the range limit") { CHECK(semantic_detect(ws, {2.5, kPi / 2}).detections.size() == 1); }
  SUBCASE("just out of range") { CHECK(semantic_detect(ws, {2.49, kPi / 2}).detections.empty()); }
  SUBCASE("behind the robot") {
    ws.robot.pose.heading = kPi;
    CHECK(semantic_detect(ws, {5, kPi / 2}).detections.empty());
  }
  SUBCASE("occluded") {
    auto w = std::make_shared<WorldDescription>(*ws.world);
    w->elements.push_back(gen::obstacle("screen", "wall", axis_box(3, 0, 3.1, 3)));
    const auto occ = make_world_state(w);
    const auto f = semantic_detect(occ, {5, kPi});
    REQUIRE(f.detections.size() == 1);
    CHECK(f.detections[0].symbol == "screen");
  }
}

TEST_CASE("camera matches the segment-check oracle") {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ws = gen::random_world(rng);
    const SemanticCameraSpec cam{gen::uniform(rng, 2, 25), gen::uniform(rng, 0.5, 2 * kPi)};
    const auto ref = oracle::visible_targets(ws, cam);
    std::set<std::string> got;
    std::vector<Point2> actors;
    for (const auto& d : semantic_detect(ws, cam).detections) {
      if (d.symbol) got.insert(*d.symbol);
      else actors.push_back(d.position);
    }
    REQUIRE(got == ref.elements);
    REQUIRE(actors == ref.actors);
  }
}

TEST_CASE("trace records and digest") {
  CHECK(trace_hash({}) == kEmptyTraceDigest);
  const std::vector<std::string> one = {"0 1"};
  CHECK(trace_hash(one) == 0x37a4d9f99ce50baaULL);
  const auto ws = room(false, {1, 2, 0.5});
  CHECK(trace_record(ws) == "0 1.000000000 2.000000000 0.500000000 0.000000000 0.000000000 0");
}

TEST_CASE("simulation is reproducible") {
  auto run = [] {
    auto ws = room(true, {1, 5, 0});
    ws.range_noise_sigma = 0.02;
    ws.seed = 9;
    std::vector<std::string> trace;
    for (int i = 0; i < 50; ++i) {
      const auto scan = lidar_scan(ws, {8, 2 * kPi, 32});
      ws = step(ws, 0.1, std::min(1.0, scan.ranges[0] / 4), 0.1);
      trace.push_back(trace_record(ws));
    }
    return trace_hash(trace);
  };
  CHECK(run() == run());
}
