#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "semnav/mission.hpp"

using namespace semnav;

namespace {

struct Demo {
  MissionInputs in = load_mission_inputs(load_scenario_file(data_dir() + "/demo.scenario"));
  TierStore store;

  Demo() {
    seed_store(store, *in.world, in.behaviors);
    store.prefetch_mission("hall_b", 3);
  }
};

SensorSpec lidar_only() { return SensorSpec{LidarSpec{}, std::nullopt}; }
SensorSpec camera_only() { return SensorSpec{std::nullopt, SemanticCameraSpec{}}; }
SensorSpec both() { return SensorSpec{LidarSpec{}, SemanticCameraSpec{}}; }

}  // namespace

TEST_CASE("sensor spec validation") {
  CHECK_THROWS_AS(SensorSpec{}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((SensorSpec{LidarSpec{0.0, 1.0, 10}, std::nullopt}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SensorSpec{LidarSpec{5.0, 7.0, 10}, std::nullopt}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SensorSpec{LidarSpec{5.0, 1.0, 0}, std::nullopt}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SensorSpec{std::nullopt, SemanticCameraSpec{5.0, 0.0}}.validate()), std::invalid_argument);
  CHECK_NOTHROW(both().validate());
}

TEST_CASE("metric layer classifies every cell like the brute-force oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ws = gen::random_world(rng);
    const auto& w = *ws.world;
    const double res = trial % 2 ? 0.25 : 0.5;
    const auto m = build_metric_layer(w.spaces, w.elements, res, {-1, -1, 21, 21});
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) {
        const Point2 c = m.cell_center({x, y});
        Occupancy expect = Occupancy::Unknown;
        for (const auto& s : w.spaces)
          if (oracle::winding_number(c, s.explicit_model.model2d->vertices)) expect = Occupancy::Free;
        for (const auto& e : w.elements)
          if (oracle::winding_number(c, e.explicit_model.model2d->vertices)) expect = Occupancy::Occupied;
        REQUIRE(m.at({x, y}) == expect);
      }
  }
}

TEST_CASE("metric grid snaps bounds outward") {
  const auto m = build_metric_layer({}, {}, 0.5, {0.2, -0.3, 2.1, 1.0});
  CHECK(m.origin.x == doctest::Approx(0.0));
  CHECK(m.origin.y == doctest::Approx(-0.5));
  CHECK(m.width == 5);
  CHECK(m.height == 3);
  CHECK(m.cell_of({0.6, -0.4}) == GridCell{1, 0});
  CHECK_THROWS(build_metric_layer({}, {}, 0.0, {0, 0, 1, 1}));
}

TEST_CASE("topology of the demo map") {
  Demo d;
  const auto map = generate_map(d.store, both(), "hall_b");
  CHECK(map.topology.nodes.size() == 3);
  CHECK(map.topology.has_edge("lobby", "hall_a"));
  CHECK(map.topology.has_edge("hall_b", "hall_a"));
  CHECK_FALSE(map.topology.has_edge("lobby", "hall_b"));
  CHECK(map.topology.shortest_distance("lobby", "hall_b").value() == doctest::Approx(26.0));
  CHECK(map.topology.shortest_distance("hall_b", "hall_b").value() == doctest::Approx(0.0));
  CHECK_FALSE(map.topology.shortest_distance("lobby", "storage"));
}

TEST_CASE("topology skips relations that do not join two spaces") {
  Demo d;
  std::vector<std::string> diag;
  const auto topo = build_topology_layer(d.in.world->spaces,
                                         {Relation{Predicate::Adjacent, "lobby", "info_desk"},
                                          Relation{Predicate::Connected, "lobby", "storage"},
                                          Relation{Predicate::Connected, "storage", "lobby"}},
                                         &diag);
  CHECK(topo.edges.size() == 1);
  CHECK(topo.edges[0].a == "lobby");
  CHECK(topo.edges[0].b == "storage");
  CHECK(diag.size() == 1);
}

TEST_CASE("annotations follow the sensors") {
  Demo d;
  const auto flat = generate_map(d.store, lidar_only(), "hall_b");
  const auto full = generate_map(d.store, both(), "hall_b");
  const auto cam = generate_map(d.store, camera_only(), "hall_b");
  REQUIRE(flat.semantic.annotations.contains("booth_1"));
  const auto& b2 = flat.semantic.annotations.at("booth_1");
  CHECK_FALSE(b2.semantic_class);
  CHECK(b2.footprint_cells);
  CHECK(b2.containing_space == "hall_a");
  CHECK(full.semantic.annotations.at("booth_1").semantic_class == "exhibition_booth");
  CHECK_FALSE(cam.semantic.annotations.at("booth_1").footprint_cells);
  CHECK(cam.semantic.annotations.at("booth_1").semantic_class == "exhibition_booth");
  CHECK(layers_document(flat).find("semantic_class") == std::string::npos);
  CHECK(layers_document(full).find("semantic_class=exhibition_booth") != std::string::npos);
}

TEST_CASE("goal must be local") {
  Demo d;
  CHECK_THROWS_AS(generate_map(d.store, both(), "storage"), MapGenerationError);
  TierStore empty;
  CHECK_THROWS_AS(generate_map(empty, both(), "hall_b"), MapGenerationError);
}

TEST_CASE("episodes are time ordered") {
  SemanticEpisodicMap map;
  append_episode(map, {5, {}, EpisodeKind::MissionStart, std::nullopt});
  append_episode(map, {5, {}, EpisodeKind::Replan, std::nullopt});
  CHECK_THROWS_AS(append_episode(map, {4, {}, EpisodeKind::Replan, std::nullopt}), std::invalid_argument);
  CHECK(map.episodic.size() == 2);
  const auto doc = episodes_document(map.episodic);
  CHECK(doc.find("kind=MISSION_START") != std::string::npos);
  CHECK(doc.find("kind=REPLAN") != std::string::npos);
}

TEST_CASE("metric export") {
  MetricLayer m;
  m.resolution = 0.5;
  m.width = 3;
  m.height = 2;
  m.cells = {Occupancy::Free, Occupancy::Occupied, Occupancy::Unknown, Occupancy::Free, Occupancy::Free,
             Occupancy::Free};
  const auto pgm = metric_to_pgm(m);
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(pgm.size() == header.size() + 6);
  CHECK(pgm.substr(0, header.size()) == header);
  // top row of the image is the last grid row
  CHECK(static_cast<unsigned char>(pgm[header.size()]) == 255);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 4]) == 0);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 5]) == 128);
  CHECK(metric_sidecar(m).find("resolution: 0.500000000") != std::string::npos);
  const auto tile = metric_to_tile(m, "map:tile");
  CHECK(tile.cells == "FOUFFF");
}
