#pragma once

// Semantic-episodic map: a metric occupancy grid, a topology graph over spaces,
// per-element semantic annotations and an append-only event log. The generator
// compiles it from whatever knowledge the robot holds locally, gated by which
// sensors the robot carries.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semnav/geometry.hpp"
#include "semnav/memory.hpp"
#include "semnav/world.hpp"

namespace semnav {

struct LidarSpec {
  double range = 8.0;
  double fov = 2.0 * kPi;
  int beam_count = 180;
};

struct SemanticCameraSpec {
  double range = 5.0;
  double fov = kPi / 2.0;
};

struct SensorSpec {
  std::optional<LidarSpec> lidar2d;
  std::optional<SemanticCameraSpec> semantic3d;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

enum class Occupancy : std::uint8_t { Free, Occupied, Unknown };

struct MetricLayer {
  double resolution = 0.1;
  Point2 origin;
  int width = 0;
  int height = 0;
  std::vector<Occupancy> cells;

  bool in_bounds(GridCell c) const { return c.ix >= 0 && c.iy >= 0 && c.ix < width && c.iy < height; }
  std::size_t index(GridCell c) const { return static_cast<std::size_t>(c.iy) * width + c.ix; }
  Occupancy at(GridCell c) const { return cells[index(c)]; }
  Point2 cell_center(GridCell c) const {
    return {origin.x + (c.ix + 0.5) * resolution, origin.y + (c.iy + 0.5) * resolution};
  }
  GridCell cell_of(Point2 p) const;
};

struct TopologyEdge {
  std::string a;
  std::string b;
  double cost = 0.0;

  friend bool operator==(const TopologyEdge&, const TopologyEdge&) = default;
};

struct TopologyLayer {
  std::map<std::string, Point2> nodes;  // space symbol -> footprint centroid
  std::vector<TopologyEdge> edges;      // stored once, a < b

  bool has_edge(const std::string& a, const std::string& b) const;
  /// Uniform-cost search over the edges; nullopt when disconnected.
  std::optional<double> shortest_distance(const std::string& from, const std::string& to) const;
};

struct SemanticAnnotation {
  std::string class_label;
  std::optional<std::vector<GridCell>> footprint_cells;
  std::optional<std::string> semantic_class;
  std::optional<std::string> containing_space;
  std::optional<Point2> reference_point;

  friend bool operator==(const SemanticAnnotation&, const SemanticAnnotation&) = default;
};

struct SemanticLayer {
  std::map<std::string, SemanticAnnotation> annotations;
};

enum class EpisodeKind : std::uint8_t {
  MissionStart,
  WaypointReached,
  Replan,
  ObstacleDetected,
  NovelObject,
  MissionComplete
};
std::string_view to_string(EpisodeKind k);

struct EpisodeEvent {
  std::uint64_t tick = 0;
  Pose2 pose;
  EpisodeKind kind = EpisodeKind::MissionStart;
  std::optional<std::string> subject;

  friend bool operator==(const EpisodeEvent&, const EpisodeEvent&) = default;
};

class EpisodicLayer {
 public:
  /// Throws std::invalid_argument if event.tick precedes the last recorded tick.
  void append(EpisodeEvent event);
  const std::vector<EpisodeEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

 private:
  std::vector<EpisodeEvent> events_;
};

struct SemanticEpisodicMap {
  MetricLayer metric;
  TopologyLayer topology;
  SemanticLayer semantic;
  EpisodicLayer episodic;
  SensorSpec sensor_spec;
  std::vector<std::string> diagnostics;
};

class MapGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultResolution = 0.1;

/// Builds the map from the env entries resident in STM/ONDEMAND. Throws
/// MapGenerationError when the goal is not among them or no space is.
SemanticEpisodicMap generate_map(const TierStore& store, const SensorSpec& sensors, const std::string& goal_symbol,
                                 double resolution = kDefaultResolution);

/// Occupied = static footprints of `obstacles`; Free = inside some space and
/// not Occupied; Unknown elsewhere. The grid covers `bounds` snapped outward to
/// the resolution.
MetricLayer build_metric_layer(const std::vector<ElementRecord>& spaces, const std::vector<ElementRecord>& obstacles,
                               double resolution, const Bounds& bounds);

/// One node per space, one edge per adjacent/connected relation between two
/// spaces. Relations touching anything else are skipped and reported.
TopologyLayer build_topology_layer(const std::vector<ElementRecord>& spaces, const std::vector<Relation>& relations,
                                   std::vector<std::string>* diagnostics = nullptr);

void append_episode(SemanticEpisodicMap& map, EpisodeEvent event);

// Export (map_export.cpp)
std::string metric_to_pgm(const MetricLayer& metric);
std::string metric_sidecar(const MetricLayer& metric);
/// Topology, semantic and episodic layers as canonical text.
std::string layers_document(const SemanticEpisodicMap& map);
std::string episodes_document(const EpisodicLayer& episodic);
MapTile metric_to_tile(const MetricLayer& metric, const std::string& id);

}  // namespace semnav
