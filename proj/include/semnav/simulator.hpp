#pragma once

// Deterministic 2D world: scripted actors, a unicycle robot, exact lidar
// raycasting and a ground-truth semantic detector.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semnav/map_generator.hpp"
#include "semnav/navigation.hpp"
#include "semnav/sensors.hpp"
#include "semnav/world.hpp"

namespace semnav {

struct ObstacleEdge {
  Point2 a;
  Point2 b;
  std::size_t owner = 0;  // index into StaticGeometry::obstacles
};

/// Non-space elements that carry a 2D footprint, flattened to edges. These
/// block motion, return lidar beams, occlude the camera and are detectable.
struct StaticGeometry {
  std::vector<const ElementRecord*> obstacles;
  std::vector<ObstacleEdge> edges;
};

struct ActorState {
  std::string symbol;
  std::string class_label;
  double radius = 0.0;
  double speed = 0.0;
  Point2 position;
  std::size_t next_waypoint = 0;
  bool touching_robot = false;
};

struct WorldState {
  std::shared_ptr<const WorldDescription> world;
  std::shared_ptr<const StaticGeometry> geometry;
  std::uint64_t tick = 0;
  RobotState robot;
  double robot_radius = 0.0;
  std::vector<ActorState> actors;
  std::uint64_t static_collisions = 0;
  std::uint64_t actor_contacts = 0;
  std::uint64_t seed = 0;
  double range_noise_sigma = 0.0;  // 0 disables lidar noise
};

/// Robot at the spawn pose, actors at their first waypoint heading for the second.
WorldState make_world_state(std::shared_ptr<const WorldDescription> world, std::uint64_t seed = 0,
                            double range_noise_sigma = 0.0);

/// Advances actors and the robot by dt under the command (v, omega). Robot
/// motion that would cross a static footprint edge stops just short of it and
/// counts a collision. Throws std::invalid_argument if dt <= 0.
WorldState step(const WorldState& ws, double dt, double v, double omega);

/// Beam directions: heading - fov/2 + i * fov/n for a full circle, otherwise
/// heading - fov/2 + i * fov/(n-1) so both fov edges are sampled.
double lidar_angle_increment(const LidarSpec& spec);

/// Exact ray casting against obstacle edges and actor disks. With noise enabled
/// returns are perturbed by a generator seeded from (seed, tick).
LidarScan lidar_scan(const WorldState& ws, const LidarSpec& spec);

/// Elements (by footprint centroid) and actors (by position) within range and
/// fov, both inclusive, whose sight line crosses no obstacle edge other than
/// the element's own.
SemanticFrame semantic_detect(const WorldState& ws, const SemanticCameraSpec& spec);

/// True when the segment from `from` to `to` touches an obstacle edge not owned
/// by `ignore_owner`.
bool sight_blocked(const StaticGeometry& geometry, Point2 from, Point2 to,
                   std::size_t ignore_owner = static_cast<std::size_t>(-1));

/// `tick x y theta v omega collisions`, 9 fractional digits.
std::string trace_record(const WorldState& ws);

inline constexpr std::uint64_t kEmptyTraceDigest = 0xcbf29ce484222325ULL;

/// FNV-1a 64 over the records, each terminated by '\n'.
std::uint64_t trace_hash(std::span<const std::string> trace);

}  // namespace semnav
