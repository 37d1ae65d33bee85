#include "semnav/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "semnav/learning.hpp"

namespace semnav {

namespace {

constexpr double kContactBackoff = 1e-6;  // meters kept between the robot and a wall it ran into

std::shared_ptr<const StaticGeometry> build_geometry(const WorldDescription& world) {
  auto g = std::make_shared<StaticGeometry>();
  for (const auto& e : world.elements) {
    if (e.is_space() || !e.explicit_model.model2d || e.explicit_model.model2d->vertices.size() < 2) continue;
    const std::size_t owner = g->obstacles.size();
    g->obstacles.push_back(&e);
    const auto& v = e.explicit_model.model2d->vertices;
    for (std::size_t i = 0; i < v.size(); ++i) g->edges.push_back({v[i], v[(i + 1) % v.size()], owner});
  }
  return g;
}

void advance_actor(ActorState& a, const std::vector<Point2>& waypoints, double dt) {
  if (waypoints.size() < 2 || a.speed <= 0.0) return;
  const Point2 target = waypoints[a.next_waypoint];
  const double step_len = a.speed * dt;
  const double remaining = distance(a.position, target);
  if (remaining <= step_len + 1e-9) {
    a.position = target;
    a.next_waypoint = (a.next_waypoint + 1) % waypoints.size();
    return;
  }
  a.position = a.position + (step_len / remaining) * (target - a.position);
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on raw 53-bit draws keeps the stream identical across standard libraries
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

WorldState make_world_state(std::shared_ptr<const WorldDescription> world, std::uint64_t seed,
                            double range_noise_sigma) {
  if (!world) throw std::invalid_argument("world is null");
  if (range_noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  WorldState ws;
  ws.geometry = build_geometry(*world);
  ws.robot.pose = world->robot_spawn;
  ws.robot_radius = world->robot_radius;
  for (const auto& s : world->actors) {
    ActorState a{s.symbol, s.class_label, s.footprint_radius, s.speed, {}, 0, false};
    if (!s.waypoints.empty()) a.position = s.waypoints.front();
    if (s.waypoints.size() > 1) a.next_waypoint = 1;
    ws.actors.push_back(std::move(a));
  }
  ws.world = std::move(world);
  ws.seed = seed;
  ws.range_noise_sigma = range_noise_sigma;
  return ws;
}

WorldState step(const WorldState& ws, double dt, double v, double omega) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  WorldState next = ws;
  for (std::size_t i = 0; i < next.actors.size(); ++i) advance_actor(next.actors[i], ws.world->actors[i].waypoints, dt);

  const Pose2 p = ws.robot.pose;
  const Point2 from = p.position();
  const Point2 motion{v * std::cos(p.heading) * dt, v * std::sin(p.heading) * dt};
  double t = 1.0;
  bool blocked = false;
  if (motion.x != 0.0 || motion.y != 0.0) {
    for (const auto& e : ws.geometry->edges) {
      if (auto hit = ray_segment_hit(from, motion, e.a, e.b); hit && *hit <= t) {
        t = *hit;
        blocked = true;
      }
    }
  }
  if (blocked) {
    const double len = std::hypot(motion.x, motion.y);
    t = std::max(0.0, t - kContactBackoff / len);
    ++next.static_collisions;
  }
  next.robot.pose = Pose2{from.x + t * motion.x, from.y + t * motion.y, normalize_angle(p.heading + omega * dt)};
  next.robot.v = v;
  next.robot.omega = omega;

  for (auto& a : next.actors) {
    const bool touching = distance(a.position, next.robot.pose.position()) <= a.radius + next.robot_radius;
    if (touching && !a.touching_robot) ++next.actor_contacts;
    a.touching_robot = touching;
  }
  ++next.tick;
  return next;
}

double lidar_angle_increment(const LidarSpec& spec) {
  if (spec.beam_count <= 1) return 0.0;
  if (std::abs(spec.fov - 2.0 * kPi) < 1e-9) return spec.fov / spec.beam_count;
  return spec.fov / (spec.beam_count - 1);
}

LidarScan lidar_scan(const WorldState& ws, const LidarSpec& spec) {
  LidarScan scan;
  scan.pose = ws.robot.pose;
  scan.tick = ws.tick;
  scan.angle_min = -spec.fov / 2.0;
  scan.angle_increment = lidar_angle_increment(spec);
  scan.range_max = spec.range;
  scan.ranges.resize(static_cast<std::size_t>(std::max(spec.beam_count, 0)));

  std::optional<std::mt19937_64> rng;
  if (ws.range_noise_sigma > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(ws.seed), static_cast<std::uint32_t>(ws.seed >> 32),
                      static_cast<std::uint32_t>(ws.tick), static_cast<std::uint32_t>(ws.tick >> 32)};
    rng.emplace(seq);
  }

  const Point2 o = scan.pose.position();
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double ang = scan.beam_angle(i);
    const Point2 dir{std::cos(ang), std::sin(ang)};
    double r = spec.range;
    for (const auto& e : ws.geometry->edges)
      if (auto t = ray_segment_hit(o, dir, e.a, e.b)) r = std::min(r, *t);
    for (const auto& a : ws.actors)
      if (auto t = ray_circle_hit(o, dir, a.position, a.radius)) r = std::min(r, *t);
    if (rng) {
      const double noise = ws.range_noise_sigma * standard_normal(*rng);
      if (r < spec.range) r = std::clamp(r + noise, 1e-6, spec.range);
    }
    scan.ranges[i] = r;
  }
  return scan;
}

bool sight_blocked(const StaticGeometry& geometry, Point2 from, Point2 to, std::size_t ignore_owner) {
  for (const auto& e : geometry.edges)
    if (e.owner != ignore_owner && segments_intersect(from, to, e.a, e.b)) return true;
  return false;
}

SemanticFrame semantic_detect(const WorldState& ws, const SemanticCameraSpec& spec) {
  SemanticFrame frame;
  frame.tick = ws.tick;
  frame.pose = ws.robot.pose;
  const Point2 o = ws.robot.pose.position();
  auto in_view = [&](Point2 p) {
    const double d = distance(o, p);
    if (d > spec.range) return false;
    if (d == 0.0) return true;
    const double bearing = normalize_angle(std::atan2(p.y - o.y, p.x - o.x) - ws.robot.pose.heading);
    return std::abs(bearing) <= spec.fov / 2.0 + 1e-12;
  };
  const auto& g = *ws.geometry;
  for (std::size_t i = 0; i < g.obstacles.size(); ++i) {
    const ElementRecord& e = *g.obstacles[i];
    const Point2 ref = centroid(*e.explicit_model.model2d);
    if (!in_view(ref) || sight_blocked(g, o, ref, i)) continue;
    frame.detections.push_back(Detection{e.symbol(), record_class(e), ref, ws.tick});
  }
  for (const auto& a : ws.actors) {
    if (!in_view(a.position) || sight_blocked(g, o, a.position)) continue;
    frame.detections.push_back(Detection{std::nullopt, a.class_label, a.position, ws.tick});
  }
  return frame;
}

std::string trace_record(const WorldState& ws) {
  const auto& r = ws.robot;
  return fmt::format("{} {:.9f} {:.9f} {:.9f} {:.9f} {:.9f} {}", ws.tick, r.pose.x, r.pose.y, r.pose.heading, r.v,
                     r.omega, ws.static_collisions);
}

std::uint64_t trace_hash(std::span<const std::string> trace) {
  std::uint64_t h = kEmptyTraceDigest;
  auto feed = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& rec : trace) {
    for (char c : rec) feed(static_cast<unsigned char>(c));
    feed('\n');
  }
  return h;
}

}  // namespace semnav
