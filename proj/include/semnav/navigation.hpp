#pragma once

// Autonomous navigation: a layered costmap (static, inflation, dynamic), an
// A* global planner, a D* Lite incremental replanner and a rotate-then-drive
// path follower.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "semnav/geometry.hpp"
#include "semnav/map_generator.hpp"
#include "semnav/sensors.hpp"

namespace semnav {

inline constexpr std::uint8_t kFreeCost = 0;
inline constexpr std::uint8_t kInscribedCost = 200;
inline constexpr std::uint8_t kUnknownCost = 253;
inline constexpr std::uint8_t kLethalCost = 254;
inline constexpr std::uint64_t kDefaultDynamicTtl = 30;

class DrivingMap {
 public:
  DrivingMap() = default;
  /// A map with the given static costs and empty inflation/dynamic layers.
  DrivingMap(int width, int height, double resolution, Point2 origin, std::vector<std::uint8_t> static_costs);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Point2 origin() const { return origin_; }
  std::size_t cell_count() const { return static_.size(); }

  bool in_bounds(GridCell c) const { return c.ix >= 0 && c.iy >= 0 && c.ix < width_ && c.iy < height_; }
  std::size_t index(GridCell c) const { return static_cast<std::size_t>(c.iy) * width_ + c.ix; }
  GridCell cell(std::size_t index) const {
    return {static_cast<std::int32_t>(index % width_), static_cast<std::int32_t>(index / width_)};
  }
  GridCell cell_of(Point2 p) const;
  Point2 cell_center(GridCell c) const {
    return {origin_.x + (c.ix + 0.5) * resolution_, origin_.y + (c.iy + 0.5) * resolution_};
  }

  std::uint8_t static_cost(GridCell c) const { return static_[index(c)]; }
  std::uint8_t inflation_cost(GridCell c) const { return inflation_[index(c)]; }
  bool has_dynamic(GridCell c) const { return dynamic_.contains(index(c)); }
  std::optional<std::uint64_t> dynamic_expiry(GridCell c) const;
  std::size_t dynamic_count() const { return dynamic_.size(); }
  /// cell index -> expiry tick
  const std::map<std::size_t, std::uint64_t>& dynamic_entries() const { return dynamic_; }

  /// max(static, inflation, dynamic)
  std::uint8_t cost(GridCell c) const { return cost(index(c)); }
  std::uint8_t cost(std::size_t i) const {
    std::uint8_t v = std::max(static_[i], inflation_[i]);
    return dynamic_.contains(i) ? kLethalCost : v;
  }
  bool passable(GridCell c) const { return in_bounds(c) && cost(c) < kUnknownCost; }

  void set_static_cost(GridCell c, std::uint8_t cost) { static_[index(c)] = cost; }
  void set_inflation(std::vector<std::uint8_t> inflation);
  void set_dynamic(GridCell c, std::uint64_t expiry_tick) { dynamic_[index(c)] = expiry_tick; }
  void clear_dynamic(GridCell c) { dynamic_.erase(index(c)); }
  /// Drops entries with expiry_tick <= tick; returns the cells dropped.
  std::vector<GridCell> expire(std::uint64_t tick);

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.1;
  Point2 origin_;
  std::vector<std::uint8_t> static_;
  std::vector<std::uint8_t> inflation_;
  std::map<std::size_t, std::uint64_t> dynamic_;
};

/// Static layer from the metric layer (Occupied 254, Unknown 253, Free 0) and
/// inflation around lethal cells: 200 within robot_radius, falling linearly to
/// 0 at twice the radius. Throws std::invalid_argument for a non-positive
/// radius or one larger than the map.
DrivingMap build_driving_map(const MetricLayer& metric, double robot_radius);

/// Inflation value for a cell at `dist` meters from the nearest lethal cell.
std::uint8_t inflation_for_distance(double dist, double robot_radius);

/// Marks every scan return outside static-lethal cells as a dynamic obstacle
/// until tick + ttl and drops expired entries. Returns cells whose composite
/// cost changed, sorted by index.
std::vector<GridCell> update_dynamic_layer(DrivingMap& dm, const LidarScan& scan, std::uint64_t tick,
                                           std::uint64_t ttl = kDefaultDynamicTtl);

// ---- grid search ------------------------------------------------------------

/// Edge costs are integers in micro-meter-equivalents so that independent
/// searches agree exactly: llround(step * (1 + cost/100) * 1e6).
using CostUnits = std::int64_t;
inline constexpr double kCostUnitsPerMeter = 1e6;

CostUnits step_cost(double resolution, bool diagonal, std::uint8_t destination_cost);
CostUnits octile_heuristic(double resolution, GridCell a, GridCell b);

struct Path {
  std::vector<GridCell> cells;
  double length_m = 0.0;
  CostUnits cost_units = 0;

  double cost() const { return static_cast<double>(cost_units) / kCostUnitsPerMeter; }
  std::vector<Point2> points(const DrivingMap& dm) const;
};

/// Diagonal moves need both orthogonal neighbours passable.
bool move_allowed(const DrivingMap& dm, GridCell from, GridCell to);

/// A* over the 8-connected grid with the octile heuristic; ties broken by
/// (f, h, row-major index). nullopt when the goal cannot be reached.
std::optional<Path> plan_global(const DrivingMap& dm, GridCell start, GridCell goal);

/// D* Lite. Holds a reference to the map, which must outlive it; call
/// notify/replan after every change to the map's costs.
class ReplanState {
 public:
  ReplanState(const DrivingMap& dm, GridCell start, GridCell goal);

  /// Moves the search start (the robot's cell).
  void set_start(GridCell start);
  /// Registers cost changes at these cells.
  void notify(std::span<const GridCell> changed);
  /// Repairs the search and extracts the current shortest path.
  std::optional<Path> replan();

  GridCell start() const { return start_; }
  GridCell goal() const { return goal_; }
  std::size_t expansions() const { return expansions_; }

 private:
  using Key = std::pair<CostUnits, CostUnits>;
  static constexpr CostUnits kInf = std::numeric_limits<CostUnits>::max() / 4;

  Key calculate_key(std::size_t s) const;
  void update_vertex(std::size_t s);
  void compute_shortest_path();
  CostUnits edge(std::size_t from, std::size_t to) const;
  CostUnits h(std::size_t a, std::size_t b) const;

  const DrivingMap* dm_;
  GridCell start_;
  GridCell goal_;
  GridCell last_;
  CostUnits km_ = 0;
  std::vector<CostUnits> g_;
  std::vector<CostUnits> rhs_;
  std::vector<Key> queued_key_;
  std::vector<bool> in_queue_;
  std::set<std::pair<Key, std::size_t>> queue_;
  std::size_t expansions_ = 0;
};

/// notify + replan.
std::optional<Path> replan_incremental(ReplanState& rs, std::span<const GridCell> changed);

// ---- path following ---------------------------------------------------------

struct RobotState {
  Pose2 pose;
  double v = 0.0;
  double omega = 0.0;
};

struct FollowerConfig {
  double v_max = 1.0;
  double omega_max = 1.5;
  double lookahead = 0.5;
  double goal_tolerance = 0.15;
  double rotate_threshold = kPi / 4.0;  // heading error above which the robot turns in place
  double heading_gain = 2.0;
  double approach_gain = 2.0;  // v <= approach_gain * distance to goal
};

struct FollowResult {
  double v = 0.0;
  double omega = 0.0;
  RobotState new_state;
  bool reached = false;
};

FollowResult follow_step(const RobotState& state, std::span<const Point2> path, double dt,
                         const FollowerConfig& config = {});

}  // namespace semnav
