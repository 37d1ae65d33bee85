#include <cmath>
#include <stdexcept>

#include "semnav/navigation.hpp"

namespace semnav {

DrivingMap::DrivingMap(int width, int height, double resolution, Point2 origin, std::vector<std::uint8_t> static_costs)
    : width_(width), height_(height), resolution_(resolution), origin_(origin), static_(std::move(static_costs)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("driving map needs positive dimensions");
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  if (static_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("static cost count does not match dimensions");
  inflation_.assign(static_.size(), kFreeCost);
}

GridCell DrivingMap::cell_of(Point2 p) const {
  return {static_cast<std::int32_t>(std::floor((p.x - origin_.x) / resolution_)),
          static_cast<std::int32_t>(std::floor((p.y - origin_.y) / resolution_))};
}

std::optional<std::uint64_t> DrivingMap::dynamic_expiry(GridCell c) const {
  auto it = dynamic_.find(index(c));
  if (it == dynamic_.end()) return std::nullopt;
  return it->second;
}

void DrivingMap::set_inflation(std::vector<std::uint8_t> inflation) {
  if (inflation.size() != static_.size()) throw std::invalid_argument("inflation layer size mismatch");
  inflation_ = std::move(inflation);
}

std::vector<GridCell> DrivingMap::expire(std::uint64_t tick) {
  std::vector<GridCell> dropped;
  for (auto it = dynamic_.begin(); it != dynamic_.end();) {
    if (it->second <= tick) {
      dropped.push_back(cell(it->first));
      it = dynamic_.erase(it);
    } else {
      ++it;
    }
  }
  return dropped;
}

std::uint8_t inflation_for_distance(double dist, double robot_radius) {
  constexpr double eps = 1e-9;
  if (dist <= robot_radius + eps) return kInscribedCost;
  if (dist >= 2.0 * robot_radius - eps) return kFreeCost;
  return static_cast<std::uint8_t>(std::floor(kInscribedCost * (2.0 * robot_radius - dist) / robot_radius + eps));
}

DrivingMap build_driving_map(const MetricLayer& metric, double robot_radius) {
  if (!(robot_radius > 0.0)) throw std::invalid_argument("robot radius must be positive");
  if (robot_radius > std::max(metric.width, metric.height) * metric.resolution)
    throw std::invalid_argument("robot radius exceeds the map extent");

  std::vector<std::uint8_t> costs(metric.cells.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    switch (metric.cells[i]) {
      case Occupancy::Free: costs[i] = kFreeCost; break;
      case Occupancy::Occupied: costs[i] = kLethalCost; break;
      case Occupancy::Unknown: costs[i] = kUnknownCost; break;
    }
  }
  DrivingMap dm(metric.width, metric.height, metric.resolution, metric.origin, std::move(costs));

  const double res = metric.resolution;
  const int reach = static_cast<int>(std::ceil(2.0 * robot_radius / res));
  // distance-indexed kernel, shared by every lethal cell
  std::vector<std::uint8_t> kernel;
  const int side = 2 * reach + 1;
  kernel.resize(static_cast<std::size_t>(side) * side);
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx)
      kernel[static_cast<std::size_t>(dy + reach) * side + (dx + reach)] =
          inflation_for_distance(res * std::sqrt(static_cast<double>(dx * dx + dy * dy)), robot_radius);

  std::vector<std::uint8_t> inflation(dm.cell_count(), kFreeCost);
  for (int y = 0; y < dm.height(); ++y) {
    for (int x = 0; x < dm.width(); ++x) {
      if (dm.static_cost({x, y}) != kLethalCost) continue;
      for (int dy = -reach; dy <= reach; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= dm.height()) continue;
        for (int dx = -reach; dx <= reach; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= dm.width()) continue;
          auto& slot = inflation[static_cast<std::size_t>(ny) * dm.width() + nx];
          slot = std::max(slot, kernel[static_cast<std::size_t>(dy + reach) * side + (dx + reach)]);
        }
      }
    }
  }
  dm.set_inflation(std::move(inflation));
  return dm;
}

std::vector<GridCell> update_dynamic_layer(DrivingMap& dm, const LidarScan& scan, std::uint64_t tick,
                                           std::uint64_t ttl) {
  // nudge past the surface so a return lands in the cell of the thing it hit
  constexpr double kSurfaceNudge = 1e-6;
  std::map<std::size_t, std::uint8_t> before;
  auto remember = [&](GridCell c) { before.try_emplace(dm.index(c), dm.cost(c)); };

  std::vector<GridCell> hits;
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    if (!(r < scan.range_max)) continue;
    const double a = scan.beam_angle(i);
    const Point2 p{scan.pose.x + (r + kSurfaceNudge) * std::cos(a), scan.pose.y + (r + kSurfaceNudge) * std::sin(a)};
    const GridCell c = dm.cell_of(p);
    if (!dm.in_bounds(c) || dm.static_cost(c) == kLethalCost) continue;
    hits.push_back(c);
  }
  for (const auto& [idx, expiry] : dm.dynamic_entries())
    if (expiry <= tick) remember(dm.cell(idx));
  for (const auto& c : hits) remember(c);

  dm.expire(tick);
  for (const auto& c : hits) dm.set_dynamic(c, tick + ttl);

  std::vector<GridCell> changed;
  for (const auto& [idx, cost] : before)
    if (dm.cost(idx) != cost) changed.push_back(dm.cell(idx));
  return changed;
}

}  // namespace semnav
