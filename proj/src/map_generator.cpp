#include "semnav/map_generator.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include <fmt/format.h>

namespace semnav {

void SensorSpec::validate() const {
  if (!lidar2d && !semantic3d) throw std::invalid_argument("sensor spec needs at least one sensor");
  if (lidar2d) {
    if (!(lidar2d->range > 0.0)) throw std::invalid_argument("lidar range must be positive");
    if (!(lidar2d->fov > 0.0 && lidar2d->fov <= 2.0 * kPi)) throw std::invalid_argument("lidar fov must be in (0, 2pi]");
    if (lidar2d->beam_count < 1) throw std::invalid_argument("lidar beam count must be positive");
  }
  if (semantic3d) {
    if (!(semantic3d->range > 0.0)) throw std::invalid_argument("semantic camera range must be positive");
    if (!(semantic3d->fov > 0.0 && semantic3d->fov <= 2.0 * kPi))
      throw std::invalid_argument("semantic camera fov must be in (0, 2pi]");
  }
}

GridCell MetricLayer::cell_of(Point2 p) const {
  return {static_cast<std::int32_t>(std::floor((p.x - origin.x) / resolution)),
          static_cast<std::int32_t>(std::floor((p.y - origin.y) / resolution))};
}

bool TopologyLayer::has_edge(const std::string& a, const std::string& b) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const TopologyEdge& e) { return (e.a == a && e.b == b) || (e.a == b && e.b == a); });
}

std::optional<double> TopologyLayer::shortest_distance(const std::string& from, const std::string& to) const {
  if (!nodes.contains(from) || !nodes.contains(to)) return std::nullopt;
  std::map<std::string, double> best{{from, 0.0}};
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  open.push({0.0, from});
  std::set<std::string> done;
  while (!open.empty()) {
    auto [d, u] = open.top();
    open.pop();
    if (!done.insert(u).second) continue;
    if (u == to) return d;
    for (const auto& e : edges) {
      const std::string* v = e.a == u ? &e.b : (e.b == u ? &e.a : nullptr);
      if (v == nullptr || done.contains(*v)) continue;
      const double nd = d + e.cost;
      auto it = best.find(*v);
      if (it == best.end() || nd < it->second) {
        best[*v] = nd;
        open.push({nd, *v});
      }
    }
  }
  return std::nullopt;
}

std::string_view to_string(EpisodeKind k) {
  switch (k) {
    case EpisodeKind::MissionStart: return "MISSION_START";
    case EpisodeKind::WaypointReached: return "WAYPOINT_REACHED";
    case EpisodeKind::Replan: return "REPLAN";
    case EpisodeKind::ObstacleDetected: return "OBSTACLE_DETECTED";
    case EpisodeKind::NovelObject: return "NOVEL_OBJECT";
    case EpisodeKind::MissionComplete: return "MISSION_COMPLETE";
  }
  return "?";
}

void EpisodicLayer::append(EpisodeEvent event) {
  if (!events_.empty() && event.tick < events_.back().tick)
    throw std::invalid_argument(
        fmt::format("episode tick {} precedes last recorded tick {}", event.tick, events_.back().tick));
  events_.push_back(std::move(event));
}

void append_episode(SemanticEpisodicMap& map, EpisodeEvent event) { map.episodic.append(std::move(event)); }

MetricLayer build_metric_layer(const std::vector<ElementRecord>& spaces, const std::vector<ElementRecord>& obstacles,
                               double resolution, const Bounds& bounds) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  constexpr double eps = 1e-9;
  MetricLayer m;
  m.resolution = resolution;
  const double ox = std::floor(bounds.min_x / resolution + eps) * resolution;
  const double oy = std::floor(bounds.min_y / resolution + eps) * resolution;
  m.origin = {ox, oy};
  m.width = std::max(1, static_cast<int>(std::ceil((bounds.max_x - ox) / resolution - eps)));
  m.height = std::max(1, static_cast<int>(std::ceil((bounds.max_y - oy) / resolution - eps)));
  m.cells.assign(static_cast<std::size_t>(m.width) * m.height, Occupancy::Unknown);

  for (const auto& s : spaces) {
    if (!s.explicit_model.model2d) continue;
    for (const auto& c : rasterize_footprint(*s.explicit_model.model2d, resolution, m.origin))
      if (m.in_bounds(c)) m.cells[m.index(c)] = Occupancy::Free;
  }
  for (const auto& e : obstacles) {
    const auto& ex = e.explicit_model;
    if (!ex.model2d || !ex.physical.is_static) continue;
    for (const auto& c : rasterize_footprint(*ex.model2d, resolution, m.origin))
      if (m.in_bounds(c)) m.cells[m.index(c)] = Occupancy::Occupied;
  }
  return m;
}

TopologyLayer build_topology_layer(const std::vector<ElementRecord>& spaces, const std::vector<Relation>& relations,
                                   std::vector<std::string>* diagnostics) {
  TopologyLayer topo;
  for (const auto& s : spaces) {
    if (!s.explicit_model.model2d) {
      if (diagnostics) diagnostics->push_back(fmt::format("space '{}' has no footprint; skipped", s.symbol()));
      continue;
    }
    topo.nodes[s.symbol()] = centroid(*s.explicit_model.model2d);
  }
  for (const auto& r : relations) {
    if (r.predicate != Predicate::Adjacent && r.predicate != Predicate::Connected) continue;
    if (!topo.nodes.contains(r.subject) || !topo.nodes.contains(r.object)) {
      if (diagnostics)
        diagnostics->push_back(fmt::format("{}({},{}) does not join two known spaces; skipped", to_string(r.predicate),
                                           r.subject, r.object));
      continue;
    }
    if (r.subject == r.object || topo.has_edge(r.subject, r.object)) continue;
    const auto& [a, b] = std::minmax(r.subject, r.object);
    const double cost = distance(topo.nodes[a], topo.nodes[b]);
    if (!(cost > 0.0)) {
      if (diagnostics) diagnostics->push_back(fmt::format("spaces {} and {} share a centroid; edge skipped", a, b));
      continue;
    }
    topo.edges.push_back({a, b, cost});
  }
  std::sort(topo.edges.begin(), topo.edges.end(),
            [](const TopologyEdge& x, const TopologyEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  return topo;
}

SemanticEpisodicMap generate_map(const TierStore& store, const SensorSpec& sensors, const std::string& goal_symbol,
                                 double resolution) {
  sensors.validate();
  const auto entries = store.local_entries("env");
  std::vector<ElementRecord> spaces, others;
  std::set<std::string> space_symbols;
  bool goal_known = false;
  for (const auto& [key, entry] : entries) {
    const auto* rec = std::get_if<ElementRecord>(&entry.payload);
    if (rec == nullptr) continue;
    goal_known = goal_known || rec->symbol() == goal_symbol;
    if (rec->is_space()) {
      spaces.push_back(*rec);
      space_symbols.insert(rec->symbol());
    } else {
      others.push_back(*rec);
    }
  }
  if (!goal_known) throw MapGenerationError(fmt::format("goal symbol '{}' is not in local memory", goal_symbol));
  if (spaces.empty()) throw MapGenerationError("no spaces have been fetched");

  SemanticEpisodicMap map;
  map.sensor_spec = sensors;

  std::optional<Bounds> box;
  auto grow = [&](const Footprint& f) {
    if (f.vertices.size() < 3) return;
    const Bounds b = bounds_of(f);
    if (!box) {
      box = b;
      return;
    }
    box->min_x = std::min(box->min_x, b.min_x);
    box->min_y = std::min(box->min_y, b.min_y);
    box->max_x = std::max(box->max_x, b.max_x);
    box->max_y = std::max(box->max_y, b.max_y);
  };
  for (const auto& s : spaces)
    if (s.explicit_model.model2d) grow(*s.explicit_model.model2d);
  for (const auto& e : others)
    if (e.explicit_model.model2d) grow(*e.explicit_model.model2d);
  if (!box) throw MapGenerationError("fetched spaces carry no footprints");
  map.metric = build_metric_layer(spaces, others, resolution, *box);

  std::vector<Relation> relations;
  for (const auto* group : {&spaces, &others})
    for (const auto& rec : *group)
      for (const auto& r : rec.implicit) relations.push_back(r);
  map.topology = build_topology_layer(spaces, relations, &map.diagnostics);

  for (const auto& e : others) {
    SemanticAnnotation a;
    a.class_label = e.symbolic.class_label;
    const auto& ex = e.explicit_model;
    if (ex.model2d && ex.model2d->vertices.size() >= 3) {
      a.reference_point = centroid(*ex.model2d);
      if (sensors.lidar2d) {
        std::vector<GridCell> cells;
        for (const auto& c : rasterize_footprint(*ex.model2d, resolution, map.metric.origin))
          if (map.metric.in_bounds(c)) cells.push_back(c);
        a.footprint_cells = std::move(cells);
      }
    }
    if (ex.model3d && sensors.semantic3d) a.semantic_class = ex.model3d->semantic_class;
    for (const auto& r : e.implicit) {
      if (r.predicate == Predicate::Inside && space_symbols.contains(r.object)) {
        a.containing_space = r.object;
        break;
      }
    }
    if (!a.containing_space && a.reference_point) {
      for (const auto& s : spaces) {
        if (s.explicit_model.model2d && point_in_footprint(*a.reference_point, *s.explicit_model.model2d)) {
          a.containing_space = s.symbol();
          break;
        }
      }
    }
    map.semantic.annotations.emplace(e.symbol(), std::move(a));
  }
  return map;
}

}  // namespace semnav
