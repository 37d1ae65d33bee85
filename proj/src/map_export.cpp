#include <fmt/format.h>

#include "semnav/map_generator.hpp"

namespace semnav {

namespace {
std::string fixed(double v) { return fmt::format("{:.9f}", v); }
}  // namespace

std::string metric_to_pgm(const MetricLayer& metric) {
  std::string out = fmt::format("P5\n{} {}\n255\n", metric.width, metric.height);
  out.reserve(out.size() + metric.cells.size());
  // first image row is the top of the map (largest y)
  for (int iy = metric.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < metric.width; ++ix) {
      switch (metric.at({ix, iy})) {
        case Occupancy::Free: out.push_back(static_cast<char>(255)); break;
        case Occupancy::Occupied: out.push_back(static_cast<char>(0)); break;
        case Occupancy::Unknown: out.push_back(static_cast<char>(128)); break;
      }
    }
  }
  return out;
}

std::string metric_sidecar(const MetricLayer& metric) {
  return fmt::format("resolution: {}\norigin: {} {}\nwidth: {}\nheight: {}\nrow_order: top_down\n",
                     fixed(metric.resolution), fixed(metric.origin.x), fixed(metric.origin.y), metric.width,
                     metric.height);
}

std::string episodes_document(const EpisodicLayer& episodic) {
  std::string out;
  for (const auto& e : episodic.events())
    out += fmt::format("event tick={} kind={} x={} y={} theta={} subject={}\n", e.tick, to_string(e.kind),
                       fixed(e.pose.x), fixed(e.pose.y), fixed(e.pose.heading), e.subject.value_or("-"));
  return out;
}

std::string layers_document(const SemanticEpisodicMap& map) {
  std::string out = "[topology]\n";
  for (const auto& [sym, c] : map.topology.nodes) out += fmt::format("node {} x={} y={}\n", sym, fixed(c.x), fixed(c.y));
  for (const auto& e : map.topology.edges) out += fmt::format("edge {} {} cost={}\n", e.a, e.b, fixed(e.cost));

  out += "[semantic]\n";
  for (const auto& [sym, a] : map.semantic.annotations) {
    out += fmt::format("annotation {} class={}", sym, a.class_label);
    if (a.containing_space) out += fmt::format(" space={}", *a.containing_space);
    if (a.semantic_class) out += fmt::format(" semantic_class={}", *a.semantic_class);
    if (a.footprint_cells) out += fmt::format(" cells={}", a.footprint_cells->size());
    out += '\n';
  }

  out += "[episodic]\n";
  out += episodes_document(map.episodic);
  return out;
}

MapTile metric_to_tile(const MetricLayer& metric, const std::string& id) {
  MapTile tile{id, metric.resolution, metric.origin, metric.width, metric.height, {}};
  tile.cells.reserve(metric.cells.size());
  for (auto c : metric.cells)
    tile.cells.push_back(c == Occupancy::Free ? 'F' : (c == Occupancy::Occupied ? 'O' : 'U'));
  return tile;
}

}  // namespace semnav
