#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "semnav/navigation.hpp"

namespace semnav {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

constexpr std::array<std::pair<int, int>, 8> kMoves = {
    {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

double path_length(const std::vector<GridCell>& cells, double resolution) {
  double len = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const bool diag = cells[i].ix != cells[i - 1].ix && cells[i].iy != cells[i - 1].iy;
    len += diag ? resolution * kSqrt2 : resolution;
  }
  return len;
}

}  // namespace

CostUnits step_cost(double resolution, bool diagonal, std::uint8_t destination_cost) {
  const double step = diagonal ? resolution * kSqrt2 : resolution;
  return std::llround(step * kCostUnitsPerMeter * (100.0 + destination_cost) / 100.0);
}

CostUnits octile_heuristic(double resolution, GridCell a, GridCell b) {
  const auto dx = static_cast<CostUnits>(std::abs(a.ix - b.ix));
  const auto dy = static_cast<CostUnits>(std::abs(a.iy - b.iy));
  const auto lo = std::min(dx, dy), hi = std::max(dx, dy);
  return (hi - lo) * step_cost(resolution, false, 0) + lo * step_cost(resolution, true, 0);
}

std::vector<Point2> Path::points(const DrivingMap& dm) const {
  std::vector<Point2> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(dm.cell_center(c));
  return out;
}

bool move_allowed(const DrivingMap& dm, GridCell from, GridCell to) {
  const int dx = std::abs(to.ix - from.ix), dy = std::abs(to.iy - from.iy);
  if (dx > 1 || dy > 1 || dx + dy == 0 || !dm.passable(to)) return false;
  if (from.ix != to.ix && from.iy != to.iy)
    return dm.passable({to.ix, from.iy}) && dm.passable({from.ix, to.iy});
  return true;
}

std::optional<Path> plan_global(const DrivingMap& dm, GridCell start, GridCell goal) {
  if (!dm.in_bounds(start) || !dm.in_bounds(goal)) throw std::invalid_argument("plan endpoints outside the map");
  if (start == goal) return Path{{start}, 0.0, 0};
  if (!dm.passable(goal)) return std::nullopt;

  const double res = dm.resolution();
  const std::size_t n = dm.cell_count();
  constexpr CostUnits kInf = std::numeric_limits<CostUnits>::max();
  std::vector<CostUnits> g(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> closed(n, false);

  using Entry = std::tuple<CostUnits, CostUnits, std::size_t>;  // f, h, index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s = dm.index(start), t = dm.index(goal);
  g[s] = 0;
  open.push({octile_heuristic(res, start, goal), octile_heuristic(res, start, goal), s});

  while (!open.empty()) {
    const auto [f, h, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = true;
    if (u == t) break;
    const GridCell uc = dm.cell(u);
    for (const auto& [dx, dy] : kMoves) {
      const GridCell vc{uc.ix + dx, uc.iy + dy};
      if (!dm.in_bounds(vc) || !move_allowed(dm, uc, vc)) continue;
      const std::size_t v = dm.index(vc);
      if (closed[v]) continue;
      const CostUnits ng = g[u] + step_cost(res, dx != 0 && dy != 0, dm.cost(v));
      if (ng < g[v]) {
        g[v] = ng;
        parent[v] = u;
        const CostUnits hv = octile_heuristic(res, vc, goal);
        open.push({ng + hv, hv, v});
      }
    }
  }
  if (g[t] == kInf) return std::nullopt;

  Path path;
  for (std::size_t c = t; c != n; c = parent[c]) path.cells.push_back(dm.cell(c));
  std::reverse(path.cells.begin(), path.cells.end());
  path.cost_units = g[t];
  path.length_m = path_length(path.cells, res);
  return path;
}

// ---- D* Lite ----------------------------------------------------------------

ReplanState::ReplanState(const DrivingMap& dm, GridCell start, GridCell goal)
    : dm_(&dm), start_(start), goal_(goal), last_(start) {
  if (!dm.in_bounds(start) || !dm.in_bounds(goal)) throw std::invalid_argument("plan endpoints outside the map");
  const std::size_t n = dm.cell_count();
  g_.assign(n, kInf);
  rhs_.assign(n, kInf);
  queued_key_.assign(n, {kInf, kInf});
  in_queue_.assign(n, false);
  const std::size_t t = dm.index(goal);
  rhs_[t] = 0;
  queued_key_[t] = calculate_key(t);
  in_queue_[t] = true;
  queue_.insert({queued_key_[t], t});
}

CostUnits ReplanState::h(std::size_t a, std::size_t b) const {
  return octile_heuristic(dm_->resolution(), dm_->cell(a), dm_->cell(b));
}

ReplanState::Key ReplanState::calculate_key(std::size_t s) const {
  const CostUnits m = std::min(g_[s], rhs_[s]);
  if (m >= kInf) return {kInf, kInf};
  return {m + h(dm_->index(start_), s) + km_, m};
}

CostUnits ReplanState::edge(std::size_t from, std::size_t to) const {
  const GridCell a = dm_->cell(from), b = dm_->cell(to);
  if (!move_allowed(*dm_, a, b)) return kInf;
  return step_cost(dm_->resolution(), a.ix != b.ix && a.iy != b.iy, dm_->cost(to));
}

void ReplanState::update_vertex(std::size_t s) {
  if (s != dm_->index(goal_)) {
    CostUnits best = kInf;
    const GridCell sc = dm_->cell(s);
    for (const auto& [dx, dy] : kMoves) {
      const GridCell nc{sc.ix + dx, sc.iy + dy};
      if (!dm_->in_bounds(nc)) continue;
      const std::size_t sp = dm_->index(nc);
      if (g_[sp] >= kInf) continue;
      const CostUnits c = edge(s, sp);
      if (c >= kInf) continue;
      best = std::min(best, c + g_[sp]);
    }
    rhs_[s] = best;
  }
  if (in_queue_[s]) {
    queue_.erase({queued_key_[s], s});
    in_queue_[s] = false;
  }
  if (g_[s] != rhs_[s]) {
    queued_key_[s] = calculate_key(s);
    queue_.insert({queued_key_[s], s});
    in_queue_[s] = true;
  }
}

void ReplanState::compute_shortest_path() {
  const std::size_t s_start = dm_->index(start_);
  while (!queue_.empty() &&
         (queue_.begin()->first < calculate_key(s_start) || rhs_[s_start] != g_[s_start])) {
    const auto [k_old, u] = *queue_.begin();
    const Key k_new = calculate_key(u);
    ++expansions_;
    if (k_old < k_new) {
      queue_.erase(queue_.begin());
      queued_key_[u] = k_new;
      queue_.insert({k_new, u});
      continue;
    }
    queue_.erase(queue_.begin());
    in_queue_[u] = false;
    const GridCell uc = dm_->cell(u);
    if (g_[u] > rhs_[u]) {
      g_[u] = rhs_[u];
    } else {
      g_[u] = kInf;
      update_vertex(u);
    }
    for (const auto& [dx, dy] : kMoves) {
      const GridCell pc{uc.ix + dx, uc.iy + dy};
      if (dm_->in_bounds(pc)) update_vertex(dm_->index(pc));
    }
  }
}

void ReplanState::set_start(GridCell start) {
  if (!dm_->in_bounds(start)) throw std::invalid_argument("start outside the map");
  if (start == start_) return;
  km_ += octile_heuristic(dm_->resolution(), last_, start);
  last_ = start;
  start_ = start;
}

void ReplanState::notify(std::span<const GridCell> changed) {
  // a cost change alters edges into the cell and the diagonal edges that cut
  // its corner, all of which leave the cell itself or one of its neighbours
  std::vector<std::size_t> touched;
  for (const auto& c : changed) {
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const GridCell n{c.ix + dx, c.iy + dy};
        if (dm_->in_bounds(n)) touched.push_back(dm_->index(n));
      }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (auto s : touched) update_vertex(s);
}

std::optional<Path> ReplanState::replan() {
  compute_shortest_path();
  const std::size_t s = dm_->index(start_), t = dm_->index(goal_);
  if (s == t) return Path{{start_}, 0.0, 0};
  if (g_[s] >= kInf) return std::nullopt;

  Path path;
  path.cells.push_back(start_);
  std::size_t cur = s;
  const std::size_t limit = dm_->cell_count();
  while (cur != t) {
    const GridCell cc = dm_->cell(cur);
    CostUnits best = kInf, best_edge = kInf;
    std::size_t next = limit;
    for (const auto& [dx, dy] : kMoves) {
      const GridCell nc{cc.ix + dx, cc.iy + dy};
      if (!dm_->in_bounds(nc)) continue;
      const std::size_t sp = dm_->index(nc);
      if (g_[sp] >= kInf) continue;
      const CostUnits c = edge(cur, sp);
      if (c >= kInf) continue;
      const CostUnits total = c + g_[sp];
      if (total < best || (total == best && sp < next)) {
        best = total;
        best_edge = c;
        next = sp;
      }
    }
    if (next == limit || path.cells.size() > limit) return std::nullopt;
    path.cost_units += best_edge;
    cur = next;
    path.cells.push_back(dm_->cell(cur));
  }
  path.length_m = path_length(path.cells, dm_->resolution());
  return path;
}

std::optional<Path> replan_incremental(ReplanState& rs, std::span<const GridCell> changed) {
  rs.notify(changed);
  return rs.replan();
}

}  // namespace semnav
