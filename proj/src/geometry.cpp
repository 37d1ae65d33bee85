#include "semnav/geometry.hpp"

#include <algorithm>

namespace semnav {

namespace {
constexpr double kBoundaryEps = 1e-9;
}

double normalize_angle(double radians) {
  double a = std::remainder(radians, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Pose2 make_pose(double x, double y, double heading) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(heading))
    throw std::invalid_argument("pose components must be finite");
  return {x, y, normalize_angle(heading)};
}

double signed_area(const Footprint& f) {
  const auto& v = f.vertices;
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * acc;
}

Point2 centroid(const Footprint& f) {
  const auto& v = f.vertices;
  if (v.empty()) return {};
  double a = 0.0, cx = 0.0, cy = 0.0;
  // shift to the first vertex to keep the products small
  const Point2 o = v.front();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 p = v[i] - o;
    const Point2 q = v[(i + 1) % v.size()] - o;
    const double c = cross(p, q);
    a += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a) < 1e-300) {
    Point2 mean;
    for (const auto& p : v) mean = mean + p;
    return (1.0 / static_cast<double>(v.size())) * mean;
  }
  return {o.x + cx / (3.0 * a), o.y + cy / (3.0 * a)};
}

bool is_simple(const Footprint& f) {
  const auto& v = f.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  // adjacent edges folding back onto each other
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = v[i], b = v[(i + 1) % n], c = v[(i + 2) % n];
    if (cross(b - a, c - b) == 0.0 && dot(b - a, c - b) < 0.0) return false;
    if (a == b) return false;
  }
  return true;
}

Bounds bounds_of(const Footprint& f) {
  Bounds b{f.vertices.front().x, f.vertices.front().y, f.vertices.front().x, f.vertices.front().y};
  for (const auto& p : f.vertices) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

Footprint axis_box(double min_x, double min_y, double max_x, double max_y) {
  return Footprint{{{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}}};
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

bool point_in_footprint(Point2 p, const Footprint& f) {
  const auto& v = f.vertices;
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = v[j], b = v[i];
    if (point_segment_distance(p, a, b) <= kBoundaryEps) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

namespace {
int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}
bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}
}  // namespace

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

std::optional<double> ray_segment_hit(Point2 origin, Point2 dir, Point2 a, Point2 b) {
  const Point2 e = b - a;
  const double denom = cross(dir, e);
  const Point2 w = a - origin;
  if (denom == 0.0) {
    // parallel: only a collinear overlap can be hit, at the nearer endpoint ahead
    if (cross(w, dir) != 0.0) return std::nullopt;
    const double dd = dot(dir, dir);
    const double ta = dot(a - origin, dir) / dd;
    const double tb = dot(b - origin, dir) / dd;
    const double lo = std::min(ta, tb), hi = std::max(ta, tb);
    if (hi <= 0.0) return std::nullopt;
    return lo > 0.0 ? lo : std::optional<double>{};
  }
  const double t = cross(w, e) / denom;
  const double s = cross(w, dir) / denom;
  if (t <= 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_circle_hit(Point2 origin, Point2 dir, Point2 center, double radius) {
  const Point2 m = origin - center;
  const double b = dot(m, dir);
  const double c = dot(m, m) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > 0.0) return t0;
  const double t1 = -b + sq;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

std::vector<GridCell> rasterize_footprint(const Footprint& f, double resolution, Point2 origin) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  std::vector<GridCell> cells;
  if (f.vertices.size() < 3) return cells;
  const Bounds b = bounds_of(f);
  const auto lo_x = static_cast<std::int32_t>(std::floor((b.min_x - origin.x) / resolution)) - 1;
  const auto hi_x = static_cast<std::int32_t>(std::ceil((b.max_x - origin.x) / resolution)) + 1;
  const auto lo_y = static_cast<std::int32_t>(std::floor((b.min_y - origin.y) / resolution)) - 1;
  const auto hi_y = static_cast<std::int32_t>(std::ceil((b.max_y - origin.y) / resolution)) + 1;
  for (std::int32_t iy = lo_y; iy <= hi_y; ++iy) {
    for (std::int32_t ix = lo_x; ix <= hi_x; ++ix) {
      const Point2 c{origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
      if (point_in_footprint(c, f)) cells.push_back({ix, iy});
    }
  }
  return cells;
}

}  // namespace semnav
