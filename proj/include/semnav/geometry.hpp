#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace semnav {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Point2 position() const { return {x, y}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

Pose2 make_pose(double x, double y, double heading);

/// Closed polygon, counter-clockwise, at least three vertices. Construction does
/// not enforce the invariants; validate_footprint reports violations so a world
/// loader can surface them as diagnostics instead of aborting.
struct Footprint {
  std::vector<Point2> vertices;

  friend bool operator==(const Footprint&, const Footprint&) = default;
};

double signed_area(const Footprint& f);
Point2 centroid(const Footprint& f);
bool is_simple(const Footprint& f);

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};
Bounds bounds_of(const Footprint& f);

Footprint axis_box(double min_x, double min_y, double max_x, double max_y);

/// Even-odd containment; points within 1e-9 m of an edge count as inside.
bool point_in_footprint(Point2 p, const Footprint& f);

double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// Closed-segment intersection test, collinear overlaps included.
bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2);

/// Smallest t > 0 such that origin + t*dir lies on segment [a, b].
std::optional<double> ray_segment_hit(Point2 origin, Point2 dir, Point2 a, Point2 b);

/// Smallest t > 0 such that origin + t*dir lies on the circle; dir must be unit length.
std::optional<double> ray_circle_hit(Point2 origin, Point2 dir, Point2 center, double radius);

struct GridCell {
  std::int32_t ix = 0;
  std::int32_t iy = 0;

  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

/// Cells (relative to origin, may be negative) whose centers lie in the footprint.
std::vector<GridCell> rasterize_footprint(const Footprint& f, double resolution, Point2 origin);

}  // namespace semnav
