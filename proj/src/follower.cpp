#include <algorithm>
#include <cmath>

#include "semnav/navigation.hpp"

namespace semnav {

namespace {

// Index of the path point the robot should steer at: walk forward from the
// closest point while points stay within the lookahead circle.
std::size_t lookahead_index(Point2 robot, std::span<const Point2> path, double lookahead) {
  std::size_t closest = 0;
  double best = distance(robot, path[0]);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double d = distance(robot, path[i]);
    if (d < best) {
      best = d;
      closest = i;
    }
  }
  std::size_t target = closest;
  while (target + 1 < path.size() && distance(robot, path[target + 1]) <= lookahead) ++target;
  return target;
}

}  // namespace

FollowResult follow_step(const RobotState& state, std::span<const Point2> path, double dt,
                         const FollowerConfig& config) {
  FollowResult out;
  out.new_state = state;
  out.new_state.v = 0.0;
  out.new_state.omega = 0.0;
  if (path.empty()) return out;

  const Point2 pos = state.pose.position();
  const double to_goal = distance(pos, path.back());
  if (to_goal <= config.goal_tolerance) {
    out.reached = true;
    return out;
  }

  const Point2 target = path[lookahead_index(pos, path, config.lookahead)];
  const Point2 d = target - pos;
  const double error = normalize_angle(std::atan2(d.y, d.x) - state.pose.heading);
  out.omega = std::clamp(config.heading_gain * error, -config.omega_max, config.omega_max);
  if (std::abs(error) <= config.rotate_threshold)
    out.v = std::min(config.v_max, config.approach_gain * to_goal) * std::cos(error);

  const double th = state.pose.heading;
  out.new_state.pose = Pose2{pos.x + out.v * std::cos(th) * dt, pos.y + out.v * std::sin(th) * dt,
                             normalize_angle(th + out.omega * dt)};
  out.new_state.v = out.v;
  out.new_state.omega = out.omega;
  return out;
}

}  // namespace semnav
