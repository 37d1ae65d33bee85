#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semnav/geometry.hpp"

namespace semnav {

struct LidarScan {
  Pose2 pose;
  std::uint64_t tick = 0;
  double angle_min = 0.0;        // relative to pose.heading
  double angle_increment = 0.0;
  double range_max = 0.0;
  std::vector<double> ranges;    // range_max means no return

  double beam_angle(std::size_t i) const { return pose.heading + angle_min + angle_increment * static_cast<double>(i); }
};

struct Detection {
  std::optional<std::string> symbol;
  std::string semantic_class;
  Point2 position;
  std::uint64_t tick = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct SemanticFrame {
  std::uint64_t tick = 0;
  Pose2 pose;
  std::vector<Detection> detections;
};

}  // namespace semnav
