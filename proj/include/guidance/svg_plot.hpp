#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guidance/episode_io.hpp"

namespace guidance {

struct RoadGeometry {
  double x_start = 0.0;
  double x_end = 24.0;
  double width = 6.0;
  double reference_y = 0.0;
};

/// Top view: road, one robot polyline (class "robot") and one polyline per
/// pedestrian (class "pedestrian").
std::string render_top_view(const std::vector<LoggedStep>& steps, const RoadGeometry& road);

/// Oblique projection of (x, y, t): obstacle tubes at the given step, the
/// roadmap when available, and the candidate splines (class "candidate"),
/// the selected one drawn thicker (class "candidate selected").
std::string render_state_space(const LoggedStep& step, const std::optional<LoggedGuidance>& guidance,
                               double time_scale, double horizon);

}  // namespace guidance
