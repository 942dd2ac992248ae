#include "guidance/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/core.h>

namespace guidance {
namespace {

constexpr double kScale = 40.0;  // pixels per metre
constexpr double kMargin = 20.0;

struct Bounds {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
};

class Canvas {
 public:
  explicit Canvas(const Bounds& b) : b_(b) {}

  double px(double x) const { return kMargin + (x - b_.x_min) * kScale; }
  double py(double y) const { return kMargin + (b_.y_max - y) * kScale; }

  std::string polyline(const std::vector<std::pair<double, double>>& points, const std::string& cls,
                       const std::string& stroke, double width) const {
    std::string pts;
    for (const auto& [x, y] : points) pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    if (!pts.empty()) pts.pop_back();
    return fmt::format(R"(<polyline class="{}" points="{}" fill="none" stroke="{}" stroke-width="{}"/>)", cls, pts,
                       stroke, width) +
           "\n";
  }

  std::string circle(double x, double y, double r, const std::string& cls, const std::string& fill) const {
    return fmt::format(R"(<circle class="{}" cx="{:.2f}" cy="{:.2f}" r="{:.2f}" fill="{}"/>)", cls, px(x), py(y),
                       r, fill) +
           "\n";
  }

  std::string open() const {
    const double w = (b_.x_max - b_.x_min) * kScale + 2 * kMargin;
    const double h = (b_.y_max - b_.y_min) * kScale + 2 * kMargin;
    return fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}">)",
                       w, h, w, h) +
           "\n" + fmt::format(R"(<rect width="{:.0f}" height="{:.0f}" fill="white"/>)", w, h) + "\n";
  }

 private:
  Bounds b_;
};

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

}  // namespace

std::string render_top_view(const std::vector<LoggedStep>& steps, const RoadGeometry& road) {
  Bounds b;
  b.add(road.x_start, road.reference_y - road.width / 2);
  b.add(road.x_end, road.reference_y + road.width / 2);
  std::vector<std::pair<double, double>> robot;
  std::map<int, std::vector<std::pair<double, double>>> pedestrians;
  for (const auto& s : steps) {
    robot.emplace_back(s.state.x, s.state.y);
    b.add(s.state.x, s.state.y);
    for (const auto& o : s.obstacles) {
      pedestrians[o.id].emplace_back(o.center.x(), o.center.y());
      b.add(o.center.x(), o.center.y());
    }
  }
  const Canvas c(b);
  std::string svg = c.open();
  svg += fmt::format(R"(<rect class="road" x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="#eeeeee"/>)",
                     c.px(road.x_start), c.py(road.reference_y + road.width / 2), (road.x_end - road.x_start) * kScale,
                     road.width * kScale) +
         "\n";
  svg += c.polyline({{road.x_start, road.reference_y}, {road.x_end, road.reference_y}}, "reference", "#999999", 1);
  for (const auto& [id, points] : pedestrians) svg += c.polyline(points, "pedestrian", "#d62728", 1.5);
  svg += c.polyline(robot, "robot", "#1f3b99", 2.5);
  svg += "</svg>\n";
  return svg;
}

std::string render_state_space(const LoggedStep& step, const std::optional<LoggedGuidance>& guidance,
                               double time_scale, double horizon) {
  // Time axis drawn obliquely: screen = (x + 0.5 tau, y + 0.8 tau), tau = t * time_scale.
  auto project = [time_scale](double x, double y, double t) {
    const double tau = t * time_scale;
    return std::pair<double, double>{x + 0.5 * tau, y + 0.8 * tau};
  };
  std::vector<GuidanceSpline> candidates;
  int selected = step.selected_id.value_or(0);
  if (guidance) {
    candidates = guidance->candidates;
    selected = guidance->selected_id;
  } else if (step.spline) {
    candidates.push_back(*step.spline);
  }

  std::vector<std::vector<std::pair<double, double>>> tubes;
  for (const auto& o : step.obstacles) {
    std::vector<std::pair<double, double>> tube;
    for (double t = 0.0; t <= horizon + 1e-9; t += 0.25) {
      const Vec2 p = o.center + o.velocity * t;
      tube.push_back(project(p.x(), p.y(), t));
    }
    tubes.push_back(std::move(tube));
  }
  std::vector<std::pair<std::vector<std::pair<double, double>>, bool>> curves;
  for (const auto& s : candidates) {
    std::vector<std::pair<double, double>> curve;
    const double t0 = std::max(0.0, s.x.front());
    const double t1 = s.x.back();
    const int n = 60;
    for (int i = 0; i <= n; ++i) {
      const double t = t0 + (t1 - t0) * i / n;
      const Vec2 p(s.x(t), s.y(t));
      curve.push_back(project(p.x(), p.y(), t - t0));
    }
    curves.emplace_back(std::move(curve), s.trajectory_id == selected);
  }

  Bounds b;
  b.add(step.state.x - 1, step.state.y - 1);
  for (const auto& tube : tubes) for (const auto& [x, y] : tube) b.add(x, y);
  for (const auto& [curve, sel] : curves) for (const auto& [x, y] : curve) b.add(x, y);
  if (guidance) {
    for (const auto& g : guidance->guards) {
      const auto [x, y] = project(g.state.x, g.state.y, g.state.t);
      b.add(x, y);
    }
  }
  b.x_min -= 1;
  b.x_max += 1;
  b.y_min -= 1;
  b.y_max += 1;

  const Canvas c(b);
  std::string svg = c.open();
  for (const auto& tube : tubes) svg += c.polyline(tube, "obstacle", "#d62728", 6);
  if (guidance) {
    std::map<int, StateSpacePoint> guards;
    for (const auto& g : guidance->guards) guards[g.id] = g.state;
    for (const auto& cn : guidance->connectors) {
      std::vector<std::pair<double, double>> edge;
      for (const auto& p : {guards[cn.guards[0]], cn.state, guards[cn.guards[1]]}) edge.push_back(project(p.x, p.y, p.t));
      svg += c.polyline(edge, "edge", "#bbbbbb", 0.8);
      const auto [x, y] = project(cn.state.x, cn.state.y, cn.state.t);
      svg += c.circle(x, y, 2.5, "connector", "#555555");
    }
    for (const auto& g : guidance->guards) {
      const auto [x, y] = project(g.state.x, g.state.y, g.state.t);
      svg += c.circle(x, y, 4, "guard", "#000000");
    }
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& [curve, sel] = curves[i];
    svg += c.polyline(curve, sel ? "candidate selected" : "candidate", sel ? "#08306b" : kPalette[i % 8], sel ? 4.0 : 1.5);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace guidance
