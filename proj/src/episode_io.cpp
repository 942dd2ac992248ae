#include "guidance/episode_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "guidance/errors.hpp"
#include "json.hpp"

namespace guidance {

using nlohmann::json;

const std::vector<std::string> kEpisodeColumns = {
    "step",           "time",          "x",          "y",
    "theta",          "v",             "a",          "omega",
    "selected_beta",  "mpcc_status",   "mpcc_iterations", "braking",
    "guidance_fallback", "num_candidates", "candidate_costs", "obstacles",
    "spline"};

namespace {

std::string num(double value) { return fmt::format("{:.17g}", value); }

std::vector<std::string> split(const std::string& text, char separator) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, separator)) parts.push_back(current);
  if (!text.empty() && text.back() == separator) parts.emplace_back();
  return parts;
}

double to_double(const std::string& text) {
  std::size_t used = 0;
  const double value = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument(text);
  return value;
}

json spline_json(const GuidanceSpline& s) {
  json out;
  out["beta"] = s.trajectory_id;
  out["segment_ids"] = s.segment_ids;
  out["knots"] = s.x.knots();
  json xs = json::array(), ys = json::array();
  for (const auto& p : s.x.pieces()) xs.push_back({p[0], p[1], p[2], p[3]});
  for (const auto& p : s.y.pieces()) ys.push_back({p[0], p[1], p[2], p[3]});
  out["x"] = xs;
  out["y"] = ys;
  return out;
}

GuidanceSpline spline_from_json(const json& j) {
  GuidanceSpline s;
  s.trajectory_id = j.at("beta").get<int>();
  s.segment_ids = j.at("segment_ids").get<std::vector<int>>();
  const auto knots = j.at("knots").get<std::vector<double>>();
  auto pieces = [](const json& rows) {
    std::vector<CubicSpline<double>::Coefficients> out;
    for (const auto& r : rows) out.emplace_back(r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>());
    return out;
  };
  s.x = CubicSpline<double>(knots, pieces(j.at("x")));
  s.y = CubicSpline<double>(knots, pieces(j.at("y")));
  return s;
}

const char* kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kStart:
      return "start";
    case NodeKind::kGoal:
      return "goal";
    case NodeKind::kInterior:
      return "interior";
  }
  return "interior";
}

NodeKind kind_from_name(const std::string& name) {
  if (name == "start") return NodeKind::kStart;
  if (name == "goal") return NodeKind::kGoal;
  return NodeKind::kInterior;
}

}  // namespace

std::string spline_to_text(const GuidanceSpline& spline) {
  // beta|segment ids|knots|x pieces|y pieces, space-separated within a field.
  std::string out = fmt::format("{}|", spline.trajectory_id);
  for (std::size_t i = 0; i < spline.segment_ids.size(); ++i) {
    out += (i ? " " : "") + std::to_string(spline.segment_ids[i]);
  }
  out += "|";
  const auto& knots = spline.x.knots();
  for (std::size_t i = 0; i < knots.size(); ++i) out += (i ? " " : "") + num(knots[i]);
  for (const auto* axis : {&spline.x, &spline.y}) {
    out += "|";
    bool first = true;
    for (const auto& p : axis->pieces()) {
      for (int c = 0; c < 4; ++c) {
        out += (first ? "" : " ") + num(p[c]);
        first = false;
      }
    }
  }
  return out;
}

GuidanceSpline spline_from_text(const std::string& text) {
  const auto fields = split(text, '|');
  if (fields.size() != 5) throw ConfigError("malformed spline field");
  auto numbers = [](const std::string& field) {
    std::vector<double> values;
    for (const auto& token : split(field, ' ')) {
      if (!token.empty()) values.push_back(to_double(token));
    }
    return values;
  };
  GuidanceSpline s;
  s.trajectory_id = std::stoi(fields[0]);
  for (double id : numbers(fields[1])) s.segment_ids.push_back(static_cast<int>(id));
  const auto knots = numbers(fields[2]);
  auto pieces = [&](const std::vector<double>& values) {
    if (values.size() != 4 * (knots.size() - 1)) throw ConfigError("malformed spline coefficients");
    std::vector<CubicSpline<double>::Coefficients> out;
    for (std::size_t i = 0; i + 3 < values.size(); i += 4) {
      out.emplace_back(values[i], values[i + 1], values[i + 2], values[i + 3]);
    }
    return out;
  };
  if (knots.size() < 2) throw ConfigError("malformed spline knots");
  s.x = CubicSpline<double>(knots, pieces(numbers(fields[3])));
  s.y = CubicSpline<double>(knots, pieces(numbers(fields[4])));
  return s;
}

void write_episode_csv(std::ostream& out, const EpisodeLog& log) {
  for (std::size_t i = 0; i < kEpisodeColumns.size(); ++i) out << (i ? "," : "") << kEpisodeColumns[i];
  out << '\n';
  for (const auto& r : log.steps) {
    std::string costs;
    for (std::size_t i = 0; i < r.candidate_costs.size(); ++i) {
      costs += fmt::format("{}{}:{}", i ? ";" : "", r.candidate_costs[i].first, num(r.candidate_costs[i].second));
    }
    std::string obstacles;
    for (std::size_t i = 0; i < r.obstacles.size(); ++i) {
      const auto& o = r.obstacles[i];
      obstacles += fmt::format("{}{}:{}:{}:{}:{}:{}", i ? ";" : "", o.id, num(o.center.x()), num(o.center.y()),
                               num(o.velocity.x()), num(o.velocity.y()), num(o.radius));
    }
    out << r.step << ',' << num(r.time) << ',' << num(r.state.x) << ',' << num(r.state.y) << ','
        << num(r.state.theta) << ',' << num(r.state.v) << ',' << num(r.input.a) << ',' << num(r.input.omega) << ','
        << (r.selected_id ? std::to_string(*r.selected_id) : "") << ',' << to_string(r.mpcc_status) << ','
        << r.mpcc_iterations << ',' << (r.braking ? 1 : 0) << ',' << (r.guidance_fallback ? 1 : 0) << ','
        << r.candidate_costs.size() << ',' << costs << ',' << obstacles << ','
        << (r.spline ? spline_to_text(*r.spline) : "") << '\n';
  }
}

void write_timing_csv(std::ostream& out, const EpisodeLog& log) {
  out << "step,high_level_ms,mpcc_ms,total_ms\n";
  for (const auto& r : log.steps) {
    out << r.step << ',' << num(r.high_level_ms) << ',' << num(r.mpcc_ms) << ',' << num(r.total_ms) << '\n';
  }
}

void write_guidance_jsonl(std::ostream& out, const EpisodeLog& log) {
  for (const auto& snap : log.snapshots) {
    json line;
    line["step"] = snap.step;
    line["selected"] = snap.selected_id;
    json guards = json::array();
    for (const auto& g : snap.graph.guards) {
      guards.push_back({{"id", g.id}, {"kind", kind_name(g.kind)}, {"x", g.state.x}, {"y", g.state.y}, {"t", g.state.t}});
    }
    json connectors = json::array();
    for (const auto& c : snap.graph.connectors) {
      connectors.push_back({{"id", c.id},
                            {"x", c.state.x},
                            {"y", c.state.y},
                            {"t", c.state.t},
                            {"guards", {c.guards[0], c.guards[1]}},
                            {"segment_id", c.segment_id}});
    }
    json candidates = json::array();
    for (const auto& s : snap.candidates) candidates.push_back(spline_json(s));
    line["guards"] = guards;
    line["connectors"] = connectors;
    line["candidates"] = candidates;
    out << line.dump() << '\n';
  }
}

std::vector<LoggedStep> read_episode_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty episode log");
  const auto header = split(line, ',');
  if (header != kEpisodeColumns) throw ConfigError("unexpected episode log header");
  std::vector<LoggedStep> steps;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != kEpisodeColumns.size()) throw ConfigError(fmt::format("row {}: wrong field count", row));
    try {
      LoggedStep s;
      s.step = std::stoi(f[0]);
      s.time = to_double(f[1]);
      s.state = {to_double(f[2]), to_double(f[3]), to_double(f[4]), to_double(f[5])};
      if (!f[8].empty()) s.selected_id = std::stoi(f[8]);
      if (!f[15].empty()) {
        for (const auto& item : split(f[15], ';')) {
          const auto v = split(item, ':');
          if (v.size() != 6) throw ConfigError("malformed obstacle");
          Obstacle o;
          o.id = std::stoi(v[0]);
          o.center = {to_double(v[1]), to_double(v[2])};
          o.velocity = {to_double(v[3]), to_double(v[4])};
          o.radius = to_double(v[5]);
          s.obstacles.push_back(o);
        }
      }
      if (!f[16].empty()) s.spline = spline_from_text(f[16]);
      steps.push_back(std::move(s));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("row {}: {}", row, e.what()));
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("row {}: malformed value ({})", row, e.what()));
    }
  }
  if (steps.empty()) throw ConfigError("episode log has no rows");
  return steps;
}

std::optional<LoggedGuidance> read_guidance_step(std::istream& in, int step) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (j.at("step").get<int>() != step) continue;
      LoggedGuidance g;
      g.step = step;
      g.selected_id = j.at("selected").get<int>();
      for (const auto& n : j.at("guards")) {
        g.guards.push_back({n.at("id").get<int>(),
                            {n.at("x").get<double>(), n.at("y").get<double>(), n.at("t").get<double>()},
                            kind_from_name(n.at("kind").get<std::string>())});
      }
      for (const auto& n : j.at("connectors")) {
        ConnectorNode c;
        c.id = n.at("id").get<int>();
        c.state = {n.at("x").get<double>(), n.at("y").get<double>(), n.at("t").get<double>()};
        c.guards = {n.at("guards").at(0).get<int>(), n.at("guards").at(1).get<int>()};
        c.segment_id = n.at("segment_id").get<int>();
        g.connectors.push_back(c);
      }
      for (const auto& s : j.at("candidates")) g.candidates.push_back(spline_from_json(s));
      return g;
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("malformed guidance dump: {}", e.what()));
    }
  }
  return std::nullopt;
}

void write_metrics_csv(std::ostream& out, const BatchResult& batch) {
  out << "planner,seed,task_duration,collision_flag,collision_count,timeout_flag,steps\n";
  for (const auto& e : batch.episodes) {
    const auto& m = e.metrics;
    out << to_string(e.planner) << ',' << e.seed << ',' << num(m.task_duration) << ',' << (m.collision_flag ? 1 : 0)
        << ',' << m.collision_count << ',' << (m.timeout_flag ? 1 : 0) << ',' << m.steps << '\n';
  }
}

void write_metrics_json(std::ostream& out, const BatchResult& batch) {
  json root;
  json episodes = json::array();
  for (const auto& e : batch.episodes) {
    episodes.push_back({{"planner", to_string(e.planner)},
                        {"seed", e.seed},
                        {"task_duration", e.metrics.task_duration},
                        {"collision_flag", e.metrics.collision_flag},
                        {"collision_count", e.metrics.collision_count},
                        {"timeout_flag", e.metrics.timeout_flag},
                        {"steps", e.metrics.steps}});
  }
  json summaries = json::array();
  for (const auto& s : batch.summaries) {
    summaries.push_back({{"planner", to_string(s.planner)},
                         {"episodes", s.episodes},
                         {"mean_duration", s.mean_duration},
                         {"std_duration", s.std_duration},
                         {"collision_episodes", s.collision_episodes},
                         {"timeouts", s.timeouts}});
  }
  root["episodes"] = episodes;
  root["summary"] = summaries;
  out << root.dump(2) << '\n';
}

void write_timing_summary_csv(std::ostream& out, const BatchResult& batch) {
  out << "planner,seed,mean_compute_ms,std_compute_ms,mean_high_level_ms,std_high_level_ms\n";
  for (const auto& e : batch.episodes) {
    const auto& m = e.metrics;
    out << to_string(e.planner) << ',' << e.seed << ',' << num(m.mean_compute_ms) << ',' << num(m.std_compute_ms)
        << ',' << num(m.mean_high_level_ms) << ',' << num(m.std_high_level_ms) << '\n';
  }
  for (const auto& s : batch.summaries) {
    out << to_string(s.planner) << ",all," << num(s.mean_compute_ms) << ',' << num(s.std_compute_ms) << ','
        << num(s.mean_high_level_ms) << ',' << num(s.std_high_level_ms) << '\n';
  }
}

void write_manifest(std::ostream& out, const RunManifest& manifest) {
  json planners = json::array();
  for (auto p : manifest.planners) planners.push_back(to_string(p));
  json root{{"config", manifest.config_path},
            {"seeds", manifest.seeds},
            {"planners", planners},
            {"output_directory", manifest.output_directory},
            {"version", manifest.version}};
  out << root.dump(2) << '\n';
}

std::string episode_stem(PlannerKind planner, std::uint64_t seed) {
  return fmt::format("{}_seed{}", to_string(planner), seed);
}

void write_run(const std::filesystem::path& directory, const BatchResult& batch, const RunManifest& manifest,
               bool write_guidance) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory / "episodes", ec);
  if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", directory.string(), ec.message()));
  auto open = [](const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    return out;
  };
  {
    auto out = open(directory / "metrics.csv");
    write_metrics_csv(out, batch);
  }
  {
    auto out = open(directory / "metrics.json");
    write_metrics_json(out, batch);
  }
  {
    auto out = open(directory / "timing.csv");
    write_timing_summary_csv(out, batch);
  }
  {
    auto out = open(directory / "manifest.json");
    write_manifest(out, manifest);
  }
  for (const auto& e : batch.episodes) {
    const std::string stem = episode_stem(e.planner, e.seed);
    {
      auto out = open(directory / "episodes" / (stem + ".csv"));
      write_episode_csv(out, e.log);
    }
    {
      auto out = open(directory / "episodes" / (stem + "_timing.csv"));
      write_timing_csv(out, e.log);
    }
    if (write_guidance && !e.log.snapshots.empty()) {
      auto out = open(directory / "episodes" / (stem + "_guidance.jsonl"));
      write_guidance_jsonl(out, e.log);
    }
  }
}

}  // namespace guidance
