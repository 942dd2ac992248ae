#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "guidance/episode_io.hpp"
#include "guidance/errors.hpp"
#include "guidance/logging.hpp"
#include "guidance/scenario.hpp"
#include "guidance/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace guidance;

namespace {

constexpr const char* kVersion = "1.0.0";

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "N" means seeds 1..N; a comma-separated list names the seeds explicitly.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    if (text.find(',') == std::string::npos) {
      const long count = std::stol(text);
      if (count < 1) throw ConfigError("--seeds must be at least 1");
      for (long i = 1; i <= count; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
    } else {
      for (const auto& item : split_list(text)) seeds.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError(fmt::format("bad --seeds value '{}'", text));
  }
  if (seeds.empty()) throw ConfigError("--seeds names no seeds");
  return seeds;
}

LogLevel parse_level(const std::string& name) {
  if (name == "debug") return LogLevel::kDebug;
  if (name == "info") return LogLevel::kInfo;
  if (name == "warning") return LogLevel::kWarning;
  if (name == "error") return LogLevel::kError;
  if (name == "off") return LogLevel::kOff;
  throw ConfigError(fmt::format("unknown log level '{}'", name));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
}

struct RunOptions {
  std::string scenario;
  std::string seeds = "1";
  std::string planners = "guided,baseline";
  std::string out;
  int jobs = 1;
  bool dump_guidance = false;
};

int cmd_run(const RunOptions& o) {
  const ScenarioConfig config = load_scenario(o.scenario);
  const auto seeds = parse_seeds(o.seeds);
  std::vector<PlannerKind> planners;
  for (const auto& name : split_list(o.planners)) planners.push_back(parse_planner(name));
  if (planners.empty()) throw ConfigError("--planner names no planner");
  std::string out = o.out;
  if (out.empty()) {
    const char* env = std::getenv("GUIDANCE_PLANNER_OUT");
    out = env != nullptr && *env != '\0' ? env : "out";
  }
  if (o.jobs < 1) throw ConfigError("--jobs must be at least 1");

  const BatchResult batch = run_batch(config, seeds, planners, o.jobs, true, o.dump_guidance);
  RunManifest manifest{o.scenario, seeds, planners, out, kVersion};
  write_run(out, batch, manifest, o.dump_guidance);

  fmt::print("{:<10} {:>8} {:>18} {:>11} {:>9} {:>20} {:>20}\n", "planner", "episodes", "duration s",
             "collisions", "timeouts", "compute ms", "high-level ms");
  for (const auto& s : batch.summaries) {
    fmt::print("{:<10} {:>8} {:>18} {:>11} {:>9} {:>20} {:>20}\n", to_string(s.planner), s.episodes,
               fmt::format("{:.2f} ({:.2f})", s.mean_duration, s.std_duration), s.collision_episodes, s.timeouts,
               fmt::format("{:.2f} ({:.2f})", s.mean_compute_ms, s.std_compute_ms),
               fmt::format("{:.2f} ({:.2f})", s.mean_high_level_ms, s.std_high_level_ms));
  }
  fmt::print("results written to {}\n", out);
  return 0;
}

struct PlotOptions {
  std::string log;
  std::string guidance;
  std::string scenario;
  std::string out;
  int step = -1;
};

int cmd_plot(const PlotOptions& o) {
  std::ifstream in(o.log);
  if (!in) throw ConfigError(fmt::format("cannot read log '{}'", o.log));
  const auto steps = read_episode_csv(in);

  RoadGeometry road;
  double time_scale = 2.0;
  double horizon = 6.0;
  if (!o.scenario.empty()) {
    const ScenarioConfig config = load_scenario(o.scenario);
    road = {config.x_start, config.x_end, config.width, config.reference_y};
    time_scale = config.reference_speed;
    horizon = config.guidance.horizon();
  }
  const fs::path out = o.out.empty() ? fs::path(o.log).parent_path() : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  const std::string stem = fs::path(o.log).stem().string();
  write_file(out / (stem + "_top.svg"), render_top_view(steps, road));
  fmt::print("wrote {}\n", (out / (stem + "_top.svg")).string());

  if (o.step >= 0) {
    const auto it = std::find_if(steps.begin(), steps.end(), [&](const LoggedStep& s) { return s.step == o.step; });
    if (it == steps.end()) throw ConfigError(fmt::format("step {} is not in the log", o.step));
    std::optional<LoggedGuidance> guidance;
    if (!o.guidance.empty()) {
      std::ifstream g(o.guidance);
      if (!g) throw ConfigError(fmt::format("cannot read guidance dump '{}'", o.guidance));
      guidance = read_guidance_step(g, o.step);
    }
    const fs::path path = out / fmt::format("{}_state_space_{}.svg", stem, o.step);
    write_file(path, render_state_space(*it, guidance, time_scale, horizon));
    fmt::print("wrote {}\n", path.string());
  }
  return 0;
}

int cmd_validate(const std::string& scenario) {
  const ScenarioConfig config = load_scenario(scenario);
  fmt::print("{}: ok ({} listed pedestrians, {} random)\n", config.name, config.pedestrians.size(),
             config.random.count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guidance planner: topology-aware guidance with a local MPCC tracker"};
  app.require_subcommand(1);
  std::string level = "warning";
  app.add_option("--log-level", level, "debug, info, warning, error or off");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario for a set of seeds and planners");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--seeds", run.seeds, "Seed count N (seeds 1..N) or comma-separated list");
  run_cmd->add_option("--planner", run.planners, "Comma-separated planners: guided, baseline");
  run_cmd->add_option("--out", run.out, "Output directory (default: $GUIDANCE_PLANNER_OUT or ./out)");
  run_cmd->add_option("--jobs", run.jobs, "Episodes run in parallel");
  run_cmd->add_flag("--dump-guidance", run.dump_guidance, "Write per-step roadmaps and candidates (JSON lines)");

  PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from an episode log");
  plot_cmd->add_option("--log", plot.log, "Episode CSV log")->required();
  plot_cmd->add_option("--guidance", plot.guidance, "Guidance dump of the same episode");
  plot_cmd->add_option("--scenario", plot.scenario, "Scenario JSON for road geometry");
  plot_cmd->add_option("--step", plot.step, "Step for the state-space view");
  plot_cmd->add_option("--out", plot.out, "Output directory (default: next to the log)");

  std::string validate_scenario;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("--scenario", validate_scenario, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_log_level(parse_level(level));
    if (*run_cmd) return cmd_run(run);
    if (*plot_cmd) return cmd_plot(plot);
    if (*validate_cmd) return cmd_validate(validate_scenario);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
