#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "guidance/scenario.hpp"

namespace guidance {

/// Column order of episode logs.
extern const std::vector<std::string> kEpisodeColumns;

/// One row per step; doubles are written with 17 significant digits.
void write_episode_csv(std::ostream& out, const EpisodeLog& log);
/// step, high_level_ms, mpcc_ms, total_ms. Wall-clock values, not reproducible.
void write_timing_csv(std::ostream& out, const EpisodeLog& log);
/// One JSON object per line: roadmap and candidate splines of a step.
void write_guidance_jsonl(std::ostream& out, const EpisodeLog& log);

/// Parsed episode log row (the subset needed for plotting).
struct LoggedStep {
  int step = 0;
  double time = 0.0;
  RobotState state;
  std::optional<int> selected_id;
  std::vector<Obstacle> obstacles;
  std::optional<GuidanceSpline> spline;
};

/// Throws ConfigError on a malformed or empty log.
std::vector<LoggedStep> read_episode_csv(std::istream& in);

struct LoggedGuidance {
  int step = 0;
  int selected_id = 0;
  std::vector<GuardNode> guards;
  std::vector<ConnectorNode> connectors;
  std::vector<GuidanceSpline> candidates;
};

/// Entry for one step of a guidance dump; nullopt when the step is absent.
std::optional<LoggedGuidance> read_guidance_step(std::istream& in, int step);

std::string spline_to_text(const GuidanceSpline& spline);
GuidanceSpline spline_from_text(const std::string& text);

/// Deterministic per-episode metrics, one row per (planner, seed).
void write_metrics_csv(std::ostream& out, const BatchResult& batch);
/// Deterministic metrics: per-episode rows and per-planner summaries.
void write_metrics_json(std::ostream& out, const BatchResult& batch);
/// Wall-clock timing per episode and per planner.
void write_timing_summary_csv(std::ostream& out, const BatchResult& batch);

struct RunManifest {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::vector<PlannerKind> planners;
  std::string output_directory;
  std::string version;
};

void write_manifest(std::ostream& out, const RunManifest& manifest);

/// Writes metrics, timing, manifest and per-episode logs into directory.
void write_run(const std::filesystem::path& directory, const BatchResult& batch, const RunManifest& manifest,
               bool write_guidance);

std::string episode_stem(PlannerKind planner, std::uint64_t seed);

}  // namespace guidance
