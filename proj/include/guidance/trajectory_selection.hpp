#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "guidance/spline_smoothing.hpp"

namespace guidance {

struct SelectionWeights {
  double length = 1.0;
  double velocity = 100.0;
  double acceleration = 100.0;
  double consistency = 25.0;
  double discount = 0.95;
  double reference_speed = 2.0;
  int num_samples = 20;
  // Adds the consistency penalty at every sample instead of once.
  bool per_sample_consistency = false;
};

struct SelectionResult {
  int chosen_id = 0;
  std::size_t chosen_index = 0;
  std::vector<std::pair<int, double>> costs;  // (trajectory id, cost) per candidate
};

/// Sampled path length, speed deviation and discounted acceleration, plus the
/// consistency penalty when the spline was not selected last iteration.
double score(const GuidanceSpline& spline, const SelectionWeights& weights, bool was_selected_previously);

/// Lowest-cost candidate. Exact ties go to the previous selection, then to
/// the smaller trajectory id. Throws EmptyCandidates.
SelectionResult select(const std::vector<GuidanceSpline>& candidates, std::optional<int> previous_id,
                       const SelectionWeights& weights);

}  // namespace guidance
