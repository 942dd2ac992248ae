#include "guidance/trajectory_selection.hpp"

#include <cmath>

#include "guidance/errors.hpp"

namespace guidance {

double score(const GuidanceSpline& spline, const SelectionWeights& weights, bool was_selected_previously) {
  const int n = std::max(2, weights.num_samples);
  const double t0 = spline.x.front();
  const double dt = spline.duration() / (n - 1);
  const double penalty = was_selected_previously ? 0.0 : weights.consistency;

  double cost = 0.0;
  double discount = 1.0;
  Vec2 previous = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const SplineSample s = spline.sample(i == n - 1 ? spline.x.back() : t0 + i * dt);
    if (i > 0) cost += weights.length * (s.position - previous).norm();
    cost += weights.velocity * std::abs(s.velocity.norm() - weights.reference_speed);
    cost += weights.acceleration * discount * s.acceleration.norm();
    if (weights.per_sample_consistency) cost += penalty;
    previous = s.position;
    discount *= weights.discount;
  }
  if (!weights.per_sample_consistency) cost += penalty;
  return cost;
}

SelectionResult select(const std::vector<GuidanceSpline>& candidates, std::optional<int> previous_id,
                       const SelectionWeights& weights) {
  if (candidates.empty()) throw EmptyCandidates("no guidance candidates to select from");
  SelectionResult result;
  result.costs.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const int id = candidates[i].trajectory_id;
    const bool previous = previous_id && *previous_id == id;
    const double cost = score(candidates[i], weights, previous);
    result.costs.emplace_back(id, cost);

    if (i == 0) continue;
    const double best = result.costs[result.chosen_index].second;
    const int best_id = result.costs[result.chosen_index].first;
    bool better = cost < best;
    if (cost == best) {
      const bool best_previous = previous_id && *previous_id == best_id;
      better = previous || (!best_previous && id < best_id);
    }
    if (better) result.chosen_index = i;
  }
  result.chosen_id = result.costs[result.chosen_index].first;
  return result;
}

}  // namespace guidance
