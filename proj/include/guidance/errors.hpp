#pragma once

#include <stdexcept>
#include <string>

namespace guidance {

// Base class for every recoverable planning error raised by the library.
class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EndpointMismatch : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

class GoalOccupied : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

class GoalUnreachable : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

class NoTrajectoryFound : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

class SingularSystem : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

class EmptyCandidates : public PlanningError {
 public:
  using PlanningError::PlanningError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace guidance
