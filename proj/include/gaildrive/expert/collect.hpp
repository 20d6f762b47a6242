#ifndef GAILDRIVE_EXPERT_COLLECT_HPP_
#define GAILDRIVE_EXPERT_COLLECT_HPP_

#include <cstddef>

#include "gaildrive/expert/dataset.hpp"
#include "gaildrive/expert/pid.hpp"
#include "gaildrive/sim/environment.hpp"

namespace gaildrive::expert {

struct CollectOptions {
  std::size_t trajectories = 10;
  std::size_t max_steps_per_lap = 20000;
};

// Drives the expert from the route start to completion `trajectories`
// times, recording the observation seen before each action. Throws
// CollectionError if the expert commits an infraction or runs out of steps.
Dataset collect(const sim::RouteSpec& route, const PidParams& params,
                const sim::EnvConfig& env_config, const CollectOptions& options);

// Steps the expert needs for one lap of `route`.
std::size_t expert_lap_steps(const sim::RouteSpec& route, const PidParams& params,
                             const sim::EnvConfig& env_config = {});

}  // namespace gaildrive::expert

#endif  // GAILDRIVE_EXPERT_COLLECT_HPP_
