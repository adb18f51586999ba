#pragma once

#include <vector>

#include "dars/data/transition.hpp"
#include "dars/skills/latent.hpp"

namespace dars {

// c1: the latent itself is the goal; c2: the probing trajectory's final state.
struct RelabelStrategy {
  enum class Kind { latent_as_goal, final_state };
  Kind kind = Kind::latent_as_goal;
};

// Returns the goal as the conditioning vector for the goal-conditioned
// policy: one-hot(ω) under latent_as_goal, s̃_T under final_state.
Vec relabel(const RelabelStrategy& strategy, const LatentSpec& latent, int omega,
            const std::vector<Transition>& probing_traj);

int goal_cond_dim(const RelabelStrategy& strategy, const LatentSpec& latent, int state_dim);

}  // namespace dars
