#pragma once

#include <functional>
#include <vector>

#include "dars/data/transition.hpp"
#include "dars/envs/map.hpp"

namespace dars {

// obs = concat(state, cond); returns an action in [-1,1]^action_dim.
using PolicyFn = std::function<Vec(const Vec& obs, Rng& rng)>;

// Runs one episode of env.horizon() steps. The conditioning vector is
// appended to the state for every policy call and stored on every
// transition together with the latent index.
std::vector<Transition> rollout(const PolicyFn& policy, const ContinuousEnv& env, const Vec& cond,
                                int omega, Domain domain, long episode_id, Rng& rng);

}  // namespace dars
