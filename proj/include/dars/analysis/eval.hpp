#pragma once

#include <functional>
#include <vector>

#include "dars/data/rollout.hpp"
#include "dars/skills/discriminator.hpp"
#include "dars/skills/latent.hpp"

namespace dars {

// Mean of −‖s_T − g‖₂ over n episodes; goals cycle through goal_set and are
// appended to the observation as the policy conditioning.
double eval_goal_reaching(const PolicyFn& policy, const ContinuousEnv& env,
                          const std::vector<Vec>& goal_set, int n, Rng& rng);

// Fraction of rollouts whose final state the discriminator assigns to the
// conditioning skill (argmax of the posterior). Categorical latents only.
double skill_accuracy(const PolicyFn& policy, const ContinuousEnv& env, const Discriminator& disc,
                      const LatentSpec& latent, int n_per_skill, Rng& rng);

// Per-step reward decomposition of one deployment episode: the discriminator
// term log q_φ(ω|s') and the dynamics penalty β·Δr(s,a,s'). delta_r may be a
// learned classifier pair or an exact oracle.
struct RewardTrace {
  Vec log_q;
  Vec beta_delta_r;
};

RewardTrace track_rewards(const PolicyFn& policy, const ContinuousEnv& env, const Discriminator& disc,
                          int omega, const Vec& cond,
                          const std::function<double(const Vec&, const Vec&, const Vec&)>& delta_r,
                          double beta, Rng& rng);

}  // namespace dars
