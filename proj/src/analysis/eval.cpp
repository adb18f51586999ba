#include "dars/analysis/eval.hpp"

#include <cmath>

#include "dars/common/errors.hpp"

namespace dars {

double eval_goal_reaching(const PolicyFn& policy, const ContinuousEnv& env,
                          const std::vector<Vec>& goal_set, int n, Rng& rng) {
  if (goal_set.empty() || n < 1) throw ShapeError("eval_goal_reaching: need goals and episodes");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec& g = goal_set[i % goal_set.size()];
    if (static_cast<int>(g.size()) != env.state_dim())
      throw ShapeError("eval_goal_reaching: goal dimension mismatch");
    const auto traj = rollout(policy, env, g, /*omega=*/-1, Domain::source, i, rng);
    const Vec& sT = traj.back().s_next;
    double d2 = 0.0;
    for (size_t k = 0; k < g.size(); ++k) d2 += (sT[k] - g[k]) * (sT[k] - g[k]);
    total += -std::sqrt(d2);
  }
  return total / n;
}

double skill_accuracy(const PolicyFn& policy, const ContinuousEnv& env, const Discriminator& disc,
                      const LatentSpec& latent, int n_per_skill, Rng& rng) {
  if (latent.kind != LatentSpec::Kind::categorical)
    throw ShapeError("skill_accuracy: categorical latents only");
  if (n_per_skill < 1) throw ShapeError("skill_accuracy: need at least one episode per skill");
  int hits = 0;
  long eid = 0;
  for (int omega = 0; omega < latent.K; ++omega) {
    const Vec cond = encode_latent(latent, omega);
    for (int i = 0; i < n_per_skill; ++i) {
      const auto traj = rollout(policy, env, cond, omega, Domain::source, eid++, rng);
      const Vec post = disc.posterior(traj.back().s_next);
      int argmax = 0;
      for (int k = 1; k < latent.K; ++k)
        if (post[k] > post[argmax]) argmax = k;
      if (argmax == omega) ++hits;
    }
  }
  return static_cast<double>(hits) / (latent.K * n_per_skill);
}

RewardTrace track_rewards(const PolicyFn& policy, const ContinuousEnv& env, const Discriminator& disc,
                          int omega, const Vec& cond,
                          const std::function<double(const Vec&, const Vec&, const Vec&)>& delta_r,
                          double beta, Rng& rng) {
  const auto traj = rollout(policy, env, cond, omega, Domain::source, 0, rng);
  RewardTrace trace;
  trace.log_q.reserve(traj.size());
  trace.beta_delta_r.reserve(traj.size());
  for (const auto& tr : traj) {
    trace.log_q.push_back(disc.probing_reward(tr.omega, tr.s_next));
    trace.beta_delta_r.push_back(delta_r ? beta * delta_r(tr.s, tr.a, tr.s_next) : 0.0);
  }
  return trace;
}

}  // namespace dars
