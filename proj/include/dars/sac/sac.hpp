#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "dars/approx/network.hpp"
#include "dars/approx/squashed_gaussian.hpp"

namespace dars {

struct SacConfig {
  double gamma = 0.99;
  double alpha = 0.2;  // fixed temperature
  double tau = 0.05;   // polyak smoothing
  double lr = 3e-4;
  int batch = 256;
  std::vector<int> hidden = {64, 64};
};

// Soft actor-critic over a flat observation vector (state ++ conditioning).
// Episodes end only by horizon, so critic targets always bootstrap
// (time-limit bootstrapping, no done masking).
class SacAgent {
 public:
  SacAgent(int obs_dim, int action_dim, const SacConfig& cfg, Rng& rng);

  Vec act(const Vec& obs, Rng& rng) const;
  Vec act_deterministic(const Vec& obs) const;

  struct Batch {
    Mat obs;       // [n x obs_dim]
    Mat action;    // [n x action_dim]
    Vec reward;    // [n]
    Mat obs_next;  // [n x obs_dim]
  };

  // Soft Bellman targets y = r + γ(min(Q̄1,Q̄2)(s',a') − α·log π(a'|s')),
  // a' ~ π(·|s'). Exposed so tests can replay the computation.
  Vec compute_targets(const Batch& batch, Rng& rng) const;

  // One Adam step on each critic's squared error to the targets.
  std::pair<double, double> critic_update(const Batch& batch, Rng& rng);

  // Loss E[α·log π(a|s) − min(Q1,Q2)(s,a)] with reparameterized actions and
  // its gradient w.r.t. the policy parameters; critics held fixed. The noise
  // draws depend only on the batch shape, so a copied rng replays them.
  Gradients policy_gradient(const Batch& batch, Rng& rng, double& loss) const;

  // One Adam step on policy_gradient. Returns the loss.
  double policy_update(const Batch& batch, Rng& rng);

  // Q̄ ← (1−τ)·Q̄ + τ·Q elementwise.
  void polyak_update();

  const SacConfig& config() const { return cfg_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  const Network& policy() const { return policy_; }
  const Network& q1() const { return q1_; }
  const Network& q1_target() const { return q1_targ_; }
  const Network& q2_target() const { return q2_targ_; }

  nlohmann::json to_json() const;
  static SacAgent from_json(const nlohmann::json& j);

 private:
  SacAgent() = default;
  void policy_out(const Vec& obs, Vec& mean, Vec& log_std) const;

  SacConfig cfg_;
  int obs_dim_ = 0, action_dim_ = 0;
  Network policy_;  // heads "mean", "log_std"
  Network q1_, q2_, q1_targ_, q2_targ_;
  OptState opt_policy_, opt_q1_, opt_q2_;
};

}  // namespace dars
