#pragma once

#include <vector>

#include <json.hpp>

#include "dars/approx/network.hpp"
#include "dars/data/transition.hpp"
#include "dars/skills/latent.hpp"

namespace dars {

// Skill discriminator q_φ. Categorical mode maps s_next → K logits and the
// probing reward is the log-posterior log q_φ(ω|s_next), floored at −20.
// Dirac mode degrades to a state-density estimator: a constant-input network
// parameterizes a diagonal Gaussian over states and the reward is its raw
// log-density (which normalizes analytically, hence no floor).
class Discriminator {
 public:
  static constexpr double kRewardFloor = -20.0;

  Discriminator(const LatentSpec& spec, int state_dim, const std::vector<int>& hidden, Rng& rng);

  // One Adam step on the mean NLL of the batch's (omega, s_next) pairs
  // (cross-entropy for categorical, Gaussian NLL for dirac). Returns the loss.
  double update(const std::vector<Transition>& batch, double lr = 3e-4);

  // Posterior over skills at a state (categorical mode).
  Vec posterior(const Vec& s_next) const;
  double probing_reward(int omega, const Vec& s_next) const;

  const LatentSpec& spec() const { return spec_; }
  const Network& net() const { return net_; }
  Network& mutable_net() { return net_; }
  OptState& opt() { return opt_; }

  nlohmann::json to_json() const;
  static Discriminator from_json(const nlohmann::json& j);

 private:
  Discriminator() = default;
  LatentSpec spec_;
  int state_dim_ = 0;
  Network net_;
  OptState opt_;
};

}  // namespace dars
