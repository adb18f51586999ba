#pragma once

#include <functional>
#include <vector>

#include "dars/common/rng.hpp"

namespace dars {

// Finite MDP used as the exact-enumeration substrate for the theory checks.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  // P[s][a] is a distribution over next states.
  std::vector<std::vector<std::vector<double>>> P;
  std::vector<double> rho0;
  int T = 1;
};

// Stochastic policy table: pi[s] is a distribution over actions.
using TabularPolicy = std::vector<std::vector<double>>;

void validate_tabular(const TabularMDP& mdp);

// A trajectory of T steps: states s_0..s_T, actions a_0..a_{T-1}.
struct TabularTraj {
  std::vector<int> states;
  std::vector<int> actions;
};

// rho0(s0) * prod_t pi(a_t|s_t) * P(s_{t+1}|s_t,a_t).
double tabular_traj_prob(const TabularMDP& mdp, const TabularPolicy& pi, const TabularTraj& traj);

// Enumerate every length-T trajectory (including zero-probability ones when
// skip_zero is false). Visitor receives (traj, prob).
void enumerate_trajectories(const TabularMDP& mdp, const TabularPolicy& pi,
                            const std::function<void(const TabularTraj&, double)>& visit,
                            bool skip_zero = true);

// Random generators for oracle tests. full_support keeps every transition
// probability >= min_p so KL divergences stay finite.
TabularMDP random_tabular_mdp(int n_states, int n_actions, int T, Rng& rng,
                              bool full_support = true, double min_p = 0.05);
TabularPolicy random_tabular_policy(const TabularMDP& mdp, Rng& rng, double min_p = 0.02);

int sample_categorical(const std::vector<double>& p, Rng& rng);

}  // namespace dars
