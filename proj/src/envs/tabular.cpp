#include "dars/envs/tabular.hpp"

#include <cmath>
#include <functional>

#include "dars/common/errors.hpp"

namespace dars {

void validate_tabular(const TabularMDP& mdp) {
  if (mdp.n_states < 1 || mdp.n_actions < 1 || mdp.T < 1)
    throw ShapeError("tabular: dims and horizon must be positive");
  if (static_cast<int>(mdp.P.size()) != mdp.n_states ||
      static_cast<int>(mdp.rho0.size()) != mdp.n_states)
    throw ShapeError("tabular: P/rho0 sized to n_states");
  double r = 0.0;
  for (double v : mdp.rho0) {
    if (v < 0.0) throw ShapeError("tabular: negative rho0 entry");
    r += v;
  }
  if (std::abs(r - 1.0) > 1e-12) throw ShapeError("tabular: rho0 must sum to 1");
  for (const auto& row_s : mdp.P) {
    if (static_cast<int>(row_s.size()) != mdp.n_actions)
      throw ShapeError("tabular: P[s] sized to n_actions");
    for (const auto& dist : row_s) {
      if (static_cast<int>(dist.size()) != mdp.n_states)
        throw ShapeError("tabular: P[s][a] sized to n_states");
      double sum = 0.0;
      for (double v : dist) {
        if (v < 0.0) throw ShapeError("tabular: negative transition probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw ShapeError("tabular: P[s][a] must sum to 1");
    }
  }
}

double tabular_traj_prob(const TabularMDP& mdp, const TabularPolicy& pi, const TabularTraj& traj) {
  if (traj.states.size() != traj.actions.size() + 1)
    throw ShapeError("tabular_traj_prob: need one more state than actions");
  if (static_cast<int>(traj.actions.size()) > mdp.T)
    throw ShapeError("tabular_traj_prob: trajectory longer than horizon");
  auto check_state = [&](int s) {
    if (s < 0 || s >= mdp.n_states) throw ShapeError("tabular_traj_prob: state index out of range");
  };
  double p = 1.0;
  check_state(traj.states[0]);
  p *= mdp.rho0[traj.states[0]];
  for (size_t t = 0; t < traj.actions.size(); ++t) {
    const int s = traj.states[t], a = traj.actions[t], sn = traj.states[t + 1];
    check_state(sn);
    if (a < 0 || a >= mdp.n_actions) throw ShapeError("tabular_traj_prob: action index out of range");
    p *= pi[s][a] * mdp.P[s][a][sn];
    if (p == 0.0) return 0.0;
  }
  return p;
}

void enumerate_trajectories(const TabularMDP& mdp, const TabularPolicy& pi,
                            const std::function<void(const TabularTraj&, double)>& visit,
                            bool skip_zero) {
  TabularTraj traj;
  traj.states.resize(mdp.T + 1);
  traj.actions.resize(mdp.T);
  std::function<void(int, double)> rec = [&](int t, double p) {
    if (skip_zero && p == 0.0) return;
    if (t == mdp.T) {
      visit(traj, p);
      return;
    }
    const int s = traj.states[t];
    for (int a = 0; a < mdp.n_actions; ++a) {
      traj.actions[t] = a;
      for (int sn = 0; sn < mdp.n_states; ++sn) {
        traj.states[t + 1] = sn;
        rec(t + 1, p * pi[s][a] * mdp.P[s][a][sn]);
      }
    }
  };
  for (int s0 = 0; s0 < mdp.n_states; ++s0) {
    traj.states[0] = s0;
    rec(0, mdp.rho0[s0]);
  }
}

static std::vector<double> random_simplex(int n, Rng& rng, double min_p) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& v : p) {
    v = -std::log(rng.uniform() + 1e-300);  // Exp(1) draws normalize to Dirichlet(1)
    sum += v;
  }
  for (auto& v : p) v /= sum;
  if (min_p > 0.0) {
    // Mix toward uniform until every entry clears min_p.
    const double lam = min_p * n < 1.0 ? min_p * n : 0.99;
    for (auto& v : p) v = (1.0 - lam) * v + lam / n;
  }
  double renorm = 0.0;
  for (double v : p) renorm += v;
  for (auto& v : p) v /= renorm;
  return p;
}

TabularMDP random_tabular_mdp(int n_states, int n_actions, int T, Rng& rng, bool full_support,
                              double min_p) {
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.T = T;
  mdp.rho0 = random_simplex(n_states, rng, full_support ? min_p : 0.0);
  mdp.P.resize(n_states);
  for (auto& row_s : mdp.P) {
    row_s.resize(n_actions);
    for (auto& dist : row_s) dist = random_simplex(n_states, rng, full_support ? min_p : 0.0);
  }
  validate_tabular(mdp);
  return mdp;
}

TabularPolicy random_tabular_policy(const TabularMDP& mdp, Rng& rng, double min_p) {
  TabularPolicy pi(mdp.n_states);
  for (auto& row : pi) row = random_simplex(mdp.n_actions, rng, min_p);
  return pi;
}

int sample_categorical(const std::vector<double>& p, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace dars
