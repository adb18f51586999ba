#include "dars/analysis/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dars/common/errors.hpp"
#include "dars/offdyn/classifiers.hpp"

namespace dars {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const TabularMDP& source, const TabularMDP& target) {
  validate_tabular(source);
  validate_tabular(target);
  if (source.n_states != target.n_states || source.n_actions != target.n_actions ||
      source.T != target.T)
    throw ShapeError("theory: source/target shapes must match");
  for (int s = 0; s < source.n_states; ++s)
    if (std::abs(source.rho0[s] - target.rho0[s]) > 1e-12)
      throw ShapeError("theory: source/target must share rho0");
  // Enumeration cost: n_states * (n_actions * n_states)^T trajectories.
  double count = source.n_states;
  for (int t = 0; t < source.T; ++t) {
    count *= static_cast<double>(source.n_actions) * source.n_states;
    if (count > 1e6) throw ShapeError("theory: trajectory space exceeds 1e6, not enumerable");
  }
}

// Everything the bound checks need about one policy, from a single pass over
// the trajectory space. f(τ) = log p_{S,π}(τ)/p*_S(τ) = Σ_t log π(a|s)/π_e(a|s)
// is dynamics-free, so the same values serve both domains.
struct PolicyStats {
  double kl_s = 0.0;      // D_KL(p_S,π ‖ p*_S)
  double kl_t = 0.0;      // D_KL(p_T,π ‖ p*_T)
  double cross_kl = 0.0;  // D_KL(p_S,π ‖ p_T,π)
  double l1 = 0.0;        // ‖p_S,π − p_T,π‖₁
  double lmax = 0.0;      // max |f| over the union support
};

PolicyStats policy_stats(const TabularMDP& source, const TabularMDP& target,
                         const TabularPolicy& pi, const TabularPolicy& pi_expert) {
  PolicyStats st;
  long double kl_s = 0.0L, kl_t = 0.0L, cross = 0.0L, l1 = 0.0L;
  bool cross_inf = false;
  enumerate_trajectories(
      source, pi,
      [&](const TabularTraj& traj, double) {
        // Recompute both probabilities through tabular_traj_prob so identical
        // inputs round identically and log-ratios of equal masses are exact 0.
        const double p_s = tabular_traj_prob(source, pi, traj);
        const double p_t = tabular_traj_prob(target, pi, traj);
        if (p_s == 0.0 && p_t == 0.0) return;
        double f = 0.0;
        for (size_t t = 0; t < traj.actions.size(); ++t)
          f += std::log(pi[traj.states[t]][traj.actions[t]]) -
               std::log(pi_expert[traj.states[t]][traj.actions[t]]);
        st.lmax = std::max(st.lmax, std::abs(f));
        if (p_s > 0.0) {
          kl_s += static_cast<long double>(p_s) * f;
          if (p_t > 0.0)
            cross += static_cast<long double>(p_s) * std::log(p_s / p_t);
          else
            cross_inf = true;
        }
        if (p_t > 0.0) kl_t += static_cast<long double>(p_t) * f;
        l1 += std::abs(static_cast<long double>(p_s) - p_t);
      },
      /*skip_zero=*/false);
  st.kl_s = static_cast<double>(kl_s);
  st.kl_t = static_cast<double>(kl_t);
  st.cross_kl = cross_inf ? kInf : static_cast<double>(cross);
  st.l1 = static_cast<double>(l1);
  return st;
}

}  // namespace

KlIdentityResult verify_kl_identity(const TabularMDP& source, const TabularMDP& target,
                                    const TabularPolicy& pi) {
  check_pair(source, target);
  long double kl = 0.0L, via = 0.0L;
  enumerate_trajectories(source, pi, [&](const TabularTraj& traj, double) {
    const double p_s = tabular_traj_prob(source, pi, traj);
    const double p_t = tabular_traj_prob(target, pi, traj);
    if (p_t == 0.0)
      throw NumericError("verify_kl_identity: source trajectory has zero target probability");
    kl += static_cast<long double>(p_s) * std::log(p_s / p_t);
    long double dr_sum = 0.0L;
    for (size_t t = 0; t < traj.actions.size(); ++t)
      dr_sum += exact_delta_r(source, target, traj.states[t], traj.actions[t], traj.states[t + 1],
                              kInf);
    via += static_cast<long double>(p_s) * dr_sum;
  });
  return {static_cast<double>(kl), static_cast<double>(via)};
}

double trajectory_kl(const TabularMDP& dyn_p, const TabularPolicy& pi_p, const TabularMDP& dyn_q,
                     const TabularPolicy& pi_q) {
  check_pair(dyn_p, dyn_q);
  long double kl = 0.0L;
  bool inf = false;
  enumerate_trajectories(dyn_p, pi_p, [&](const TabularTraj& traj, double) {
    const double p = tabular_traj_prob(dyn_p, pi_p, traj);
    const double q = tabular_traj_prob(dyn_q, pi_q, traj);
    if (q == 0.0)
      inf = true;
    else
      kl += static_cast<long double>(p) * std::log(p / q);
  });
  return inf ? kInf : static_cast<double>(kl);
}

TheoryReport verify_bounds(const TabularMDP& source, const TabularMDP& target,
                           const TabularPolicy& pi_dars, const TabularPolicy& pi_star,
                           const TabularPolicy& pi_expert, double beta) {
  check_pair(source, target);
  if (beta <= 0.0) throw ShapeError("verify_bounds: beta must be positive");
  const PolicyStats sd = policy_stats(source, target, pi_dars, pi_expert);
  const PolicyStats ss = policy_stats(source, target, pi_star, pi_expert);

  TheoryReport r;
  r.kl_source = sd.kl_s;
  r.kl_target = sd.kl_t;
  r.epsilon_over_beta = ss.cross_kl;
  r.L_max = std::max(sd.lmax, ss.lmax);

  const double slack = 1e-9;
  auto lemma2_rhs = [](const PolicyStats& st) {
    return std::sqrt(2.0 * st.cross_kl) * st.lmax;
  };
  const double gap_d = lemma2_rhs(sd) - std::abs(sd.kl_t - sd.kl_s);
  const double gap_s = lemma2_rhs(ss) - std::abs(ss.kl_t - ss.kl_s);
  r.lemma2_gap = std::min(gap_d, gap_s);
  r.lemma2_holds = r.lemma2_gap >= -slack;
  r.pinsker_holds = sd.l1 <= std::sqrt(2.0 * sd.cross_kl) + slack &&
                    ss.l1 <= std::sqrt(2.0 * ss.cross_kl) + slack;
  r.holder_holds = std::abs(sd.kl_t - sd.kl_s) <= sd.l1 * sd.lmax + slack &&
                   std::abs(ss.kl_t - ss.kl_s) <= ss.l1 * ss.lmax + slack;

  r.theorem1_lhs = sd.kl_t;
  r.theorem1_rhs = ss.kl_t + 2.0 * std::sqrt(2.0 * r.epsilon_over_beta) * r.L_max;
  r.theorem1_holds = r.theorem1_lhs <= r.theorem1_rhs + slack;
  return r;
}

TheoryReport search_and_verify_bounds(const TabularMDP& source, const TabularMDP& target,
                                      const TabularPolicy& pi_expert, double beta,
                                      int n_candidates, Rng& rng) {
  check_pair(source, target);
  if (n_candidates < 2) throw ShapeError("search_and_verify_bounds: need at least two candidates");
  std::vector<TabularPolicy> cands(n_candidates);
  std::vector<PolicyStats> stats(n_candidates);
  int star = 0;
  for (int i = 0; i < n_candidates; ++i) {
    cands[i] = random_tabular_policy(source, rng);
    stats[i] = policy_stats(source, target, cands[i], pi_expert);
    if (stats[i].kl_t < stats[star].kl_t) star = i;
  }
  const double eps_over_beta = stats[star].cross_kl;
  int dars_idx = star;  // π* is feasible by construction
  for (int i = 0; i < n_candidates; ++i) {
    if (stats[i].cross_kl <= eps_over_beta + 1e-12 && stats[i].kl_s < stats[dars_idx].kl_s)
      dars_idx = i;
  }
  TheoryReport r = verify_bounds(source, target, cands[dars_idx], cands[star], pi_expert, beta);
  r.n_candidates = n_candidates;
  return r;
}

nlohmann::json theory_report_to_json(const TheoryReport& r) {
  return nlohmann::json{{"kl_source", r.kl_source},
                        {"kl_target", r.kl_target},
                        {"epsilon_over_beta", r.epsilon_over_beta},
                        {"L_max", r.L_max},
                        {"lemma2_gap", r.lemma2_gap},
                        {"theorem1_lhs", r.theorem1_lhs},
                        {"theorem1_rhs", r.theorem1_rhs},
                        {"lemma2_holds", r.lemma2_holds},
                        {"pinsker_holds", r.pinsker_holds},
                        {"holder_holds", r.holder_holds},
                        {"theorem1_holds", r.theorem1_holds},
                        {"n_candidates", r.n_candidates}};
}

}  // namespace dars
