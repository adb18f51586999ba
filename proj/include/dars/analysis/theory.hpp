#pragma once

#include <json.hpp>

#include "dars/envs/tabular.hpp"

namespace dars {

// --- KL-to-Δr identity -----------------------------------------------------
// For trajectory distributions sharing rho0 and policy,
//   D_KL(p_S(τ) ‖ p_T(τ)) = E_{p_S}[ Σ_t Δr(s_t, a_t, s_{t+1}) ],
// both sides computed by exhaustive enumeration.

struct KlIdentityResult {
  double kl_exact = 0.0;
  double kl_via_delta_r = 0.0;
};

// Requires matching dims/T/rho0 and an enumerable trajectory space
// (n_states · (n_actions·n_states)^T ≤ 1e6).
KlIdentityResult verify_kl_identity(const TabularMDP& source, const TabularMDP& target,
                                    const TabularPolicy& pi);

// --- Optimality bounds ------------------------------------------------------
// The desired distribution p* is generated by an expert policy π_e, so the
// ratio p_{·,π}/p*_· is dynamics-free and shared across the two domains.
// With ε := β·D_KL(p_{S,π*} ‖ p_{T,π*}) (making π* feasible), the chain
//   |D_KL(p_T,π‖p*_T) − D_KL(p_S,π‖p*_S)| ≤ ‖p_S,π − p_T,π‖₁ · L_max(π)
//                                         ≤ √(2·D_KL(p_S,π‖p_T,π)) · L_max(π)
// (Hölder, then Pinsker) yields
//   D_KL(p_T,π_dars‖p*_T) ≤ D_KL(p_T,π*‖p*_T) + 2·√(2ε/β)·L_max
// whenever π_dars minimizes the source KL over the feasible set containing π*.

struct TheoryReport {
  double kl_source = 0.0;        // D_KL(p_S,π_dars ‖ p*_S)
  double kl_target = 0.0;        // D_KL(p_T,π_dars ‖ p*_T)
  double epsilon_over_beta = 0.0;
  double L_max = 0.0;            // max over {π_dars, π*} and the support
  double lemma2_gap = 0.0;       // min over both policies of (rhs − lhs)
  double theorem1_lhs = 0.0;
  double theorem1_rhs = 0.0;
  bool lemma2_holds = false;
  bool pinsker_holds = false;
  bool holder_holds = false;
  bool theorem1_holds = false;
  int n_candidates = 0;          // search breadth (0 when policies supplied)
};

nlohmann::json theory_report_to_json(const TheoryReport& r);

TheoryReport verify_bounds(const TabularMDP& source, const TabularMDP& target,
                           const TabularPolicy& pi_dars, const TabularPolicy& pi_star,
                           const TabularPolicy& pi_expert, double beta);

// Brute-force stand-in for the two argmin policies: π* minimizes the target
// KL over n_candidates random policies; π_dars minimizes the source KL over
// the subset satisfying β·D_KL(p_S,π‖p_T,π) ≤ ε. Returns the report with
// n_candidates recorded.
TheoryReport search_and_verify_bounds(const TabularMDP& source, const TabularMDP& target,
                                      const TabularPolicy& pi_expert, double beta,
                                      int n_candidates, Rng& rng);

// D_KL between the trajectory distributions induced by (dyn_p, pi_p) and
// (dyn_q, pi_q); shared rho0 required. Exposed for tests.
double trajectory_kl(const TabularMDP& dyn_p, const TabularPolicy& pi_p, const TabularMDP& dyn_q,
                     const TabularPolicy& pi_q);

}  // namespace dars
