#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "dars/approx/network.hpp"
#include "dars/data/transition.hpp"
#include "dars/envs/tabular.hpp"

namespace dars {

// The two binary domain classifiers behind the reward modification:
//   sas: (s, a, s') → 2 logits,  sa: (s, a) → 2 logits  (class 0 = source).
// By Bayes' rule with balanced batches their posterior odds estimate the
// dynamics density ratio, giving
//   Δr(s,a,s') = log q(src|s,a,s')/q(tgt|s,a,s') − log q(src|s,a)/q(tgt|s,a).
class DomainClassifiers {
 public:
  static constexpr double kLogitClamp = 15.0;

  DomainClassifiers(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& rng,
                    double input_noise_scale = 0.1, double clip = 10.0);

  // One Adam step on each classifier's cross-entropy over the balanced pair
  // of batches. Gaussian input noise (input_noise_scale × per-dimension batch
  // std) is added during training only. Returns (sas_loss, sa_loss).
  std::pair<double, double> update(const std::vector<Transition>& batch_source,
                                   const std::vector<Transition>& batch_target, Rng& rng,
                                   double lr = 3e-4);

  // Double log-ratio from clamped logits, clipped to [−clip, clip]; no noise.
  double delta_r(const Vec& s, const Vec& a, const Vec& s_next) const;

  double clip() const { return clip_; }
  const Network& sas() const { return sas_; }
  const Network& sa() const { return sa_; }

  nlohmann::json to_json() const;
  static DomainClassifiers from_json(const nlohmann::json& j);

 private:
  DomainClassifiers() = default;
  int state_dim_ = 0, action_dim_ = 0;
  double input_noise_scale_ = 0.1;
  double clip_ = 10.0;
  Network sas_, sa_;
  OptState opt_sas_, opt_sa_;
};

// Exact oracle: log P_S(s'|s,a) − log P_T(s'|s,a) on a tabular pair.
// Requires P_S(s'|s,a) > 0; returns +clip where P_T = 0.
double exact_delta_r(const TabularMDP& source, const TabularMDP& target, int s, int a, int s_next,
                     double clip = 10.0);

}  // namespace dars
