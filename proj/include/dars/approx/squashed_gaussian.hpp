#pragma once

#include "dars/common/mat.hpp"
#include "dars/common/rng.hpp"

namespace dars {

// tanh-squashed diagonal Gaussian, the SAC policy head.
// a = tanh(u), u ~ Normal(mean, exp(log_std)) with log_std clamped to
// [-20, 2]; log_prob carries the change-of-variable correction
// sum_i log(1 - tanh(u_i)^2 + 1e-6).

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kTanhEps = 1e-6;

void clamp_log_std(Vec& log_std);

struct SquashedSample {
  Vec action;    // strictly inside (-1,1)^d
  Vec u;         // pre-tanh sample
  double log_prob = 0.0;
};

SquashedSample sample_squashed_gaussian(const Vec& mean, const Vec& log_std, Rng& rng);

// log-density of a = tanh(u) under the squashed Gaussian (log_std taken
// as already clamped by the caller or by sample_squashed_gaussian).
double squashed_log_prob(const Vec& mean, const Vec& log_std, const Vec& u);

// Deterministic action used for evaluation rollouts.
Vec squashed_mean_action(const Vec& mean);

// Reparameterized partials at a fixed noise draw (u = mean + std * eps):
//   dlogp_*  — of log_prob w.r.t. mean and log_std,
//   da_*     — diagonal Jacobian of the action w.r.t. mean and log_std.
// Inputs must be the clamped log_std and the u actually sampled from it.
struct SquashedGrad {
  Vec dlogp_dmean, dlogp_dlogstd;
  Vec da_dmean, da_dlogstd;
};

SquashedGrad squashed_backward(const Vec& mean, const Vec& log_std, const Vec& u);

}  // namespace dars
