#include "dars/sac/sac.hpp"

#include <algorithm>
#include <cmath>

#include "dars/common/errors.hpp"

namespace dars {

SacAgent::SacAgent(int obs_dim, int action_dim, const SacConfig& cfg, Rng& rng)
    : cfg_(cfg), obs_dim_(obs_dim), action_dim_(action_dim) {
  // alpha = 0 and tau = 0 are admitted as degenerate settings (no entropy
  // term / frozen targets); negative values are rejected.
  if (cfg.alpha < 0.0 || cfg.tau < 0.0 || cfg.tau > 1.0)
    throw ShapeError("SacAgent: need alpha >= 0 and tau in [0,1]");
  policy_ = make_mlp(obs_dim, cfg.hidden, 2 * action_dim, Act::relu, rng);
  policy_.heads["mean"] = Head{0, action_dim};
  policy_.heads["log_std"] = Head{action_dim, action_dim};
  q1_ = make_mlp(obs_dim + action_dim, cfg.hidden, 1, Act::relu, rng);
  q2_ = make_mlp(obs_dim + action_dim, cfg.hidden, 1, Act::relu, rng);
  q1_targ_ = q1_;
  q2_targ_ = q2_;
  opt_policy_ = make_opt_state(policy_);
  opt_q1_ = make_opt_state(q1_);
  opt_q2_ = make_opt_state(q2_);
}

void SacAgent::policy_out(const Vec& obs, Vec& mean, Vec& log_std) const {
  Vec out = forward(policy_, obs);
  mean.assign(out.begin(), out.begin() + action_dim_);
  log_std.assign(out.begin() + action_dim_, out.end());
  clamp_log_std(log_std);
}

Vec SacAgent::act(const Vec& obs, Rng& rng) const {
  Vec mean, log_std;
  policy_out(obs, mean, log_std);
  return sample_squashed_gaussian(mean, log_std, rng).action;
}

Vec SacAgent::act_deterministic(const Vec& obs) const {
  Vec mean, log_std;
  policy_out(obs, mean, log_std);
  return squashed_mean_action(mean);
}

namespace {

Mat concat_cols(const Mat& a, const Mat& b) {
  Mat c(a.rows, a.cols + b.cols);
  for (int r = 0; r < a.rows; ++r) {
    for (int i = 0; i < a.cols; ++i) c(r, i) = a(r, i);
    for (int i = 0; i < b.cols; ++i) c(r, a.cols + i) = b(r, i);
  }
  return c;
}

}  // namespace

Vec SacAgent::compute_targets(const Batch& batch, Rng& rng) const {
  const int n = batch.obs.rows;
  Mat pol_out = forward_batch(policy_, batch.obs_next);
  Mat a_next(n, action_dim_);
  Vec logp(n, 0.0);
  for (int r = 0; r < n; ++r) {
    Vec mean(action_dim_), log_std(action_dim_);
    for (int j = 0; j < action_dim_; ++j) {
      mean[j] = pol_out(r, j);
      log_std[j] = pol_out(r, action_dim_ + j);
    }
    clamp_log_std(log_std);
    auto s = sample_squashed_gaussian(mean, log_std, rng);
    for (int j = 0; j < action_dim_; ++j) a_next(r, j) = s.action[j];
    logp[r] = s.log_prob;
  }
  Mat in_next = concat_cols(batch.obs_next, a_next);
  Mat t1 = forward_batch(q1_targ_, in_next);
  Mat t2 = forward_batch(q2_targ_, in_next);
  Vec y(n);
  for (int r = 0; r < n; ++r) {
    const double q_min = std::min(t1(r, 0), t2(r, 0));
    y[r] = batch.reward[r] + cfg_.gamma * (q_min - cfg_.alpha * logp[r]);
    if (!std::isfinite(y[r]))
      throw NumericError("critic target non-finite at batch row " + std::to_string(r));
  }
  return y;
}

std::pair<double, double> SacAgent::critic_update(const Batch& batch, Rng& rng) {
  Vec y = compute_targets(batch, rng);
  Mat in = concat_cols(batch.obs, batch.action);
  const int n = in.rows;
  auto step = [&](Network& q, OptState& opt) {
    double loss = 0.0;
    Gradients g = grad(q, in, [&](const Mat& out, Mat& d_out) {
      double l = 0.0;
      for (int r = 0; r < n; ++r) {
        const double d = out(r, 0) - y[r];
        l += d * d / n;
        d_out(r, 0) = 2.0 * d / n;
      }
      return loss = l;
    });
    adam_step(q, g, opt, cfg_.lr);
    return loss;
  };
  const double l1 = step(q1_, opt_q1_);
  const double l2 = step(q2_, opt_q2_);
  return {l1, l2};
}

Gradients SacAgent::policy_gradient(const Batch& batch, Rng& rng, double& loss) const {
  const int n = batch.obs.rows;
  const int d = action_dim_;

  ForwardCache pol_cache;
  Mat pol_out = forward_batch(policy_, batch.obs, &pol_cache);

  // Reparameterized sample per row, remembering which log_std coordinates
  // the clamp froze (their gradient is zero).
  Mat a(n, d);
  std::vector<SquashedGrad> sg(n);
  std::vector<std::vector<bool>> clamped(n, std::vector<bool>(d, false));
  double mean_logp = 0.0;
  for (int r = 0; r < n; ++r) {
    Vec mean(d), raw_ls(d), ls(d), u(d);
    for (int j = 0; j < d; ++j) {
      mean[j] = pol_out(r, j);
      raw_ls[j] = pol_out(r, d + j);
      ls[j] = std::clamp(raw_ls[j], kLogStdMin, kLogStdMax);
      clamped[r][j] = raw_ls[j] <= kLogStdMin || raw_ls[j] >= kLogStdMax;
      u[j] = mean[j] + std::exp(ls[j]) * rng.normal();
      a(r, j) = std::tanh(u[j]);
    }
    mean_logp += squashed_log_prob(mean, ls, u) / n;
    sg[r] = squashed_backward(mean, ls, u);
  }

  // min(Q1,Q2) and its gradient w.r.t. the action, routed through whichever
  // critic attains the min per row.
  Mat in = concat_cols(batch.obs, a);
  ForwardCache c1, c2;
  Mat q1v = forward_batch(q1_, in, &c1);
  Mat q2v = forward_batch(q2_, in, &c2);
  double mean_qmin = 0.0;
  Mat d1(n, 1), d2(n, 1);
  for (int r = 0; r < n; ++r) {
    const bool pick1 = q1v(r, 0) <= q2v(r, 0);
    mean_qmin += std::min(q1v(r, 0), q2v(r, 0)) / n;
    d1(r, 0) = pick1 ? -1.0 / n : 0.0;  // ∂loss/∂q_min = −1/n
    d2(r, 0) = pick1 ? 0.0 : -1.0 / n;
  }
  Mat din1, din2;
  backward(q1_, c1, d1, &din1);
  backward(q2_, c2, d2, &din2);

  // Assemble ∂loss/∂(policy output) and backprop through the policy trunk.
  Mat d_pol(n, 2 * d);
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < d; ++j) {
      const double dloss_da = din1(r, obs_dim_ + j) + din2(r, obs_dim_ + j);
      d_pol(r, j) = cfg_.alpha / n * sg[r].dlogp_dmean[j] + dloss_da * sg[r].da_dmean[j];
      double g_ls = cfg_.alpha / n * sg[r].dlogp_dlogstd[j] + dloss_da * sg[r].da_dlogstd[j];
      d_pol(r, d + j) = clamped[r][j] ? 0.0 : g_ls;
    }
  }
  loss = cfg_.alpha * mean_logp - mean_qmin;
  if (!std::isfinite(loss)) throw NumericError("policy loss non-finite");
  return backward(policy_, pol_cache, d_pol);
}

double SacAgent::policy_update(const Batch& batch, Rng& rng) {
  double loss = 0.0;
  Gradients g = policy_gradient(batch, rng, loss);
  adam_step(policy_, g, opt_policy_, cfg_.lr);
  return loss;
}

void SacAgent::polyak_update() {
  auto blend = [&](Network& targ, const Network& online) {
    for (size_t k = 0; k < targ.layers.size(); ++k) {
      for (size_t i = 0; i < targ.layers[k].w.data.size(); ++i)
        targ.layers[k].w.data[i] =
            (1.0 - cfg_.tau) * targ.layers[k].w.data[i] + cfg_.tau * online.layers[k].w.data[i];
      for (size_t i = 0; i < targ.layers[k].b.size(); ++i)
        targ.layers[k].b[i] =
            (1.0 - cfg_.tau) * targ.layers[k].b[i] + cfg_.tau * online.layers[k].b[i];
    }
  };
  blend(q1_targ_, q1_);
  blend(q2_targ_, q2_);
}

nlohmann::json SacAgent::to_json() const {
  nlohmann::json j;
  j["config"] = {{"gamma", cfg_.gamma}, {"alpha", cfg_.alpha}, {"tau", cfg_.tau},
                 {"lr", cfg_.lr},       {"batch", cfg_.batch}, {"hidden", cfg_.hidden}};
  j["obs_dim"] = obs_dim_;
  j["action_dim"] = action_dim_;
  j["policy"] = network_to_json(policy_);
  j["q1"] = network_to_json(q1_);
  j["q2"] = network_to_json(q2_);
  j["q1_targ"] = network_to_json(q1_targ_);
  j["q2_targ"] = network_to_json(q2_targ_);
  j["opt_policy"] = opt_state_to_json(opt_policy_);
  j["opt_q1"] = opt_state_to_json(opt_q1_);
  j["opt_q2"] = opt_state_to_json(opt_q2_);
  return j;
}

SacAgent SacAgent::from_json(const nlohmann::json& j) {
  SacAgent a;
  const auto& jc = j.at("config");
  a.cfg_.gamma = jc.at("gamma").get<double>();
  a.cfg_.alpha = jc.at("alpha").get<double>();
  a.cfg_.tau = jc.at("tau").get<double>();
  a.cfg_.lr = jc.at("lr").get<double>();
  a.cfg_.batch = jc.at("batch").get<int>();
  a.cfg_.hidden = jc.at("hidden").get<std::vector<int>>();
  a.obs_dim_ = j.at("obs_dim").get<int>();
  a.action_dim_ = j.at("action_dim").get<int>();
  a.policy_ = network_from_json(j.at("policy"));
  a.q1_ = network_from_json(j.at("q1"));
  a.q2_ = network_from_json(j.at("q2"));
  a.q1_targ_ = network_from_json(j.at("q1_targ"));
  a.q2_targ_ = network_from_json(j.at("q2_targ"));
  a.opt_policy_ = opt_state_from_json(j.at("opt_policy"), a.policy_);
  a.opt_q1_ = opt_state_from_json(j.at("opt_q1"), a.q1_);
  a.opt_q2_ = opt_state_from_json(j.at("opt_q2"), a.q2_);
  return a;
}

}  // namespace dars
