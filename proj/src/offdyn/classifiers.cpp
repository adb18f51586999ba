#include "dars/offdyn/classifiers.hpp"

#include <algorithm>
#include <cmath>

#include "dars/common/errors.hpp"

namespace dars {

DomainClassifiers::DomainClassifiers(int state_dim, int action_dim,
                                     const std::vector<int>& hidden, Rng& rng,
                                     double input_noise_scale, double clip)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      input_noise_scale_(input_noise_scale),
      clip_(clip) {
  if (input_noise_scale < 0.0 || clip <= 0.0)
    throw ShapeError("DomainClassifiers: need noise >= 0 and clip > 0");
  sas_ = make_mlp(2 * state_dim + action_dim, hidden, 2, Act::relu, rng);
  sa_ = make_mlp(state_dim + action_dim, hidden, 2, Act::relu, rng);
  opt_sas_ = make_opt_state(sas_);
  opt_sa_ = make_opt_state(sa_);
}

namespace {

// Rows: batch_source then batch_target; columns (s, a) or (s, a, s').
Mat build_inputs(const std::vector<Transition>& src, const std::vector<Transition>& tgt,
                 int state_dim, int action_dim, bool with_next) {
  const int cols = state_dim + action_dim + (with_next ? state_dim : 0);
  Mat x(static_cast<int>(src.size() + tgt.size()), cols);
  int r = 0;
  for (const auto* batch : {&src, &tgt}) {
    for (const auto& tr : *batch) {
      int c = 0;
      for (int i = 0; i < state_dim; ++i) x(r, c++) = tr.s[i];
      for (int i = 0; i < action_dim; ++i) x(r, c++) = tr.a[i];
      if (with_next)
        for (int i = 0; i < state_dim; ++i) x(r, c++) = tr.s_next[i];
      ++r;
    }
  }
  return x;
}

void add_input_noise(Mat& x, double scale, Rng& rng) {
  if (scale <= 0.0 || x.rows < 2) return;
  for (int c = 0; c < x.cols; ++c) {
    double mean = 0.0, sq = 0.0;
    for (int r = 0; r < x.rows; ++r) mean += x(r, c);
    mean /= x.rows;
    for (int r = 0; r < x.rows; ++r) {
      const double d = x(r, c) - mean;
      sq += d * d;
    }
    const double std_c = std::sqrt(sq / x.rows);
    if (std_c == 0.0) continue;
    for (int r = 0; r < x.rows; ++r) x(r, c) += scale * std_c * rng.normal();
  }
}

// Mean cross-entropy against domain labels (first half source = class 0).
double binary_ce_step(Network& net, OptState& opt, const Mat& x, int n_source, double lr) {
  double loss = 0.0;
  const int n = x.rows;
  Gradients g = grad(net, x, [&](const Mat& out, Mat& d_out) {
    double nll = 0.0;
    for (int r = 0; r < n; ++r) {
      const int label = r < n_source ? 0 : 1;
      const double mx = std::max(out(r, 0), out(r, 1));
      const double lse = std::exp(out(r, 0) - mx) + std::exp(out(r, 1) - mx);
      nll -= (out(r, label) - mx - std::log(lse)) / n;
      for (int c = 0; c < 2; ++c) {
        const double p = std::exp(out(r, c) - mx) / lse;
        d_out(r, c) = (p - (c == label ? 1.0 : 0.0)) / n;
      }
    }
    return loss = nll;
  });
  adam_step(net, g, opt, lr);
  return loss;
}

}  // namespace

std::pair<double, double> DomainClassifiers::update(const std::vector<Transition>& batch_source,
                                                    const std::vector<Transition>& batch_target,
                                                    Rng& rng, double lr) {
  if (batch_source.empty() || batch_target.empty())
    throw ShapeError("classifier update: empty batch");
  if (batch_source.size() != batch_target.size())
    throw ShapeError("classifier update: batches must be balanced");
  const int n_source = static_cast<int>(batch_source.size());

  Mat x_sas = build_inputs(batch_source, batch_target, state_dim_, action_dim_, true);
  Mat x_sa = build_inputs(batch_source, batch_target, state_dim_, action_dim_, false);
  add_input_noise(x_sas, input_noise_scale_, rng);
  add_input_noise(x_sa, input_noise_scale_, rng);

  const double loss_sas = binary_ce_step(sas_, opt_sas_, x_sas, n_source, lr);
  const double loss_sa = binary_ce_step(sa_, opt_sa_, x_sa, n_source, lr);
  return {loss_sas, loss_sa};
}

double DomainClassifiers::delta_r(const Vec& s, const Vec& a, const Vec& s_next) const {
  Vec in_sas = s;
  in_sas.insert(in_sas.end(), a.begin(), a.end());
  in_sas.insert(in_sas.end(), s_next.begin(), s_next.end());
  Vec in_sa = s;
  in_sa.insert(in_sa.end(), a.begin(), a.end());

  auto log_odds = [](Vec logits) {
    for (double& v : logits) v = std::clamp(v, -kLogitClamp, kLogitClamp);
    return logits[0] - logits[1];  // log q(source|·)/q(target|·)
  };
  const double dr = log_odds(forward(sas_, in_sas)) - log_odds(forward(sa_, in_sa));
  return std::clamp(dr, -clip_, clip_);
}

nlohmann::json DomainClassifiers::to_json() const {
  nlohmann::json j;
  j["state_dim"] = state_dim_;
  j["action_dim"] = action_dim_;
  j["input_noise_scale"] = input_noise_scale_;
  j["clip"] = clip_;
  j["sas"] = network_to_json(sas_);
  j["sa"] = network_to_json(sa_);
  j["opt_sas"] = opt_state_to_json(opt_sas_);
  j["opt_sa"] = opt_state_to_json(opt_sa_);
  return j;
}

DomainClassifiers DomainClassifiers::from_json(const nlohmann::json& j) {
  DomainClassifiers c;
  c.state_dim_ = j.at("state_dim").get<int>();
  c.action_dim_ = j.at("action_dim").get<int>();
  c.input_noise_scale_ = j.at("input_noise_scale").get<double>();
  c.clip_ = j.at("clip").get<double>();
  c.sas_ = network_from_json(j.at("sas"));
  c.sa_ = network_from_json(j.at("sa"));
  c.opt_sas_ = opt_state_from_json(j.at("opt_sas"), c.sas_);
  c.opt_sa_ = opt_state_from_json(j.at("opt_sa"), c.sa_);
  return c;
}

double exact_delta_r(const TabularMDP& source, const TabularMDP& target, int s, int a, int s_next,
                     double clip) {
  if (s < 0 || s >= source.n_states || a < 0 || a >= source.n_actions || s_next < 0 ||
      s_next >= source.n_states)
    throw ShapeError("exact_delta_r: index out of range");
  const double ps = source.P[s][a][s_next];
  const double pt = target.P[s][a][s_next];
  if (ps <= 0.0)
    throw ShapeError("exact_delta_r: transition impossible in source (assumption violated)");
  if (pt <= 0.0) return clip;
  return std::log(ps) - std::log(pt);
}

}  // namespace dars
