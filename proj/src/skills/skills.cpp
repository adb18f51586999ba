#include <algorithm>
#include <cmath>

#include "dars/approx/squashed_gaussian.hpp"
#include "dars/common/errors.hpp"
#include "dars/skills/discriminator.hpp"
#include "dars/skills/latent.hpp"
#include "dars/skills/relabel.hpp"

namespace dars {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;
}

int sample_latent(const LatentSpec& spec, Rng& rng) {
  if (spec.kind == LatentSpec::Kind::dirac) return 0;
  if (spec.K < 2) throw ShapeError("sample_latent: categorical prior needs K >= 2");
  return rng.uniform_int(spec.K);
}

Vec encode_latent(const LatentSpec& spec, int omega) {
  if (spec.kind == LatentSpec::Kind::dirac) return {};
  if (omega < 0 || omega >= spec.K) throw ShapeError("encode_latent: omega out of range");
  Vec v(spec.K, 0.0);
  v[omega] = 1.0;
  return v;
}

int latent_cond_dim(const LatentSpec& spec) {
  return spec.kind == LatentSpec::Kind::dirac ? 0 : spec.K;
}

std::vector<Vec> interpolate_latents(const LatentSpec& spec, int omega1, int omega2, int n) {
  if (spec.kind != LatentSpec::Kind::categorical)
    throw ShapeError("interpolate_latents: categorical mode only");
  if (n < 2) throw ShapeError("interpolate_latents: need n >= 2");
  Vec e1 = encode_latent(spec, omega1);
  Vec e2 = encode_latent(spec, omega2);
  std::vector<Vec> blends;
  blends.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double lambda = 1.0 - static_cast<double>(i) / (n - 1);  // ω1 → ω2
    Vec b(spec.K);
    for (int k = 0; k < spec.K; ++k) b[k] = lambda * e1[k] + (1.0 - lambda) * e2[k];
    blends.push_back(std::move(b));
  }
  return blends;
}

Discriminator::Discriminator(const LatentSpec& spec, int state_dim,
                             const std::vector<int>& hidden, Rng& rng)
    : spec_(spec), state_dim_(state_dim) {
  if (spec.kind == LatentSpec::Kind::categorical) {
    net_ = make_mlp(state_dim, hidden, spec.K, Act::relu, rng);
  } else {
    // Constant-input net: the learned output is the (mean, log_std) of a
    // diagonal Gaussian over states.
    net_ = make_mlp(1, hidden, 2 * state_dim, Act::relu, rng);
    net_.heads["mean"] = Head{0, state_dim};
    net_.heads["log_std"] = Head{state_dim, state_dim};
  }
  opt_ = make_opt_state(net_);
}

Vec Discriminator::posterior(const Vec& s_next) const {
  if (spec_.kind != LatentSpec::Kind::categorical)
    throw ShapeError("posterior: categorical mode only");
  Vec logits = forward(net_, s_next);
  double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : logits) v /= z;
  return logits;
}

// Gaussian log-density of the dirac-mode estimator at a state, given the
// network output row [mean, log_std].
static double dirac_log_density(const Vec& out, const Vec& s, int d) {
  double lp = 0.0;
  for (int i = 0; i < d; ++i) {
    const double ls = std::clamp(out[d + i], kLogStdMin, kLogStdMax);
    const double z = (s[i] - out[i]) / std::exp(ls);
    lp += -0.5 * z * z - ls - kLogSqrt2Pi;
  }
  return lp;
}

double Discriminator::probing_reward(int omega, const Vec& s_next) const {
  if (spec_.kind == LatentSpec::Kind::categorical) {
    Vec logits = forward(net_, s_next);
    double mx = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double v : logits) lse += std::exp(v - mx);
    const double log_post = logits[omega] - mx - std::log(lse);
    return std::max(log_post, kRewardFloor);
  }
  return dirac_log_density(forward(net_, {1.0}), s_next, state_dim_);
}

double Discriminator::update(const std::vector<Transition>& batch, double lr) {
  if (batch.empty()) throw ShapeError("discriminator update: empty batch");
  const int n = static_cast<int>(batch.size());

  double loss = 0.0;
  if (spec_.kind == LatentSpec::Kind::categorical) {
    Mat x(n, state_dim_);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < state_dim_; ++c) x(r, c) = batch[r].s_next[c];
    Gradients g = grad(net_, x, [&](const Mat& out, Mat& d_out) {
      double nll = 0.0;
      for (int r = 0; r < n; ++r) {
        double mx = out(r, 0);
        for (int c = 1; c < spec_.K; ++c) mx = std::max(mx, out(r, c));
        double lse = 0.0;
        for (int c = 0; c < spec_.K; ++c) lse += std::exp(out(r, c) - mx);
        const int label = batch[r].omega;
        nll -= (out(r, label) - mx - std::log(lse)) / n;
        for (int c = 0; c < spec_.K; ++c) {
          const double p = std::exp(out(r, c) - mx) / lse;
          d_out(r, c) = (p - (c == label ? 1.0 : 0.0)) / n;
        }
      }
      return loss = nll;
    });
    adam_step(net_, g, opt_, lr);
    return loss;
  }

  // Dirac mode: Gaussian NLL of the batch states under the learned density.
  Mat x(n, 1);
  for (auto& v : x.data) v = 1.0;
  Gradients g = grad(net_, x, [&](const Mat& out, Mat& d_out) {
    double nll = 0.0;
    const int d = state_dim_;
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < d; ++i) {
        const double raw_ls = out(r, d + i);
        const double ls = std::clamp(raw_ls, kLogStdMin, kLogStdMax);
        const double sigma = std::exp(ls);
        const double z = (batch[r].s_next[i] - out(r, i)) / sigma;
        nll += (0.5 * z * z + ls + kLogSqrt2Pi) / n;
        d_out(r, i) = -z / sigma / n;
        const double d_ls = (1.0 - z * z) / n;
        d_out(r, d + i) = (raw_ls > kLogStdMin && raw_ls < kLogStdMax) ? d_ls : 0.0;
      }
    }
    return loss = nll;
  });
  adam_step(net_, g, opt_, lr);
  return loss;
}

Vec relabel(const RelabelStrategy& strategy, const LatentSpec& latent, int omega,
            const std::vector<Transition>& probing_traj) {
  if (strategy.kind == RelabelStrategy::Kind::latent_as_goal)
    return encode_latent(latent, omega);
  if (probing_traj.empty()) throw ShapeError("relabel: final_state needs a completed trajectory");
  return probing_traj.back().s_next;
}

int goal_cond_dim(const RelabelStrategy& strategy, const LatentSpec& latent, int state_dim) {
  return strategy.kind == RelabelStrategy::Kind::latent_as_goal ? latent_cond_dim(latent)
                                                                : state_dim;
}

nlohmann::json Discriminator::to_json() const {
  nlohmann::json j;
  j["kind"] = spec_.kind == LatentSpec::Kind::categorical ? "categorical" : "dirac";
  j["K"] = spec_.K;
  j["state_dim"] = state_dim_;
  j["net"] = network_to_json(net_);
  j["opt"] = opt_state_to_json(opt_);
  return j;
}

Discriminator Discriminator::from_json(const nlohmann::json& j) {
  Discriminator d;
  d.spec_.kind = j.at("kind").get<std::string>() == "dirac" ? LatentSpec::Kind::dirac
                                                            : LatentSpec::Kind::categorical;
  d.spec_.K = j.at("K").get<int>();
  d.state_dim_ = j.at("state_dim").get<int>();
  d.net_ = network_from_json(j.at("net"));
  d.opt_ = opt_state_from_json(j.at("opt"), d.net_);
  return d;
}

}  // namespace dars
