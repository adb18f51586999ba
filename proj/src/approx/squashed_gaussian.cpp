#include "dars/approx/squashed_gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "dars/common/errors.hpp"

namespace dars {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // 0.5*log(2*pi)
}

void clamp_log_std(Vec& log_std) {
  for (auto& v : log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
}

double squashed_log_prob(const Vec& mean, const Vec& log_std, const Vec& u) {
  if (mean.size() != log_std.size() || mean.size() != u.size())
    throw ShapeError("squashed_log_prob: dim mismatch");
  double lp = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double sigma = std::exp(log_std[i]);
    const double z = (u[i] - mean[i]) / sigma;
    const double t = std::tanh(u[i]);
    lp += -0.5 * z * z - log_std[i] - kLogSqrt2Pi - std::log(1.0 - t * t + kTanhEps);
  }
  return lp;
}

SquashedSample sample_squashed_gaussian(const Vec& mean, const Vec& log_std, Rng& rng) {
  if (mean.size() != log_std.size())
    throw ShapeError("sample_squashed_gaussian: dim mismatch");
  Vec ls = log_std;
  clamp_log_std(ls);
  SquashedSample s;
  s.u.resize(mean.size());
  s.action.resize(mean.size());
  for (size_t i = 0; i < mean.size(); ++i) {
    s.u[i] = mean[i] + std::exp(ls[i]) * rng.normal();
    double a = std::tanh(s.u[i]);
    if (a >= 1.0) a = std::nextafter(1.0, 0.0);
    if (a <= -1.0) a = std::nextafter(-1.0, 0.0);
    s.action[i] = a;
  }
  s.log_prob = squashed_log_prob(mean, ls, s.u);
  return s;
}

Vec squashed_mean_action(const Vec& mean) {
  Vec a(mean.size());
  for (size_t i = 0; i < mean.size(); ++i) a[i] = std::tanh(mean[i]);
  return a;
}

SquashedGrad squashed_backward(const Vec& mean, const Vec& log_std, const Vec& u) {
  if (mean.size() != log_std.size() || mean.size() != u.size())
    throw ShapeError("squashed_backward: dim mismatch");
  const size_t d = mean.size();
  SquashedGrad g;
  g.dlogp_dmean.resize(d);
  g.dlogp_dlogstd.resize(d);
  g.da_dmean.resize(d);
  g.da_dlogstd.resize(d);
  for (size_t i = 0; i < d; ++i) {
    const double t = std::tanh(u[i]);
    const double one_m_t2 = 1.0 - t * t;
    // d(-log(1-t^2+eps))/du: the Gaussian term is constant at fixed noise.
    const double corr = 2.0 * t * one_m_t2 / (one_m_t2 + kTanhEps);
    const double du_dls = u[i] - mean[i];  // = sigma * eps
    g.dlogp_dmean[i] = corr;
    g.dlogp_dlogstd[i] = -1.0 + corr * du_dls;
    g.da_dmean[i] = one_m_t2;
    g.da_dlogstd[i] = one_m_t2 * du_dls;
  }
  return g;
}

}  // namespace dars
