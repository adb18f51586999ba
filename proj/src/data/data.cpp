#include <cmath>

#include "dars/common/errors.hpp"
#include "dars/data/replay.hpp"
#include "dars/data/rollout.hpp"
#include "dars/data/transition.hpp"

namespace dars {

void export_csv(std::ostream& out, const std::vector<Transition>& transitions) {
  out << "episode_id,t,sx,sy,ax,ay,nx,ny,omega,domain\n";
  for (const auto& tr : transitions) {
    if (tr.s.size() != 2 || tr.a.size() != 2)
      throw ShapeError("export_csv: expects 2-D states and actions");
    out << tr.episode_id << ',' << tr.t << ',' << tr.s[0] << ',' << tr.s[1] << ',' << tr.a[0]
        << ',' << tr.a[1] << ',' << tr.s_next[0] << ',' << tr.s_next[1] << ',' << tr.omega << ','
        << domain_name(tr.domain) << '\n';
  }
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ShapeError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition tr) {
  if (storage_.size() == capacity_) storage_.pop_front();
  storage_.push_back(std::move(tr));
}

void ReplayBuffer::push(const std::vector<Transition>& trs) {
  for (const auto& tr : trs) push(tr);
}

std::vector<Transition> ReplayBuffer::sample(size_t batch, Rng& rng) const {
  if (storage_.size() < batch)
    throw ShapeError("ReplayBuffer::sample: buffer holds " + std::to_string(storage_.size()) +
                     " < batch " + std::to_string(batch));
  std::vector<Transition> out;
  out.reserve(batch);
  for (size_t i = 0; i < batch; ++i)
    out.push_back(storage_[rng.uniform_int(static_cast<int>(storage_.size()))]);
  return out;
}

std::vector<Transition> rollout(const PolicyFn& policy, const ContinuousEnv& env, const Vec& cond,
                                int omega, Domain domain, long episode_id, Rng& rng) {
  std::vector<Transition> episode;
  episode.reserve(env.horizon());
  Vec s = env.reset(rng);
  for (int t = 0; t < env.horizon(); ++t) {
    Vec obs = s;
    obs.insert(obs.end(), cond.begin(), cond.end());
    Vec a = policy(obs, rng);
    if (static_cast<int>(a.size()) != env.action_dim())
      throw ShapeError("rollout: policy returned wrong action dim");
    for (double v : a)
      if (!std::isfinite(v))
        throw NumericError("rollout: non-finite policy output at step " + std::to_string(t));
    Vec s_next = env.step(s, a, rng);
    Transition tr;
    tr.s = s;
    tr.a = a;
    tr.s_next = s_next;
    tr.omega = omega;
    tr.cond = cond;
    tr.domain = domain;
    tr.t = t;
    tr.episode_id = episode_id;
    episode.push_back(std::move(tr));
    s = std::move(s_next);
  }
  return episode;
}

}  // namespace dars
