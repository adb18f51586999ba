#include "dars/trainer/trainer.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "dars/analysis/eval.hpp"
#include "dars/common/errors.hpp"

namespace dars {

nlohmann::json metric_to_json(const MetricRecord& m) {
  // wall_clock_s stays off the line: metrics files must be identical across
  // reruns of the same seed. Timing goes to the run_info sidecar instead.
  return nlohmann::json{{"iter", m.iter},
                        {"source_steps", m.source_steps},
                        {"target_steps", m.target_steps},
                        {"probing_reward_mean", m.probing_reward_mean},
                        {"disc_accuracy", m.disc_accuracy},
                        {"delta_r_abs_mean", m.delta_r_abs_mean},
                        {"eval_source", m.eval_source},
                        {"eval_target", m.eval_target}};
}

namespace {

SacAgent make_agent(int obs_dim, int action_dim, const SacConfig& cfg, const Rng& master,
                    const char* stream) {
  Rng r = master.stream(stream);
  return SacAgent(obs_dim, action_dim, cfg, r);
}

Discriminator make_disc(const TrainerConfig& cfg, int state_dim, const Rng& master) {
  Rng r = master.stream("init_disc");
  return Discriminator(cfg.latent, state_dim, cfg.disc_hidden, r);
}

std::vector<Vec> make_eval_goals(int n, int state_dim, const Rng& master) {
  Rng r = master.stream("eval_goals");
  std::vector<Vec> goals(n, Vec(state_dim));
  for (auto& g : goals)
    for (auto& v : g) v = r.uniform();
  return goals;
}

}  // namespace

Trainer::Trainer(TrainerConfig cfg, std::uint64_t seed)
    : Trainer(cfg, seed, make_pair(cfg.pair)) {}

Trainer::Trainer(TrainerConfig cfg, std::uint64_t seed, EnvPair pair)
    : cfg_((validate(cfg), std::move(cfg))),
      pair_(std::move(pair)),
      master_(seed),
      rng_latent_(master_.stream("latent")),
      roll_mu_(master_.stream("roll_mu")),
      roll_theta_(master_.stream("roll_theta")),
      roll_target_(master_.stream("roll_target")),
      sac_mu_(master_.stream("sac_mu")),
      sac_theta_(master_.stream("sac_theta")),
      sample_mu_(master_.stream("sample_mu")),
      sample_theta_(master_.stream("sample_theta")),
      sample_disc_(master_.stream("sample_disc")),
      sample_cls_(master_.stream("sample_cls")),
      cls_noise_(master_.stream("cls_noise")),
      probing_(make_agent(pair_.state_dim + latent_cond_dim(cfg_.latent), pair_.action_dim,
                          cfg_.sac, master_, "init_mu")),
      goal_(make_agent(pair_.state_dim + goal_cond_dim(cfg_.relabel, cfg_.latent, pair_.state_dim),
                       pair_.action_dim, cfg_.sac, master_, "init_theta")),
      disc_(make_disc(cfg_, pair_.state_dim, master_)),
      buf_probing_(cfg_.cap_probing),
      buf_source_(cfg_.cap_source),
      buf_target_(cfg_.cap_target),
      eval_goals_(make_eval_goals(cfg_.eval_episodes, pair_.state_dim, master_)) {
  if (uses_classifiers()) {
    Rng r = master_.stream("init_cls");
    cls_.emplace(pair_.state_dim, pair_.action_dim, cfg_.cls_hidden, r, cfg_.cls_input_noise,
                 cfg_.delta_r_clip);
  }
  updates_per_iter_ =
      std::max(1, static_cast<int>(std::lround(cfg_.updates_per_step * pair_.T)));
}

bool Trainer::uses_classifiers() const {
  return cfg_.variant == Variant::dars || cfg_.variant == Variant::dars_reuse ||
         cfg_.variant == Variant::darc_like || cfg_.variant == Variant::extension;
}

bool Trainer::trains_in_target() const {
  return cfg_.variant == Variant::gpim_target || cfg_.variant == Variant::gpim_target_x10 ||
         (cfg_.variant == Variant::finetune && phase_ == 2);
}

const ContinuousEnv& Trainer::rollout_env() const {
  return trains_in_target() ? *pair_.target : *pair_.source;
}

Domain Trainer::rollout_domain() const {
  return trains_in_target() ? Domain::target : Domain::source;
}

double Trainer::reward_probing(const Transition& tr) const {
  double r = disc_.probing_reward(tr.omega, tr.s_next);
  // Appendix-C extension: the dynamics penalty moves onto the probing policy.
  if (cfg_.variant == Variant::extension && cls_ && cfg_.beta != 0.0)
    r -= cfg_.beta * cls_->delta_r(tr.s, tr.a, tr.s_next);
  return r;
}

double Trainer::reward_goal(const Transition& tr) const {
  double r;
  if (cfg_.variant == Variant::darc_like) {
    // External goal reward: negative squared distance to the stored goal.
    double d2 = 0.0;
    for (size_t k = 0; k < tr.cond.size(); ++k) {
      const double d = tr.s_next[k] - tr.cond[k];
      d2 += d * d;
    }
    r = -d2;
  } else {
    r = disc_.probing_reward(tr.omega, tr.s_next);
  }
  const bool penalized = cfg_.variant == Variant::dars || cfg_.variant == Variant::dars_reuse ||
                         cfg_.variant == Variant::darc_like;
  if (penalized && cls_ && cfg_.beta != 0.0) r -= cfg_.beta * cls_->delta_r(tr.s, tr.a, tr.s_next);
  return r;
}

SacAgent::Batch Trainer::make_batch(const std::vector<Transition>& trs,
                                    bool probing_reward) const {
  const int n = static_cast<int>(trs.size());
  const int sd = static_cast<int>(trs[0].s.size());
  const int cd = static_cast<int>(trs[0].cond.size());
  const int ad = static_cast<int>(trs[0].a.size());
  SacAgent::Batch b;
  b.obs = Mat(n, sd + cd);
  b.obs_next = Mat(n, sd + cd);
  b.action = Mat(n, ad);
  b.reward.resize(n);
  for (int i = 0; i < n; ++i) {
    const Transition& tr = trs[i];
    for (int k = 0; k < sd; ++k) {
      b.obs(i, k) = tr.s[k];
      b.obs_next(i, k) = tr.s_next[k];
    }
    for (int k = 0; k < cd; ++k) {
      b.obs(i, sd + k) = tr.cond[k];
      b.obs_next(i, sd + k) = tr.cond[k];
    }
    for (int k = 0; k < ad; ++k) b.action(i, k) = tr.a[k];
    b.reward[i] = probing_reward ? reward_probing(tr) : reward_goal(tr);
  }
  return b;
}

void Trainer::sac_updates(SacAgent& agent, const ReplayBuffer& buf, bool probing, Rng& sample_rng,
                          Rng& sac_rng) {
  for (int k = 0; k < updates_per_iter_; ++k) {
    if (buf.size() < static_cast<size_t>(cfg_.sac.batch)) return;
    const auto trs = buf.sample(cfg_.sac.batch, sample_rng);
    const auto batch = make_batch(trs, probing);
    agent.critic_update(batch, sac_rng);
    agent.policy_update(batch, sac_rng);
    agent.polyak_update();
  }
}

void Trainer::sac_updates_on_target_logq(SacAgent& agent) {
  // dars_reuse: extra goal-policy updates on target batches with the plain
  // discriminator reward (probing_reward without the extension branch hits
  // exactly log q_φ here) — never Δr-modified on target data.
  sac_updates(agent, buf_target_, /*probing=*/true, sample_theta_, sac_theta_);
}

void Trainer::iterate() {
  const ContinuousEnv& env = rollout_env();
  const Domain dom = rollout_domain();
  const bool target_env = trains_in_target();
  const size_t batch = static_cast<size_t>(cfg_.sac.batch);

  // 1. Sample a skill and collect one probing episode.
  const int omega = sample_latent(cfg_.latent, rng_latent_);
  const Vec z = encode_latent(cfg_.latent, omega);
  const auto pi_mu = probing_policy(false);
  const auto probe_traj = rollout(pi_mu, env, z, omega, dom, episode_counter_++, roll_mu_);
  buf_probing_.push(probe_traj);
  if (target_env)
    target_steps_ += env.horizon();
  else
    probing_steps_ += env.horizon();

  // 2. Discriminator updates on probing batches.
  for (int k = 0; k < updates_per_iter_; ++k)
    if (buf_probing_.size() >= batch)
      disc_.update(buf_probing_.sample(batch, sample_disc_), cfg_.sac.lr);

  // Rollout-level metrics with the reward the probing learner sees now.
  double reward_sum = 0.0;
  int disc_hits = 0;
  for (const auto& tr : probe_traj) {
    reward_sum += reward_probing(tr);
    if (cfg_.latent.kind == LatentSpec::Kind::categorical) {
      const Vec post = disc_.posterior(tr.s_next);
      int am = 0;
      for (int k = 1; k < cfg_.latent.K; ++k)
        if (post[k] > post[am]) am = k;
      disc_hits += am == tr.omega;
    }
  }
  last_probe_reward_ = reward_sum / probe_traj.size();
  last_disc_acc_ = cfg_.latent.kind == LatentSpec::Kind::categorical
                       ? static_cast<double>(disc_hits) / probe_traj.size()
                       : 0.0;

  // 3. Probing policy SAC updates.
  sac_updates(probing_, buf_probing_, /*probing=*/true, sample_mu_, sac_mu_);

  // 4. Relabel and collect one goal-conditioned episode.
  const Vec g = relabel(cfg_.relabel, cfg_.latent, omega, probe_traj);
  const auto pi_th = goal_policy(false);
  const auto goal_traj = rollout(pi_th, env, g, omega, dom, episode_counter_++, roll_theta_);
  buf_source_.push(goal_traj);
  if (target_env)
    target_steps_ += env.horizon();
  else
    source_steps_ += env.horizon();

  // 5. Every R-th iteration: a target-domain episode with the same
  //    conditioning — goal policy normally, probing policy in the extension.
  if (!target_env && uses_classifiers() && iter_ % cfg_.ratio_R == 0) {
    const bool by_probe = cfg_.variant == Variant::extension;
    const auto traj_t = rollout(by_probe ? pi_mu : pi_th, *pair_.target, by_probe ? z : g, omega,
                                Domain::target, episode_counter_++, roll_target_);
    buf_target_.push(traj_t);
    target_steps_ += pair_.T;
  }

  // 6. Domain classifiers on balanced batches. The extension trains them on
  //    probing-policy data from both domains.
  if (cls_ && !target_env) {
    const ReplayBuffer& src = cfg_.variant == Variant::extension ? buf_probing_ : buf_source_;
    for (int k = 0; k < updates_per_iter_; ++k)
      if (src.size() >= batch && buf_target_.size() >= batch)
        cls_->update(src.sample(batch, sample_cls_), buf_target_.sample(batch, sample_cls_),
                     cls_noise_, cfg_.sac.lr);
  }

  // Penalty magnitude on the episode its consumer just produced.
  if (cls_) {
    const auto& traj = cfg_.variant == Variant::extension ? probe_traj : goal_traj;
    double abs_sum = 0.0;
    for (const auto& tr : traj) abs_sum += std::abs(cls_->delta_r(tr.s, tr.a, tr.s_next));
    last_delta_r_abs_ = abs_sum / traj.size();
  } else {
    last_delta_r_abs_ = 0.0;
  }

  // 7. Goal policy SAC updates on source-buffer batches only.
  sac_updates(goal_, buf_source_, /*probing=*/false, sample_theta_, sac_theta_);

  // 8. dars_reuse additionally trains the goal policy on target batches.
  if (cfg_.variant == Variant::dars_reuse) sac_updates_on_target_logq(goal_);

  ++iter_;
}

MetricRecord Trainer::evaluate() {
  MetricRecord m;
  m.iter = iter_;
  m.source_steps = source_steps_;
  m.target_steps = target_steps_;
  m.probing_reward_mean = last_probe_reward_;
  m.disc_accuracy = last_disc_acc_;
  m.delta_r_abs_mean = last_delta_r_abs_;
  Rng er = master_.stream("eval_" + std::to_string(iter_));
  const auto pol = goal_policy(true);
  if (cfg_.relabel.kind == RelabelStrategy::Kind::latent_as_goal) {
    const int nps = std::max(1, cfg_.eval_episodes / cfg_.latent.K);
    m.eval_source = skill_accuracy(pol, *pair_.source, disc_, cfg_.latent, nps, er);
    m.eval_target = skill_accuracy(pol, *pair_.target, disc_, cfg_.latent, nps, er);
  } else {
    m.eval_source = eval_goal_reaching(pol, *pair_.source, eval_goals_, cfg_.eval_episodes, er);
    m.eval_target = eval_goal_reaching(pol, *pair_.target, eval_goals_, cfg_.eval_episodes, er);
  }
  return m;
}

nlohmann::json Trainer::checkpoint() const {
  nlohmann::json j;
  j["iter"] = iter_;
  j["phase"] = phase_;
  j["source_steps"] = source_steps_;
  j["target_steps"] = target_steps_;
  j["probing_steps"] = probing_steps_;
  j["episode_counter"] = episode_counter_;
  j["config"] = trainer_config_to_json(cfg_);
  j["probing_agent"] = probing_.to_json();
  j["goal_agent"] = goal_.to_json();
  j["disc"] = disc_.to_json();
  j["classifiers"] = cls_ ? cls_->to_json() : nlohmann::json();
  return j;
}

void Trainer::restore(const nlohmann::json& ckpt) {
  SacAgent probing = SacAgent::from_json(ckpt.at("probing_agent"));
  SacAgent goal = SacAgent::from_json(ckpt.at("goal_agent"));
  if (probing.obs_dim() != probing_.obs_dim() || goal.obs_dim() != goal_.obs_dim() ||
      probing.action_dim() != probing_.action_dim() || goal.action_dim() != goal_.action_dim())
    throw ShapeError("restore: checkpoint dimensions do not match this configuration");
  probing_ = std::move(probing);
  goal_ = std::move(goal);
  disc_ = Discriminator::from_json(ckpt.at("disc"));
  if (cls_ && ckpt.contains("classifiers") && !ckpt.at("classifiers").is_null())
    cls_ = DomainClassifiers::from_json(ckpt.at("classifiers"));
  iter_ = ckpt.value("iter", 0L);
  phase_ = ckpt.value("phase", 1);
  source_steps_ = ckpt.value("source_steps", 0L);
  target_steps_ = ckpt.value("target_steps", 0L);
  probing_steps_ = ckpt.value("probing_steps", 0L);
  episode_counter_ = ckpt.value("episode_counter", 0L);
}

void Trainer::begin_target_phase() {
  phase_ = 2;
  buf_probing_ = ReplayBuffer(cfg_.cap_probing);
  buf_source_ = ReplayBuffer(cfg_.cap_source);
  buf_target_ = ReplayBuffer(cfg_.cap_target);
}

PolicyFn Trainer::goal_policy(bool deterministic) const {
  const SacAgent* a = &goal_;
  if (deterministic)
    return [a](const Vec& obs, Rng&) { return a->act_deterministic(obs); };
  return [a](const Vec& obs, Rng& rng) { return a->act(obs, rng); };
}

PolicyFn Trainer::probing_policy(bool deterministic) const {
  const SacAgent* a = &probing_;
  if (deterministic)
    return [a](const Vec& obs, Rng&) { return a->act_deterministic(obs); };
  return [a](const Vec& obs, Rng& rng) { return a->act(obs, rng); };
}

long Trainer::phase1_iters() const {
  if (cfg_.variant == Variant::gpim_target_x10) {
    // Match dars's total target interaction: ⌈N/R⌉ episodes' worth of steps,
    // consumed here at two target episodes per iteration.
    const long target_rollouts = (cfg_.max_iters + cfg_.ratio_R - 1) / cfg_.ratio_R;
    return (target_rollouts + 1) / 2;
  }
  if (cfg_.variant == Variant::finetune && !cfg_.resume_from.empty()) return 0;
  return cfg_.max_iters;
}

long Trainer::phase2_iters() const {
  if (cfg_.variant != Variant::finetune) return 0;
  const long target_rollouts = (cfg_.max_iters + cfg_.ratio_R - 1) / cfg_.ratio_R;
  return (target_rollouts + 1) / 2;
}

void Trainer::run(const MetricSink& on_metric, const CheckpointSink& on_checkpoint) {
  if (cfg_.variant == Variant::finetune && !cfg_.resume_from.empty()) {
    std::ifstream f(cfg_.resume_from);
    if (!f) throw ShapeError("run: cannot open resume checkpoint " + cfg_.resume_from);
    restore(nlohmann::json::parse(f));
  }
  long last_emitted = -1;
  const auto emit = [&](bool final_ckpt) {
    const MetricRecord m = evaluate();
    if (on_metric) on_metric(m);
    if (on_checkpoint) on_checkpoint(checkpoint(), final_ckpt);
    last_emitted = iter_;
  };
  const auto loop = [&](long n) {
    for (long k = 0; k < n; ++k) {
      try {
        iterate();
      } catch (const NumericError& e) {
        throw NumericError("iteration " + std::to_string(iter_) + ": " + e.what());
      }
      if (iter_ % cfg_.eval_every == 0) emit(false);
    }
  };
  emit(false);
  loop(phase1_iters());
  if (cfg_.variant == Variant::finetune) {
    begin_target_phase();
    loop(phase2_iters());
  }
  if (last_emitted != iter_)
    emit(true);
  else if (on_checkpoint)
    on_checkpoint(checkpoint(), true);
}

std::vector<std::vector<Transition>> deploy(const PolicyFn& policy, const ContinuousEnv& env,
                                            const Vec& cond, int omega, Domain domain,
                                            int n_episodes, Rng& rng) {
  std::vector<std::vector<Transition>> out;
  out.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) out.push_back(rollout(policy, env, cond, omega, domain, e, rng));
  return out;
}

}  // namespace dars
