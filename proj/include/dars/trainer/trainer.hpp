#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dars/data/replay.hpp"
#include "dars/data/rollout.hpp"
#include "dars/envs/pair.hpp"
#include "dars/offdyn/classifiers.hpp"
#include "dars/sac/sac.hpp"
#include "dars/skills/discriminator.hpp"
#include "dars/trainer/config.hpp"

namespace dars {

// One metrics row per evaluation. Step counters follow the accounting rule:
// source_steps counts the goal policy's source-env steps (after N iterations
// of dars, N·T), target_steps counts every target-env step regardless of
// which policy collected it (⌈N/R⌉·T for dars). wall_clock_s is filled by the
// caller and deliberately kept off the serialized line so reruns of the same
// seed produce byte-identical metrics files.
struct MetricRecord {
  long iter = 0;
  long source_steps = 0;
  long target_steps = 0;
  double probing_reward_mean = 0.0;
  double disc_accuracy = 0.0;
  double delta_r_abs_mean = 0.0;
  double eval_source = 0.0;  // mean −L2 distance (c2) or skill accuracy (c1)
  double eval_target = 0.0;
  double wall_clock_s = 0.0;
};

nlohmann::json metric_to_json(const MetricRecord& m);

// Algorithm orchestration: dual policies (latent-conditioned probing π_μ,
// goal-conditioned π_θ) sharing one discriminator, plus the domain-classifier
// pair behind Δr for the variants that use it.
class Trainer {
 public:
  Trainer(TrainerConfig cfg, std::uint64_t seed);
  // Run on a caller-supplied environment pair (e.g. identical source/target
  // dynamics); cfg.pair is kept only as a label, and checkpoints restored
  // elsewhere resolve that label through make_pair instead.
  Trainer(TrainerConfig cfg, std::uint64_t seed, EnvPair pair);

  using MetricSink = std::function<void(const MetricRecord&)>;
  using CheckpointSink = std::function<void(const nlohmann::json&, bool /*final*/)>;

  // Full training loop with periodic evaluation/checkpointing. Numeric
  // failures abort with the iteration index in the message.
  void run(const MetricSink& on_metric = {}, const CheckpointSink& on_checkpoint = {});

  void iterate();            // one algorithm iteration (phase-aware)
  MetricRecord evaluate();   // deploy-and-measure at the current parameters

  nlohmann::json checkpoint() const;
  // Warm start for finetune: restores networks and counters from a
  // checkpoint produced by another run; buffers start empty.
  void restore(const nlohmann::json& ckpt);
  void begin_target_phase();  // finetune phase 2: clear buffers, move to target

  PolicyFn goal_policy(bool deterministic) const;
  PolicyFn probing_policy(bool deterministic) const;

  // Loop length actually executed by run(), after budget matching
  // (gpim_target_x10 and the finetune target phase run ⌈⌈N/R⌉/2⌉ iterations).
  long phase1_iters() const;
  long phase2_iters() const;

  long iter() const { return iter_; }
  int phase() const { return phase_; }
  long source_steps() const { return source_steps_; }
  long target_steps() const { return target_steps_; }
  long probing_steps() const { return probing_steps_; }
  int updates_per_iter() const { return updates_per_iter_; }
  const TrainerConfig& config() const { return cfg_; }
  const EnvPair& env_pair() const { return pair_; }
  const SacAgent& probing_agent() const { return probing_; }
  const SacAgent& goal_agent() const { return goal_; }
  const Discriminator& disc() const { return disc_; }
  const DomainClassifiers* classifiers() const { return cls_ ? &*cls_ : nullptr; }
  const ReplayBuffer& buf_probing() const { return buf_probing_; }
  const ReplayBuffer& buf_source() const { return buf_source_; }
  const ReplayBuffer& buf_target() const { return buf_target_; }
  const std::vector<Vec>& eval_goals() const { return eval_goals_; }

  // Reward assembly on stored transitions, exposed so tests can recompute
  // sampled batch rewards independently.
  double reward_probing(const Transition& tr) const;
  double reward_goal(const Transition& tr) const;

  bool uses_classifiers() const;
  bool trains_in_target() const;  // whole loop lives in the target env

 private:
  void sac_updates(SacAgent& agent, const ReplayBuffer& buf, bool probing, Rng& sample_rng,
                   Rng& sac_rng);
  void sac_updates_on_target_logq(SacAgent& agent);  // dars_reuse extra step
  SacAgent::Batch make_batch(const std::vector<Transition>& trs, bool probing) const;
  const ContinuousEnv& rollout_env() const;
  Domain rollout_domain() const;

  TrainerConfig cfg_;
  EnvPair pair_;
  Rng master_;
  Rng rng_latent_, roll_mu_, roll_theta_, roll_target_;
  Rng sac_mu_, sac_theta_, sample_mu_, sample_theta_, sample_disc_, sample_cls_, cls_noise_;
  SacAgent probing_, goal_;
  Discriminator disc_;
  std::optional<DomainClassifiers> cls_;
  ReplayBuffer buf_probing_, buf_source_, buf_target_;
  std::vector<Vec> eval_goals_;
  int updates_per_iter_ = 1;
  long iter_ = 0;
  int phase_ = 1;
  long source_steps_ = 0, target_steps_ = 0, probing_steps_ = 0;
  long episode_counter_ = 0;
  double last_probe_reward_ = 0.0, last_disc_acc_ = 0.0, last_delta_r_abs_ = 0.0;
};

// Pure evaluation: n_episodes rollouts under a fixed conditioning, no
// learning. Pass a deterministic policy (tanh of the mean) for figures and
// tables; the same rng seed then reproduces the episode set exactly.
std::vector<std::vector<Transition>> deploy(const PolicyFn& policy, const ContinuousEnv& env,
                                            const Vec& cond, int omega, Domain domain,
                                            int n_episodes, Rng& rng);

}  // namespace dars
