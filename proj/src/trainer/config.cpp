#include "dars/trainer/config.hpp"

#include "dars/common/errors.hpp"
#include "dars/envs/pair.hpp"

namespace dars {

namespace {

const char* kVariantNames[] = {"dars",        "extension",       "gpim_source", "gpim_target",
                               "gpim_target_x10", "finetune",    "dars_reuse",  "darc_like"};

}  // namespace

Variant variant_from_string(const std::string& s) {
  for (int i = 0; i < 8; ++i)
    if (s == kVariantNames[i]) return static_cast<Variant>(i);
  throw ShapeError("unknown variant: " + s);
}

const char* variant_to_string(Variant v) { return kVariantNames[static_cast<int>(v)]; }

void validate(const TrainerConfig& cfg) {
  pair_name_from_string(cfg.pair);  // throws on unknown pair
  if (cfg.beta < 0.0) throw ShapeError("config: beta must be >= 0");
  if (cfg.ratio_R < 1) throw ShapeError("config: ratio_R must be >= 1");
  if (cfg.max_iters < 1) throw ShapeError("config: max_iters must be >= 1");
  if (cfg.eval_every < 1 || cfg.eval_episodes < 1)
    throw ShapeError("config: eval cadence must be positive");
  if (cfg.updates_per_step <= 0.0) throw ShapeError("config: updates_per_step must be > 0");
  if (cfg.cap_probing == 0 || cfg.cap_source == 0 || cfg.cap_target == 0)
    throw ShapeError("config: buffer capacities must be positive");
  if (cfg.latent.kind == LatentSpec::Kind::categorical && cfg.latent.K < 1)
    throw ShapeError("config: categorical K must be >= 1");
  if (cfg.relabel.kind == RelabelStrategy::Kind::latent_as_goal &&
      cfg.latent.kind != LatentSpec::Kind::categorical)
    throw ShapeError("config: latent_as_goal relabeling needs categorical latents");
  if (cfg.variant == Variant::darc_like && cfg.relabel.kind != RelabelStrategy::Kind::final_state)
    throw ShapeError("config: darc_like uses state goals (final_state relabeling)");
  if (cfg.variant == Variant::darc_like && cfg.beta != 1.0)
    throw ShapeError("config: darc_like fixes beta at 1");
  if (cfg.sac.batch < 1 || cfg.sac.lr <= 0.0) throw ShapeError("config: bad sac settings");
}

nlohmann::json trainer_config_to_json(const TrainerConfig& cfg) {
  nlohmann::json j;
  j["trainer"] = {{"pair", cfg.pair},
                  {"variant", variant_to_string(cfg.variant)},
                  {"beta", cfg.beta},
                  {"ratio_R", cfg.ratio_R},
                  {"relabel", cfg.relabel.kind == RelabelStrategy::Kind::latent_as_goal
                                  ? "latent_as_goal"
                                  : "final_state"},
                  {"max_iters", cfg.max_iters},
                  {"eval_every", cfg.eval_every},
                  {"eval_episodes", cfg.eval_episodes},
                  {"updates_per_step", cfg.updates_per_step},
                  {"cap_probing", cfg.cap_probing},
                  {"cap_source", cfg.cap_source},
                  {"cap_target", cfg.cap_target},
                  {"cls_input_noise", cfg.cls_input_noise},
                  {"delta_r_clip", cfg.delta_r_clip},
                  {"resume_from", cfg.resume_from}};
  j["latent"] = {{"kind", cfg.latent.kind == LatentSpec::Kind::categorical ? "categorical"
                                                                           : "dirac"},
                 {"K", cfg.latent.K}};
  j["sac"] = {{"gamma", cfg.sac.gamma}, {"alpha", cfg.sac.alpha}, {"tau", cfg.sac.tau},
              {"lr", cfg.sac.lr},       {"batch", cfg.sac.batch}, {"hidden", cfg.sac.hidden}};
  j["nets"] = {{"disc_hidden", cfg.disc_hidden}, {"cls_hidden", cfg.cls_hidden}};
  return j;
}

TrainerConfig trainer_config_from_json(const nlohmann::json& j) {
  TrainerConfig cfg;
  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    cfg.pair = t.value("pair", cfg.pair);
    cfg.variant = variant_from_string(t.value("variant", "dars"));
    cfg.beta = t.value("beta", cfg.beta);
    cfg.ratio_R = t.value("ratio_R", cfg.ratio_R);
    const std::string rl = t.value("relabel", "latent_as_goal");
    if (rl == "latent_as_goal")
      cfg.relabel.kind = RelabelStrategy::Kind::latent_as_goal;
    else if (rl == "final_state")
      cfg.relabel.kind = RelabelStrategy::Kind::final_state;
    else
      throw ShapeError("config: unknown relabel strategy " + rl);
    cfg.max_iters = t.value("max_iters", cfg.max_iters);
    cfg.eval_every = t.value("eval_every", cfg.eval_every);
    cfg.eval_episodes = t.value("eval_episodes", cfg.eval_episodes);
    cfg.updates_per_step = t.value("updates_per_step", cfg.updates_per_step);
    cfg.cap_probing = t.value("cap_probing", cfg.cap_probing);
    cfg.cap_source = t.value("cap_source", cfg.cap_source);
    cfg.cap_target = t.value("cap_target", cfg.cap_target);
    cfg.cls_input_noise = t.value("cls_input_noise", cfg.cls_input_noise);
    cfg.delta_r_clip = t.value("delta_r_clip", cfg.delta_r_clip);
    cfg.resume_from = t.value("resume_from", cfg.resume_from);
    // The decoupled-reward variant is defined with a unit KL coefficient.
    if (cfg.variant == Variant::darc_like) cfg.beta = 1.0;
  }
  if (j.contains("latent")) {
    const auto& l = j.at("latent");
    const std::string kind = l.value("kind", "categorical");
    if (kind == "categorical")
      cfg.latent.kind = LatentSpec::Kind::categorical;
    else if (kind == "dirac")
      cfg.latent.kind = LatentSpec::Kind::dirac;
    else
      throw ShapeError("config: unknown latent kind " + kind);
    cfg.latent.K = l.value("K", cfg.latent.K);
  }
  if (j.contains("sac")) {
    const auto& s = j.at("sac");
    cfg.sac.gamma = s.value("gamma", cfg.sac.gamma);
    cfg.sac.alpha = s.value("alpha", cfg.sac.alpha);
    cfg.sac.tau = s.value("tau", cfg.sac.tau);
    cfg.sac.lr = s.value("lr", cfg.sac.lr);
    cfg.sac.batch = s.value("batch", cfg.sac.batch);
    cfg.sac.hidden = s.value("hidden", cfg.sac.hidden);
  }
  if (j.contains("nets")) {
    const auto& n = j.at("nets");
    cfg.disc_hidden = n.value("disc_hidden", cfg.disc_hidden);
    cfg.cls_hidden = n.value("cls_hidden", cfg.cls_hidden);
  }
  validate(cfg);
  return cfg;
}

}  // namespace dars
