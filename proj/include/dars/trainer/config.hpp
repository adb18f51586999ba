#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dars/sac/sac.hpp"
#include "dars/skills/latent.hpp"
#include "dars/skills/relabel.hpp"

namespace dars {

enum class Variant {
  dars,
  extension,
  gpim_source,
  gpim_target,
  gpim_target_x10,
  finetune,
  dars_reuse,
  darc_like
};

Variant variant_from_string(const std::string& s);
const char* variant_to_string(Variant v);

struct TrainerConfig {
  std::string pair = "bc";
  Variant variant = Variant::dars;
  double beta = 10.0;
  int ratio_R = 10;
  LatentSpec latent;        // categorical K=8
  RelabelStrategy relabel;  // latent_as_goal
  long max_iters = 20000;
  int eval_every = 250;
  int eval_episodes = 32;
  // Gradient steps per collected environment step, applied uniformly to the
  // discriminator, the classifiers and both SAC learners. 1.0 = one update
  // per step; sub-1 ratios trade convergence speed for wall-clock.
  double updates_per_step = 1.0;
  SacConfig sac;
  size_t cap_probing = 2500;
  size_t cap_source = 5000;
  size_t cap_target = 20000;
  std::vector<int> disc_hidden{64, 64};
  std::vector<int> cls_hidden{64, 64};
  double cls_input_noise = 0.1;
  double delta_r_clip = 10.0;
  std::string resume_from;  // finetune: checkpoint of the pretrained source phase
};

void validate(const TrainerConfig& cfg);

// Nested layout ({"trainer": {...}, "latent": {...}, "sac": {...}, "nets":
// {...}}) so dotted command-line overrides like --trainer.beta=10 map onto
// JSON paths. Missing fields take the defaults above.
nlohmann::json trainer_config_to_json(const TrainerConfig& cfg);
TrainerConfig trainer_config_from_json(const nlohmann::json& j);

}  // namespace dars
