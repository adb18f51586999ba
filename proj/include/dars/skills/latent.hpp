#pragma once

#include <vector>

#include "dars/common/mat.hpp"
#include "dars/common/rng.hpp"

namespace dars {

// Fixed skill prior p(ω): uniform categorical over K values, or a single
// Dirac atom (the surprise-minimization degenerate mode).
struct LatentSpec {
  enum class Kind { categorical, dirac };
  Kind kind = Kind::categorical;
  int K = 8;
};

int sample_latent(const LatentSpec& spec, Rng& rng);

// Policy conditioning for a latent: one-hot of length K, or an empty vector
// in dirac mode (a single skill needs no conditioning).
Vec encode_latent(const LatentSpec& spec, int omega);
int latent_cond_dim(const LatentSpec& spec);

// n convex blends λ·onehot(ω1) + (1−λ)·onehot(ω2), λ evenly spaced in [0,1],
// ordered from ω1 to ω2. Categorical mode only; n ≥ 2.
std::vector<Vec> interpolate_latents(const LatentSpec& spec, int omega1, int omega2, int n);

}  // namespace dars
