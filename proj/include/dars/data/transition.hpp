#pragma once

#include <ostream>
#include <vector>

#include "dars/common/mat.hpp"

namespace dars {

enum class Domain { source, target };

inline const char* domain_name(Domain d) { return d == Domain::source ? "source" : "target"; }

struct Transition {
  Vec s;
  Vec a;
  Vec s_next;
  int omega = 0;   // latent index; 0 in dirac mode, -1 when not applicable
  Vec cond;        // conditioning vector fed to the policy (one-hot ω or goal state)
  Domain domain = Domain::source;
  int t = 0;
  long episode_id = 0;
};

// CSV with header episode_id,t,sx,sy,ax,ay,nx,ny,omega,domain (2-D maps).
void export_csv(std::ostream& out, const std::vector<Transition>& transitions);

}  // namespace dars
