#pragma once

#include <memory>
#include <string>

#include "dars/envs/map.hpp"

namespace dars {

enum class PairName { ab, ac, ad, bc, bd, ae, drift };

PairName pair_name_from_string(const std::string& s);
const char* pair_name_to_string(PairName n);

// Source/target environments sharing state space, action space, rho0 and T;
// only the dynamics differ.
struct EnvPair {
  PairName name;
  std::shared_ptr<const ContinuousEnv> source;
  std::shared_ptr<const ContinuousEnv> target;
  int state_dim = 2;
  int action_dim = 2;
  int T = 50;
  double gamma = 0.99;
};

EnvPair make_pair(PairName name);
EnvPair make_pair(const std::string& name);

// Pair of two explicit map specs (tests use e.g. source == target).
EnvPair make_map_pair(const MapSpec& source, const MapSpec& target, PairName tag = PairName::ab);

// Every source wall segment must be covered by the target's wall set
// (Assumption-1 proxy). Exposed for tests.
bool walls_contained(const MapSpec& source, const MapSpec& target);

}  // namespace dars
