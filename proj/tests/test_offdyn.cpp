#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dars/common/errors.hpp"
#include "dars/envs/map.hpp"
#include "dars/envs/tabular.hpp"
#include "dars/offdyn/classifiers.hpp"

using namespace dars;

namespace {

// Force a classifier head to output constant logits (l0, l1).
void set_constant(Network& net, double l0, double l1) {
  auto& last = net.layers.back();
  for (auto& v : last.w.data) v = 0.0;
  last.b = {l0, l1};
}

Transition map_transition(const MapSpec& spec, Rng& rng) {
  Transition tr;
  tr.s = {rng.uniform(), rng.uniform()};
  tr.a = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  tr.s_next = map_step(spec, tr.s, tr.a);
  return tr;
}

}  // namespace

TEST_CASE("delta_r: hand arithmetic on constant posteriors") {
  Rng rng(2);
  DomainClassifiers cls(2, 2, {8}, rng);
  nlohmann::json j = cls.to_json();
  Network sas = network_from_json(j.at("sas"));
  Network sa = network_from_json(j.at("sa"));
  // sas posterior (0.9, 0.1): logit gap log 9; sa posterior (0.5, 0.5).
  set_constant(sas, std::log(9.0), 0.0);
  set_constant(sa, 0.0, 0.0);
  j["sas"] = network_to_json(sas);
  j["sa"] = network_to_json(sa);
  DomainClassifiers crafted = DomainClassifiers::from_json(j);
  const double dr = crafted.delta_r({0.3, 0.3}, {0.1, 0.1}, {0.32, 0.32});
  CHECK(dr == doctest::Approx(std::log(9.0)).epsilon(1e-12));

  // Both uniform → 0.
  set_constant(sas, 0.0, 0.0);
  j["sas"] = network_to_json(sas);
  DomainClassifiers flat = DomainClassifiers::from_json(j);
  CHECK(flat.delta_r({0.3, 0.3}, {0.1, 0.1}, {0.32, 0.32}) == 0.0);
}

TEST_CASE("delta_r: always within the clip bound") {
  Rng rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    DomainClassifiers cls(2, 2, {32, 32}, rng, 0.1, 10.0);
    // Inflate weights so raw log-ratios exceed the clip.
    nlohmann::json j = cls.to_json();
    Network sas = network_from_json(j.at("sas"));
    for (auto& l : sas.layers)
      for (auto& v : l.w.data) v *= 50.0;
    j["sas"] = network_to_json(sas);
    DomainClassifiers wild = DomainClassifiers::from_json(j);
    for (int i = 0; i < 200; ++i) {
      Vec s = {rng.uniform(), rng.uniform()};
      Vec a = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      Vec sn = {rng.uniform(), rng.uniform()};
      const double dr = wild.delta_r(s, a, sn);
      CHECK(dr >= -10.0);
      CHECK(dr <= 10.0);
    }
  }
}

TEST_CASE("classifier update: balanced precondition and empty batches") {
  Rng rng(4);
  DomainClassifiers cls(2, 2, {8}, rng);
  std::vector<Transition> one(1, map_transition(map_a(), rng));
  std::vector<Transition> two(2, map_transition(map_a(), rng));
  std::vector<Transition> none;
  CHECK_THROWS_AS(cls.update(one, two, rng), ShapeError);
  CHECK_THROWS_AS(cls.update(none, none, rng), ShapeError);
  CHECK_NOTHROW(cls.update(two, two, rng));
}

TEST_CASE("classifier update: indistinguishable domains converge to log 2") {
  // Fresh same-distribution batches each step: the population is
  // indistinguishable, so the loss plateaus at the log 2 entropy.
  Rng rng(5);
  DomainClassifiers cls(2, 2, {32, 32}, rng);
  double tail_sas = 0.0, tail_sa = 0.0;
  const int steps = 1500, tail_from = 1400;
  for (int step = 0; step < steps; ++step) {
    std::vector<Transition> src, tgt;
    for (int i = 0; i < 128; ++i) {
      src.push_back(map_transition(map_a(), rng));
      tgt.push_back(map_transition(map_a(), rng));
    }
    auto [l_sas, l_sa] = cls.update(src, tgt, rng);
    if (step >= tail_from) {
      tail_sas += l_sas / (steps - tail_from);
      tail_sa += l_sa / (steps - tail_from);
    }
  }
  CHECK(std::abs(tail_sas - std::log(2.0)) < 0.05);
  CHECK(std::abs(tail_sa - std::log(2.0)) < 0.05);
}

TEST_CASE("classifier update: separable domains reach high sas accuracy") {
  Rng rng(6);
  DomainClassifiers cls(2, 2, {64, 64}, rng);
  // Source transitions land left, target transitions land right.
  std::vector<Transition> src, tgt;
  for (int i = 0; i < 128; ++i) {
    Transition a;
    a.s = {rng.uniform(0.0, 0.4), rng.uniform()};
    a.a = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    a.s_next = {rng.uniform(0.0, 0.4), rng.uniform()};
    src.push_back(a);
    Transition b;
    b.s = {rng.uniform(0.6, 1.0), rng.uniform()};
    b.a = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    b.s_next = {rng.uniform(0.6, 1.0), rng.uniform()};
    tgt.push_back(b);
  }
  for (int step = 0; step < 2000; ++step) cls.update(src, tgt, rng);
  int correct = 0;
  auto classify = [&](const Transition& tr) {
    Vec in = tr.s;
    in.insert(in.end(), tr.a.begin(), tr.a.end());
    in.insert(in.end(), tr.s_next.begin(), tr.s_next.end());
    Vec logits = forward(cls.sas(), in);
    return logits[0] > logits[1] ? 0 : 1;
  };
  for (const auto& tr : src) correct += classify(tr) == 0;
  for (const auto& tr : tgt) correct += classify(tr) == 1;
  CHECK(correct > static_cast<int>(0.95 * (src.size() + tgt.size())));
}

TEST_CASE("delta_r: small on held-out data for an identical-environment pair") {
  Rng rng(7);
  DomainClassifiers cls(2, 2, {64, 64}, rng);
  std::vector<Transition> held;
  for (int i = 0; i < 200; ++i) held.push_back(map_transition(map_a(), rng));
  for (int step = 0; step < 3000; ++step) {
    std::vector<Transition> src, tgt;
    for (int i = 0; i < 64; ++i) {
      src.push_back(map_transition(map_a(), rng));
      tgt.push_back(map_transition(map_a(), rng));
    }
    cls.update(src, tgt, rng);
  }
  int small = 0;
  for (const auto& tr : held) small += std::abs(cls.delta_r(tr.s, tr.a, tr.s_next)) < 0.2;
  CHECK(small >= static_cast<int>(0.95 * held.size()));
}

TEST_CASE("exact_delta_r: identical pair, hand values, impossible transitions") {
  TabularMDP s;
  s.n_states = 2;
  s.n_actions = 1;
  s.T = 2;
  s.rho0 = {1.0, 0.0};
  s.P = {{{0.5, 0.5}}, {{1.0, 0.0}}};
  TabularMDP t = s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (s.P[i][0][j] > 0.0) CHECK(exact_delta_r(s, t, i, 0, j) == 0.0);

  t.P[0][0] = {0.25, 0.75};
  CHECK(exact_delta_r(s, t, 0, 0, 0) == doctest::Approx(std::log(2.0)));

  t.P[1][0] = {0.0, 1.0};  // target forbids s'=0 from s=1; source allows it
  // Source P(0|1,0)=1 > 0, target 0 → +clip.
  CHECK(exact_delta_r(s, t, 1, 0, 0, 10.0) == 10.0);

  // Impossible in source violates the precondition.
  CHECK_THROWS_AS(exact_delta_r(s, t, 1, 0, 1), ShapeError);
}

TEST_CASE("exact_delta_r: antisymmetric where both supports are positive") {
  Rng rng(8);
  TabularMDP a = random_tabular_mdp(3, 2, 3, rng);
  TabularMDP b = random_tabular_mdp(3, 2, 3, rng);
  for (int s = 0; s < 3; ++s)
    for (int act = 0; act < 2; ++act)
      for (int sn = 0; sn < 3; ++sn)
        CHECK(exact_delta_r(a, b, s, act, sn) ==
              doctest::Approx(-exact_delta_r(b, a, s, act, sn)).epsilon(1e-12));
}
