#pragma once

#include <array>
#include <vector>

#include <json.hpp>

#include "dars/common/mat.hpp"
#include "dars/common/rng.hpp"
#include "dars/envs/tabular.hpp"

namespace dars {

struct Wall {
  double x1, y1, x2, y2;
};

// Continuous point-mass map on [0,1]^2 with full-block walls. Actions live
// in [-1,1]^2 and displace the state by action_scale per axis.
struct MapSpec {
  std::vector<Wall> walls;
  std::array<double, 2> start{0.1, 0.1};
  bool start_is_box = false;
  std::array<double, 4> start_box{0.0, 0.0, 1.0, 1.0};  // x_lo, y_lo, x_hi, y_hi
  int T = 50;
  double action_scale = 0.05;
};

struct DriftMapSpec {
  MapSpec base;
  std::array<double, 2> drift{0.0, 0.0};
  double noise_std = 0.0;
};

// True if segments (x1,y1)-(x2,y2) and (x3,y3)-(x4,y4) intersect, endpoints
// inclusive; orientation tests with 1e-12 collinearity tolerance.
bool segments_intersect(double x1, double y1, double x2, double y2,
                        double x3, double y3, double x4, double y4);

// Deterministic step: clamp s + action_scale*a to the unit square; if the
// movement segment crosses any wall the agent stays put.
Vec map_step(const MapSpec& spec, const Vec& s, const Vec& a);

Vec map_reset(const MapSpec& spec, Rng& rng);

// map_step for the action, then drift + Gaussian(0, noise_std^2) per axis,
// clamp, and re-check blocking on the total displacement from s.
Vec drift_step(const DriftMapSpec& spec, const Vec& s, const Vec& a, Rng& rng);

// Canonical wall placements (lengths 0 / 0.5 / 0.75 / 0.25+0.25 / 1).
MapSpec map_a();
MapSpec map_b();
MapSpec map_c();
MapSpec map_d();
MapSpec map_e();

nlohmann::json map_spec_to_json(const MapSpec& spec);
MapSpec map_spec_from_json(const nlohmann::json& j);

// Tabular abstraction of a map: grid×grid cells, actions
// {stay, +x, −x, +y, −y}. A move whose center-to-center segment leaves the
// grid or crosses a wall keeps all mass on the current cell; otherwise the
// intended cell gets move_prob and the rest stays. State index = iy*grid+ix;
// rho0 is the cell containing spec.start.
TabularMDP discretize_map(const MapSpec& spec, int grid, int T, double move_prob = 0.8);

// Continuous embeddings for classifier inputs on a discretized map.
Vec cell_center(int state_idx, int grid);
Vec grid_action_vec(int action_idx);

// Stateless environment interface: step is pure given (state, action, rng).
class ContinuousEnv {
 public:
  virtual ~ContinuousEnv() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual Vec reset(Rng& rng) const = 0;
  virtual Vec step(const Vec& s, const Vec& a, Rng& rng) const = 0;
};

class MapEnv : public ContinuousEnv {
 public:
  explicit MapEnv(MapSpec spec) : spec_(std::move(spec)) {}
  int state_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  int horizon() const override { return spec_.T; }
  Vec reset(Rng& rng) const override { return map_reset(spec_, rng); }
  Vec step(const Vec& s, const Vec& a, Rng&) const override { return map_step(spec_, s, a); }
  const MapSpec& spec() const { return spec_; }

 private:
  MapSpec spec_;
};

class DriftMapEnv : public ContinuousEnv {
 public:
  explicit DriftMapEnv(DriftMapSpec spec) : spec_(std::move(spec)) {}
  int state_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  int horizon() const override { return spec_.base.T; }
  Vec reset(Rng& rng) const override { return map_reset(spec_.base, rng); }
  Vec step(const Vec& s, const Vec& a, Rng& rng) const override {
    return drift_step(spec_, s, a, rng);
  }
  const DriftMapSpec& spec() const { return spec_; }

 private:
  DriftMapSpec spec_;
};

}  // namespace dars
