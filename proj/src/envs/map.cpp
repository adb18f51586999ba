#include "dars/envs/map.hpp"

#include <algorithm>
#include <cmath>

#include "dars/common/errors.hpp"

namespace dars {

namespace {

constexpr double kCollinearTol = 1e-12;

double cross(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

bool on_segment(double px, double py, double qx, double qy, double rx, double ry) {
  // r known collinear with p-q: is it within the bounding box?
  return std::min(px, qx) - kCollinearTol <= rx && rx <= std::max(px, qx) + kCollinearTol &&
         std::min(py, qy) - kCollinearTol <= ry && ry <= std::max(py, qy) + kCollinearTol;
}

}  // namespace

bool segments_intersect(double x1, double y1, double x2, double y2,
                        double x3, double y3, double x4, double y4) {
  const double d1 = cross(x3, y3, x4, y4, x1, y1);
  const double d2 = cross(x3, y3, x4, y4, x2, y2);
  const double d3 = cross(x1, y1, x2, y2, x3, y3);
  const double d4 = cross(x1, y1, x2, y2, x4, y4);

  const bool s12 = (d1 > kCollinearTol && d2 < -kCollinearTol) ||
                   (d1 < -kCollinearTol && d2 > kCollinearTol);
  const bool s34 = (d3 > kCollinearTol && d4 < -kCollinearTol) ||
                   (d3 < -kCollinearTol && d4 > kCollinearTol);
  if (s12 && s34) return true;

  // Collinear / touching cases.
  if (std::abs(d1) <= kCollinearTol && on_segment(x3, y3, x4, y4, x1, y1)) return true;
  if (std::abs(d2) <= kCollinearTol && on_segment(x3, y3, x4, y4, x2, y2)) return true;
  if (std::abs(d3) <= kCollinearTol && on_segment(x1, y1, x2, y2, x3, y3)) return true;
  if (std::abs(d4) <= kCollinearTol && on_segment(x1, y1, x2, y2, x4, y4)) return true;
  return false;
}

static bool blocked(const MapSpec& spec, const Vec& from, double tox, double toy) {
  for (const auto& w : spec.walls)
    if (segments_intersect(from[0], from[1], tox, toy, w.x1, w.y1, w.x2, w.y2)) return true;
  return false;
}

Vec map_step(const MapSpec& spec, const Vec& s, const Vec& a) {
  if (s.size() != 2 || a.size() != 2) throw ShapeError("map_step: expected 2-vectors");
  if (s[0] < 0.0 || s[0] > 1.0 || s[1] < 0.0 || s[1] > 1.0)
    throw ShapeError("map_step: state outside unit square");
  const double px = std::clamp(s[0] + spec.action_scale * a[0], 0.0, 1.0);
  const double py = std::clamp(s[1] + spec.action_scale * a[1], 0.0, 1.0);
  if (blocked(spec, s, px, py)) return s;
  return {px, py};
}

Vec map_reset(const MapSpec& spec, Rng& rng) {
  if (spec.start_is_box)
    return {rng.uniform(spec.start_box[0], spec.start_box[2]),
            rng.uniform(spec.start_box[1], spec.start_box[3])};
  return {spec.start[0], spec.start[1]};
}

Vec drift_step(const DriftMapSpec& spec, const Vec& s, const Vec& a, Rng& rng) {
  Vec after_action = map_step(spec.base, s, a);
  double nx = after_action[0] + spec.drift[0] + spec.noise_std * rng.normal();
  double ny = after_action[1] + spec.drift[1] + spec.noise_std * rng.normal();
  nx = std::clamp(nx, 0.0, 1.0);
  ny = std::clamp(ny, 0.0, 1.0);
  if (blocked(spec.base, s, nx, ny)) return s;
  return {nx, ny};
}

MapSpec map_a() { return MapSpec{}; }

MapSpec map_b() {
  MapSpec m;
  m.walls = {{0.5, 0.5, 0.5, 1.0}};
  return m;
}

MapSpec map_c() {
  MapSpec m;
  m.walls = {{0.5, 0.25, 0.5, 1.0}};
  return m;
}

MapSpec map_d() {
  MapSpec m;
  m.walls = {{0.375, 0.5, 0.625, 0.5}, {0.5, 0.5, 0.5, 0.75}};
  return m;
}

MapSpec map_e() {
  MapSpec m;
  m.walls = {{0.5, 0.0, 0.5, 1.0}};
  return m;
}

nlohmann::json map_spec_to_json(const MapSpec& spec) {
  nlohmann::json j;
  j["walls"] = nlohmann::json::array();
  for (const auto& w : spec.walls) j["walls"].push_back({w.x1, w.y1, w.x2, w.y2});
  if (spec.start_is_box)
    j["start"] = {{"box", spec.start_box}};
  else
    j["start"] = {spec.start[0], spec.start[1]};
  j["T"] = spec.T;
  j["action_scale"] = spec.action_scale;
  return j;
}

MapSpec map_spec_from_json(const nlohmann::json& j) {
  MapSpec spec;
  spec.walls.clear();
  for (const auto& jw : j.at("walls")) {
    if (jw.size() != 4) throw ShapeError("map_spec_from_json: wall needs 4 coordinates");
    Wall w{jw.at(0).get<double>(), jw.at(1).get<double>(), jw.at(2).get<double>(),
           jw.at(3).get<double>()};
    for (double c : {w.x1, w.y1, w.x2, w.y2})
      if (c < 0.0 || c > 1.0) throw ShapeError("map_spec_from_json: wall endpoint outside [0,1]^2");
    spec.walls.push_back(w);
  }
  const auto& js = j.at("start");
  if (js.is_object()) {
    spec.start_is_box = true;
    spec.start_box = js.at("box").get<std::array<double, 4>>();
  } else {
    spec.start = {js.at(0).get<double>(), js.at(1).get<double>()};
  }
  spec.T = j.value("T", 50);
  spec.action_scale = j.value("action_scale", 0.05);
  if (spec.T < 1 || spec.action_scale <= 0.0)
    throw ShapeError("map_spec_from_json: need T >= 1 and action_scale > 0");
  return spec;
}

Vec cell_center(int state_idx, int grid) {
  if (grid < 1 || state_idx < 0 || state_idx >= grid * grid)
    throw ShapeError("cell_center: index outside grid");
  const int ix = state_idx % grid, iy = state_idx / grid;
  return {(ix + 0.5) / grid, (iy + 0.5) / grid};
}

Vec grid_action_vec(int action_idx) {
  static const double dirs[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  if (action_idx < 0 || action_idx >= 5) throw ShapeError("grid_action_vec: index outside [0,5)");
  return {dirs[action_idx][0], dirs[action_idx][1]};
}

TabularMDP discretize_map(const MapSpec& spec, int grid, int T, double move_prob) {
  if (grid < 1 || T < 1 || move_prob <= 0.0 || move_prob > 1.0)
    throw ShapeError("discretize_map: need grid >= 1, T >= 1, move_prob in (0,1]");
  TabularMDP mdp;
  mdp.n_states = grid * grid;
  mdp.n_actions = 5;
  mdp.T = T;
  mdp.P.assign(mdp.n_states, std::vector<std::vector<double>>(
                                 mdp.n_actions, std::vector<double>(mdp.n_states, 0.0)));
  for (int s = 0; s < mdp.n_states; ++s) {
    const int ix = s % grid, iy = s / grid;
    const Vec from = cell_center(s, grid);
    for (int a = 0; a < mdp.n_actions; ++a) {
      const Vec dir = grid_action_vec(a);
      const int jx = ix + static_cast<int>(dir[0]), jy = iy + static_cast<int>(dir[1]);
      const int dest = jy * grid + jx;
      bool ok = a != 0 && jx >= 0 && jx < grid && jy >= 0 && jy < grid;
      if (ok) {
        const Vec to = cell_center(dest, grid);
        ok = !blocked(spec, from, to[0], to[1]);
      }
      if (ok) {
        mdp.P[s][a][dest] = move_prob;
        mdp.P[s][a][s] += 1.0 - move_prob;
      } else {
        mdp.P[s][a][s] = 1.0;
      }
    }
  }
  const auto cell_of = [&](double v) {
    int c = static_cast<int>(v * grid);
    return c < 0 ? 0 : (c >= grid ? grid - 1 : c);
  };
  mdp.rho0.assign(mdp.n_states, 0.0);
  mdp.rho0[cell_of(spec.start[1]) * grid + cell_of(spec.start[0])] = 1.0;
  validate_tabular(mdp);
  return mdp;
}

}  // namespace dars
