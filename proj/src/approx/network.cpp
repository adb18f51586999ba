#include "dars/approx/network.hpp"

#include <cmath>
#include <cstring>

#include "dars/common/errors.hpp"

namespace dars {

const char* act_name(Act a) {
  switch (a) {
    case Act::relu: return "relu";
    case Act::tanh_: return "tanh";
    case Act::linear: return "linear";
  }
  throw ShapeError("act_name: unknown activation");
}

Act act_from_name(const std::string& name) {
  if (name == "relu") return Act::relu;
  if (name == "tanh") return Act::tanh_;
  if (name == "linear") return Act::linear;
  throw ShapeError("act_from_name: unknown activation '" + name + "'");
}

size_t Network::n_params() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

Network make_mlp(int in_dim, const std::vector<int>& hidden, int out_dim, Act hidden_act, Rng& rng) {
  if (in_dim < 1 || out_dim < 1) throw ShapeError("make_mlp: dims must be positive");
  Network net;
  std::vector<int> widths;
  widths.push_back(in_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out_dim);
  for (size_t k = 0; k + 1 < widths.size(); ++k) {
    Layer l;
    l.w = Mat(widths[k + 1], widths[k]);
    l.b = Vec(widths[k + 1], 0.0);
    double bound = std::sqrt(6.0 / (widths[k] + widths[k + 1]));
    for (auto& v : l.w.data) v = rng.uniform(-bound, bound);
    l.act = (k + 2 < widths.size()) ? hidden_act : Act::linear;
    net.layers.push_back(std::move(l));
  }
  return net;
}

static void apply_act(Act act, Mat& z) {
  switch (act) {
    case Act::relu:
      for (auto& v : z.data) v = v > 0.0 ? v : 0.0;
      break;
    case Act::tanh_:
      for (auto& v : z.data) v = std::tanh(v);
      break;
    case Act::linear:
      break;
  }
}

Mat forward_batch(const Network& net, const Mat& x, ForwardCache* cache) {
  if (net.layers.empty()) throw ShapeError("forward: empty network");
  if (x.cols != net.in_dim()) throw ShapeError("forward: input width mismatch");
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(x);
  }
  Mat cur = x;
  for (const auto& l : net.layers) {
    Mat z;
    gemm_nt(cur, l.w, z);
    for (int r = 0; r < z.rows; ++r)
      for (int c = 0; c < z.cols; ++c) z(r, c) += l.b[c];
    apply_act(l.act, z);
    cur = std::move(z);
    if (cache) cache->acts.push_back(cur);
  }
  return cur;
}

Vec forward(const Network& net, const Vec& x) {
  Mat xb(1, static_cast<int>(x.size()));
  xb.data = x;
  Mat out = forward_batch(net, xb);
  return out.data;
}

Mat head_slice(const Network& net, const Mat& out, const std::string& head) {
  auto it = net.heads.find(head);
  if (it == net.heads.end()) throw ShapeError("head_slice: unknown head '" + head + "'");
  const Head& h = it->second;
  if (h.offset + h.len > out.cols) throw ShapeError("head_slice: slice exceeds output width");
  Mat s(out.rows, h.len);
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < h.len; ++c) s(r, c) = out(r, h.offset + c);
  return s;
}

Gradients zero_gradients(const Network& net) {
  Gradients g;
  for (const auto& l : net.layers) {
    g.dw.emplace_back(l.w.rows, l.w.cols);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void accumulate(Gradients& into, const Gradients& g, double scale) {
  if (into.dw.size() != g.dw.size()) throw ShapeError("accumulate: layer count mismatch");
  for (size_t k = 0; k < g.dw.size(); ++k) {
    for (size_t i = 0; i < g.dw[k].data.size(); ++i) into.dw[k].data[i] += scale * g.dw[k].data[i];
    for (size_t i = 0; i < g.db[k].size(); ++i) into.db[k][i] += scale * g.db[k][i];
  }
}

Gradients backward(const Network& net, const ForwardCache& cache, const Mat& d_out, Mat* d_in) {
  const size_t L = net.layers.size();
  if (cache.acts.size() != L + 1) throw ShapeError("backward: cache does not match network");
  if (d_out.rows != cache.acts.back().rows || d_out.cols != cache.acts.back().cols)
    throw ShapeError("backward: d_out shape mismatch");

  Gradients g = zero_gradients(net);
  Mat delta = d_out;  // ∂loss/∂(post-activation of current layer)
  for (size_t k = L; k-- > 0;) {
    const Layer& l = net.layers[k];
    const Mat& post = cache.acts[k + 1];
    // ∂loss/∂(pre-activation): scale delta by the activation derivative,
    // recovered from the cached post-activation values.
    switch (l.act) {
      case Act::relu:
        for (size_t i = 0; i < delta.data.size(); ++i)
          if (post.data[i] <= 0.0) delta.data[i] = 0.0;
        break;
      case Act::tanh_:
        for (size_t i = 0; i < delta.data.size(); ++i)
          delta.data[i] *= 1.0 - post.data[i] * post.data[i];
        break;
      case Act::linear:
        break;
    }
    // dW = delta^T * X_prev, db = column sums of delta, dX_prev = delta * W.
    gemm_tn(delta, cache.acts[k], g.dw[k]);
    for (int r = 0; r < delta.rows; ++r)
      for (int c = 0; c < delta.cols; ++c) g.db[k][c] += delta(r, c);
    if (k > 0 || d_in) {
      Mat d_prev;
      gemm_nn(delta, l.w, d_prev);
      if (k == 0) {
        *d_in = std::move(d_prev);
        break;
      }
      delta = std::move(d_prev);
    }
  }
  return g;
}

Gradients grad(const Network& net, const Mat& x_batch,
               const std::function<double(const Mat& out, Mat& d_out)>& loss) {
  if (x_batch.rows == 0) throw ShapeError("grad: empty batch");
  ForwardCache cache;
  Mat out = forward_batch(net, x_batch, &cache);
  Mat d_out(out.rows, out.cols);
  double value = loss(out, d_out);
  if (!std::isfinite(value)) {
    int bad = -1;
    for (int r = 0; r < out.rows && bad < 0; ++r)
      for (int c = 0; c < out.cols; ++c)
        if (!std::isfinite(out(r, c))) { bad = r; break; }
    if (bad < 0) {
      for (int r = 0; r < d_out.rows && bad < 0; ++r)
        for (int c = 0; c < d_out.cols; ++c)
          if (!std::isfinite(d_out(r, c))) { bad = r; break; }
    }
    throw NumericError("grad: non-finite loss (batch index " + std::to_string(bad) + ")");
  }
  return backward(net, cache, d_out);
}

OptState make_opt_state(const Network& net) {
  OptState o;
  for (const auto& l : net.layers) {
    o.m_w.emplace_back(l.w.rows, l.w.cols);
    o.v_w.emplace_back(l.w.rows, l.w.cols);
    o.m_b.emplace_back(l.b.size(), 0.0);
    o.v_b.emplace_back(l.b.size(), 0.0);
  }
  return o;
}

static void adam_update(double* p, double* m, double* v, const double* g, size_t n,
                        double lr, double bc1, double bc2) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  for (size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void adam_step(Network& net, const Gradients& g, OptState& opt, double lr) {
  if (g.dw.size() != net.layers.size() || opt.m_w.size() != net.layers.size())
    throw ShapeError("adam_step: structure mismatch");
  opt.step += 1;
  const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(opt.step));
  for (size_t k = 0; k < net.layers.size(); ++k) {
    Layer& l = net.layers[k];
    if (g.dw[k].rows != l.w.rows || g.dw[k].cols != l.w.cols || g.db[k].size() != l.b.size())
      throw ShapeError("adam_step: gradient shape mismatch");
    adam_update(l.w.data.data(), opt.m_w[k].data.data(), opt.v_w[k].data.data(),
                g.dw[k].data.data(), l.w.size(), lr, bc1, bc2);
    adam_update(l.b.data(), opt.m_b[k].data(), opt.v_b[k].data(),
                g.db[k].data(), l.b.size(), lr, bc1, bc2);
  }
}

nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers) {
    nlohmann::json jl;
    jl["out"] = l.w.rows;
    jl["in"] = l.w.cols;
    jl["w"] = l.w.data;  // row-major
    jl["b"] = l.b;
    jl["act"] = act_name(l.act);
    j["layers"].push_back(std::move(jl));
  }
  nlohmann::json jh = nlohmann::json::object();
  for (const auto& [name, h] : net.heads) jh[name] = {h.offset, h.len};
  j["heads"] = std::move(jh);
  return j;
}

Network network_from_json(const nlohmann::json& j) {
  Network net;
  for (const auto& jl : j.at("layers")) {
    Layer l;
    l.w = Mat(jl.at("out").get<int>(), jl.at("in").get<int>());
    l.w.data = jl.at("w").get<Vec>();
    if (l.w.data.size() != static_cast<size_t>(l.w.rows) * l.w.cols)
      throw ShapeError("network_from_json: weight array size mismatch");
    l.b = jl.at("b").get<Vec>();
    if (l.b.size() != static_cast<size_t>(l.w.rows))
      throw ShapeError("network_from_json: bias size mismatch");
    l.act = act_from_name(jl.at("act").get<std::string>());
    net.layers.push_back(std::move(l));
  }
  for (size_t k = 0; k + 1 < net.layers.size(); ++k)
    if (net.layers[k + 1].w.cols != net.layers[k].w.rows)
      throw ShapeError("network_from_json: inconsistent layer dims");
  if (j.contains("heads"))
    for (const auto& [name, jh] : j.at("heads").items())
      net.heads[name] = Head{jh.at(0).get<int>(), jh.at(1).get<int>()};
  return net;
}

nlohmann::json opt_state_to_json(const OptState& opt) {
  nlohmann::json j;
  j["step"] = opt.step;
  j["m_w"] = nlohmann::json::array();
  j["v_w"] = nlohmann::json::array();
  j["m_b"] = nlohmann::json::array();
  j["v_b"] = nlohmann::json::array();
  for (size_t k = 0; k < opt.m_w.size(); ++k) {
    j["m_w"].push_back(opt.m_w[k].data);
    j["v_w"].push_back(opt.v_w[k].data);
    j["m_b"].push_back(opt.m_b[k]);
    j["v_b"].push_back(opt.v_b[k]);
  }
  return j;
}

OptState opt_state_from_json(const nlohmann::json& j, const Network& net) {
  OptState o = make_opt_state(net);
  o.step = j.at("step").get<long>();
  for (size_t k = 0; k < net.layers.size(); ++k) {
    o.m_w[k].data = j.at("m_w").at(k).get<Vec>();
    o.v_w[k].data = j.at("v_w").at(k).get<Vec>();
    o.m_b[k] = j.at("m_b").at(k).get<Vec>();
    o.v_b[k] = j.at("v_b").at(k).get<Vec>();
    if (o.m_w[k].data.size() != net.layers[k].w.size() || o.m_b[k].size() != net.layers[k].b.size())
      throw ShapeError("opt_state_from_json: shape mismatch");
  }
  return o;
}

}  // namespace dars
