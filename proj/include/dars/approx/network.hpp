#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dars/common/mat.hpp"
#include "dars/common/rng.hpp"

#include <json.hpp>

namespace dars {

enum class Act { relu, tanh_, linear };

const char* act_name(Act a);
Act act_from_name(const std::string& name);

struct Layer {
  Mat w;   // [out x in]
  Vec b;   // [out]
  Act act = Act::linear;
};

// A named slice (offset, length) of the final layer's output. Lets one
// trunk serve several outputs (e.g. a policy's mean and log_std).
struct Head {
  int offset = 0;
  int len = 0;
};

struct Network {
  std::vector<Layer> layers;
  std::map<std::string, Head> heads;

  int in_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }
  size_t n_params() const;
};

// Glorot-uniform weights, zero biases. Hidden layers use `hidden_act`,
// the final layer is linear.
Network make_mlp(int in_dim, const std::vector<int>& hidden, int out_dim, Act hidden_act, Rng& rng);

// Post-activation outputs of every layer, kept for the backward pass.
// acts[0] is the input batch, acts[k] the output of layer k-1.
struct ForwardCache {
  std::vector<Mat> acts;
};

Vec forward(const Network& net, const Vec& x);
Mat forward_batch(const Network& net, const Mat& x, ForwardCache* cache = nullptr);

// Extract a named head's columns from a forward output batch.
Mat head_slice(const Network& net, const Mat& out, const std::string& head);

struct Gradients {
  std::vector<Mat> dw;
  std::vector<Vec> db;
};

Gradients zero_gradients(const Network& net);
void accumulate(Gradients& into, const Gradients& g, double scale = 1.0);

// Backpropagate d_out (∂loss/∂output, [n x out_dim]) through the cached
// forward pass. If d_in is non-null it receives ∂loss/∂input.
Gradients backward(const Network& net, const ForwardCache& cache, const Mat& d_out, Mat* d_in = nullptr);

// Generic gradient entry point: the callback receives the output batch and
// must fill d_out with ∂loss/∂output, returning the scalar loss. A non-finite
// loss raises NumericError naming the first offending batch row.
Gradients grad(const Network& net, const Mat& x_batch,
               const std::function<double(const Mat& out, Mat& d_out)>& loss);

struct OptState {
  std::vector<Mat> m_w, v_w;
  std::vector<Vec> m_b, v_b;
  long step = 0;
};

OptState make_opt_state(const Network& net);

// Adam with beta1=0.9, beta2=0.999, eps=1e-8 (bias-corrected).
void adam_step(Network& net, const Gradients& g, OptState& opt, double lr = 3e-4);

nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
nlohmann::json opt_state_to_json(const OptState& opt);
OptState opt_state_from_json(const nlohmann::json& j, const Network& net);

}  // namespace dars
