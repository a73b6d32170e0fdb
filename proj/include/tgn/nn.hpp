#pragma once

#include <map>
#include <string>
#include <vector>

#include "tgn/rng.hpp"
#include "tgn/tensor.hpp"

namespace tgn::nn {

enum class Activation { linear, relu, sigmoid, tanh };

struct DenseLayer {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out
};

/// Multilayer perceptron applied row-wise (each row an independent vertex).
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation hidden = Activation::relu;
  Activation output = Activation::linear;

  index in_dim() const { return layers.front().weight.rows(); }
  index out_dim() const { return layers.back().weight.cols(); }
};

/// dims = [in, hidden..., out]; Xavier-uniform weights, zero biases.
Mlp make_mlp(const std::vector<index>& dims, Rng& rng,
             Activation hidden = Activation::relu,
             Activation output = Activation::linear);

Tensor mlp_forward(const Mlp& mlp, const Tensor& x);

/// Standard LSTM cell over the concatenation [input || hidden]. When
/// `layer_norm` is set, each gate preactivation is layer-normalized with
/// learned gain and bias before its nonlinearity.
struct LstmCell {
  Tensor w_input, w_forget, w_cell, w_output;  // (in+hidden) x hidden
  Tensor b_input, b_forget, b_cell, b_output;  // 1 x hidden
  bool layer_norm = false;
  Tensor ln_gain_input, ln_bias_input;
  Tensor ln_gain_forget, ln_bias_forget;
  Tensor ln_gain_cell, ln_bias_cell;
  Tensor ln_gain_output, ln_bias_output;

  index input_dim() const { return w_input.rows() - hidden_dim(); }
  index hidden_dim() const { return w_input.cols(); }
};

struct LstmState {
  Tensor h;  // emitted embedding
  Tensor c;  // carried cell state
};

/// Xavier-uniform gate weights, zero biases except the forget bias at +1.
LstmCell make_lstm(index input_dim, index hidden_dim, Rng& rng, bool layer_norm = false);

LstmState lstm_step(const LstmCell& cell, const Tensor& input, const Tensor& h,
                    const Tensor& c);

/// Xavier-uniform fill: U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(index fan_in, index fan_out, Rng& rng);

/// Named views over every parameter tensor of a component, in a fixed order.
using ParamMap = std::map<std::string, Tensor*>;

void collect_params(Mlp& mlp, const std::string& prefix, ParamMap& out);
void collect_params(LstmCell& cell, const std::string& prefix, ParamMap& out);

/// Adam with bias correction. Moment tensors are keyed by parameter name and
/// mirror the parameter shapes.
struct AdamState {
  real lr = static_cast<real>(2e-4);
  real beta1 = static_cast<real>(0.9);
  real beta2 = static_cast<real>(0.999);
  real eps = static_cast<real>(1e-8);
  std::int64_t step = 0;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

/// One update over every parameter in `params`; a parameter without an entry
/// in `grads` is an error.
void adam_step(AdamState& state, const ParamMap& params,
               const std::map<std::string, Tensor>& grads);

}  // namespace tgn::nn
