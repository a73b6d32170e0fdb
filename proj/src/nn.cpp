#include "tgn/nn.hpp"

#include <cmath>

namespace tgn::nn {

Tensor xavier_uniform(index fan_in, index fan_out, Rng& rng) {
  if (fan_in <= 0 || fan_out <= 0) throw Error("xavier_uniform: dimensions must be positive");
  const real bound = std::sqrt(static_cast<real>(6) / static_cast<real>(fan_in + fan_out));
  Tensor w(fan_in, fan_out);
  for (index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  return w;
}

Mlp make_mlp(const std::vector<index>& dims, Rng& rng, Activation hidden, Activation output) {
  if (dims.size() < 2) throw Error("make_mlp: need at least input and output dims");
  Mlp mlp;
  mlp.hidden = hidden;
  mlp.output = output;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer layer;
    layer.weight = xavier_uniform(dims[i], dims[i + 1], rng);
    layer.bias = Tensor(1, dims[i + 1]);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

namespace {

Tensor activate(const Tensor& x, Activation act) {
  switch (act) {
    case Activation::linear:
      return x;
    case Activation::relu:
      return relu(x);
    case Activation::sigmoid:
      return sigmoid(x);
    case Activation::tanh:
      return tanh(x);
  }
  throw Error("unknown activation");
}

}  // namespace

Tensor mlp_forward(const Mlp& mlp, const Tensor& x) {
  if (mlp.layers.empty()) throw Error("mlp_forward: empty network");
  if (x.cols() != mlp.in_dim()) {
    throw Error("mlp_forward: input " + x.shape_str() + " does not match first layer of " +
                std::to_string(mlp.in_dim()) + " inputs");
  }
  Tensor h = x;
  for (size_t i = 0; i < mlp.layers.size(); ++i) {
    h = add_rowvec(matmul(h, mlp.layers[i].weight), mlp.layers[i].bias);
    h = activate(h, i + 1 == mlp.layers.size() ? mlp.output : mlp.hidden);
  }
  return h;
}

LstmCell make_lstm(index input_dim, index hidden_dim, Rng& rng, bool layer_norm) {
  if (input_dim < 0 || hidden_dim <= 0) throw Error("make_lstm: bad dimensions");
  const index in = input_dim + hidden_dim;
  LstmCell cell;
  cell.w_input = xavier_uniform(in, hidden_dim, rng);
  cell.w_forget = xavier_uniform(in, hidden_dim, rng);
  cell.w_cell = xavier_uniform(in, hidden_dim, rng);
  cell.w_output = xavier_uniform(in, hidden_dim, rng);
  cell.b_input = Tensor(1, hidden_dim);
  cell.b_forget = Tensor::ones(1, hidden_dim);  // start remembering
  cell.b_cell = Tensor(1, hidden_dim);
  cell.b_output = Tensor(1, hidden_dim);
  cell.layer_norm = layer_norm;
  if (layer_norm) {
    cell.ln_gain_input = Tensor::ones(1, hidden_dim);
    cell.ln_bias_input = Tensor(1, hidden_dim);
    cell.ln_gain_forget = Tensor::ones(1, hidden_dim);
    cell.ln_bias_forget = Tensor(1, hidden_dim);
    cell.ln_gain_cell = Tensor::ones(1, hidden_dim);
    cell.ln_bias_cell = Tensor(1, hidden_dim);
    cell.ln_gain_output = Tensor::ones(1, hidden_dim);
    cell.ln_bias_output = Tensor(1, hidden_dim);
  }
  return cell;
}

LstmState lstm_step(const LstmCell& cell, const Tensor& input, const Tensor& h,
                    const Tensor& c) {
  const index n = cell.hidden_dim();
  if (input.cols() != cell.input_dim()) {
    throw Error("lstm_step: input " + input.shape_str() + " does not match cell input dim " +
                std::to_string(cell.input_dim()));
  }
  if (h.cols() != n || c.cols() != n || h.rows() != input.rows() || c.rows() != input.rows()) {
    throw Error("lstm_step: state shapes " + h.shape_str() + "/" + c.shape_str() +
                " do not match input " + input.shape_str());
  }
  const Tensor z = concat_cols(std::vector<Tensor>{input, h});
  auto gate = [&](const Tensor& w, const Tensor& b, const Tensor& ln_gain,
                  const Tensor& ln_bias) {
    Tensor pre = add_rowvec(matmul(z, w), b);
    if (cell.layer_norm) pre = layer_norm(pre, ln_gain, ln_bias);
    return pre;
  };
  const Tensor i = sigmoid(gate(cell.w_input, cell.b_input, cell.ln_gain_input, cell.ln_bias_input));
  const Tensor f =
      sigmoid(gate(cell.w_forget, cell.b_forget, cell.ln_gain_forget, cell.ln_bias_forget));
  const Tensor g = tanh(gate(cell.w_cell, cell.b_cell, cell.ln_gain_cell, cell.ln_bias_cell));
  const Tensor o =
      sigmoid(gate(cell.w_output, cell.b_output, cell.ln_gain_output, cell.ln_bias_output));
  LstmState next;
  next.c = add(mul(f, c), mul(i, g));
  next.h = mul(o, tanh(next.c));
  return next;
}

void collect_params(Mlp& mlp, const std::string& prefix, ParamMap& out) {
  for (size_t i = 0; i < mlp.layers.size(); ++i) {
    const std::string base = prefix + "/layer" + std::to_string(i);
    out[base + "/weight"] = &mlp.layers[i].weight;
    out[base + "/bias"] = &mlp.layers[i].bias;
  }
}

void collect_params(LstmCell& cell, const std::string& prefix, ParamMap& out) {
  out[prefix + "/input/weight"] = &cell.w_input;
  out[prefix + "/input/bias"] = &cell.b_input;
  out[prefix + "/forget/weight"] = &cell.w_forget;
  out[prefix + "/forget/bias"] = &cell.b_forget;
  out[prefix + "/cell/weight"] = &cell.w_cell;
  out[prefix + "/cell/bias"] = &cell.b_cell;
  out[prefix + "/output/weight"] = &cell.w_output;
  out[prefix + "/output/bias"] = &cell.b_output;
  if (cell.layer_norm) {
    out[prefix + "/input/ln_gain"] = &cell.ln_gain_input;
    out[prefix + "/input/ln_bias"] = &cell.ln_bias_input;
    out[prefix + "/forget/ln_gain"] = &cell.ln_gain_forget;
    out[prefix + "/forget/ln_bias"] = &cell.ln_bias_forget;
    out[prefix + "/cell/ln_gain"] = &cell.ln_gain_cell;
    out[prefix + "/cell/ln_bias"] = &cell.ln_bias_cell;
    out[prefix + "/output/ln_gain"] = &cell.ln_gain_output;
    out[prefix + "/output/ln_bias"] = &cell.ln_bias_output;
  }
}

void adam_step(AdamState& state, const ParamMap& params,
               const std::map<std::string, Tensor>& grads) {
  state.step += 1;
  const real t = static_cast<real>(state.step);
  const real corr1 = 1 - std::pow(state.beta1, t);
  const real corr2 = 1 - std::pow(state.beta2, t);
  for (const auto& [name, param] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) throw Error("adam_step: missing gradient for " + name);
    const Tensor& g = git->second;
    if (!g.same_shape(*param)) {
      throw Error("adam_step: gradient shape " + g.shape_str() + " does not match " + name);
    }
    Tensor& m = state.m.try_emplace(name, param->rows(), param->cols()).first->second;
    Tensor& v = state.v.try_emplace(name, param->rows(), param->cols()).first->second;
    for (index i = 0; i < param->size(); ++i) {
      const real gi = g.data()[i];
      m.data()[i] = state.beta1 * m.data()[i] + (1 - state.beta1) * gi;
      v.data()[i] = state.beta2 * v.data()[i] + (1 - state.beta2) * gi * gi;
      const real mhat = m.data()[i] / corr1;
      const real vhat = v.data()[i] / corr2;
      param->data()[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace tgn::nn
