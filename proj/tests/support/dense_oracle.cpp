#include "support/dense_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace tgn::testing {

namespace {

Mat make(size_t rows, size_t cols) { return Mat(rows, std::vector<double>(cols, 0.0)); }

double act(double x, nn::Activation a) {
  switch (a) {
    case nn::Activation::linear: return x;
    case nn::Activation::relu: return x > 0 ? x : 0;
    case nn::Activation::sigmoid:
      return x >= 0 ? 1 / (1 + std::exp(-x)) : std::exp(x) / (1 + std::exp(x));
    case nn::Activation::tanh: return std::tanh(x);
  }
  throw std::runtime_error("oracle: unknown activation");
}

}  // namespace

Mat to_mat(const Tensor& t) {
  Mat m = make(static_cast<size_t>(t.rows()), static_cast<size_t>(t.cols()));
  for (index i = 0; i < t.rows(); ++i) {
    for (index j = 0; j < t.cols(); ++j) {
      m[static_cast<size_t>(i)][static_cast<size_t>(j)] = t(i, j);
    }
  }
  return m;
}

Tensor to_tensor(const Mat& m) {
  const index rows = static_cast<index>(m.size());
  const index cols = rows == 0 ? 0 : static_cast<index>(m[0].size());
  Tensor t(rows, cols);
  for (index i = 0; i < rows; ++i) {
    for (index j = 0; j < cols; ++j) {
      t(i, j) = static_cast<real>(m[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    }
  }
  return t;
}

Mat dense_of(const SparseBinaryMatrix& m) {
  Mat d = make(static_cast<size_t>(m.rows()), static_cast<size_t>(m.cols()));
  for (const auto& [r, c] : m.entries()) d[static_cast<size_t>(r)][static_cast<size_t>(c)] = 1.0;
  return d;
}

Mat oracle_mlp(const nn::Mlp& mlp, const Mat& x) {
  Mat h = x;
  for (size_t layer = 0; layer < mlp.layers.size(); ++layer) {
    const Mat w = to_mat(mlp.layers[layer].weight);
    const Mat b = to_mat(mlp.layers[layer].bias);
    const nn::Activation a = layer + 1 == mlp.layers.size() ? mlp.output : mlp.hidden;
    Mat next = make(h.size(), w[0].size());
    for (size_t i = 0; i < h.size(); ++i) {
      for (size_t j = 0; j < w[0].size(); ++j) {
        double acc = b[0][j];
        for (size_t p = 0; p < w.size(); ++p) acc += h[i][p] * w[p][j];
        next[i][j] = act(acc, a);
      }
    }
    h = std::move(next);
  }
  return h;
}

std::pair<Mat, Mat> oracle_lstm(const nn::LstmCell& cell, const Mat& input, const Mat& h,
                                const Mat& c) {
  if (cell.layer_norm) throw std::runtime_error("oracle: layer norm cells not supported");
  const size_t rows = input.size();
  const size_t hidden = static_cast<size_t>(cell.hidden_dim());
  const size_t in_cols = static_cast<size_t>(cell.input_dim());
  const Mat wi = to_mat(cell.w_input), wf = to_mat(cell.w_forget), wg = to_mat(cell.w_cell),
            wo = to_mat(cell.w_output);
  const Mat bi = to_mat(cell.b_input), bf = to_mat(cell.b_forget), bg = to_mat(cell.b_cell),
            bo = to_mat(cell.b_output);

  auto gate = [&](const Mat& w, const Mat& b, size_t row, size_t j) {
    double acc = b[0][j];
    for (size_t p = 0; p < in_cols; ++p) acc += input[row][p] * w[p][j];
    for (size_t p = 0; p < hidden; ++p) acc += h[row][p] * w[in_cols + p][j];
    return acc;
  };

  Mat h_next = make(rows, hidden);
  Mat c_next = make(rows, hidden);
  for (size_t row = 0; row < rows; ++row) {
    for (size_t j = 0; j < hidden; ++j) {
      const double i_g = act(gate(wi, bi, row, j), nn::Activation::sigmoid);
      const double f_g = act(gate(wf, bf, row, j), nn::Activation::sigmoid);
      const double g_g = act(gate(wg, bg, row, j), nn::Activation::tanh);
      const double o_g = act(gate(wo, bo, row, j), nn::Activation::sigmoid);
      c_next[row][j] = f_g * c[row][j] + i_g * g_g;
      h_next[row][j] = o_g * std::tanh(c_next[row][j]);
    }
  }
  return {std::move(h_next), std::move(c_next)};
}

std::map<std::string, Mat> oracle_run(const CompiledTgn& plan, const TgnParams& params,
                                      const GraphBatch& batch, int t_max) {
  std::map<std::string, Mat> embeddings;
  std::map<std::string, Mat> cells;
  for (const std::string& type : plan.types) {
    embeddings[type] = to_mat(batch.embeddings.at(type));
    auto hit = batch.hidden.find(type);
    if (hit != batch.hidden.end()) {
      cells[type] = to_mat(hit->second);
    } else {
      cells[type] = make(embeddings[type].size(), static_cast<size_t>(plan.size_of(type)));
    }
  }

  for (int t = 0; t < t_max; ++t) {
    const auto snapshot = embeddings;
    const auto cell_snapshot = cells;
    for (const CompiledUpdate& update : plan.updates) {
      const size_t rows = snapshot.at(update.type).size();
      Mat block = make(rows, static_cast<size_t>(update.message_width));
      size_t col_base = 0;
      for (const AggregationTerm& term : update.terms) {
        Mat msg = snapshot.at(term.var);
        if (term.msg.has_value()) msg = oracle_mlp(params.messages.at(*term.msg), msg);
        const Mat adj = dense_of(batch.matrices.at(term.mat));
        const size_t out_cols = static_cast<size_t>(update.width);
        for (size_t a = 0; a < rows; ++a) {
          for (size_t j = 0; j < out_cols; ++j) {
            double acc = 0;
            for (size_t b = 0; b < msg.size(); ++b) {
              const double entry = term.transpose ? adj[b][a] : adj[a][b];
              acc += entry * msg[b][j];
            }
            block[a][col_base + j] = acc;
          }
        }
        col_base += out_cols;
      }
      auto [h_next, c_next] =
          oracle_lstm(params.updates.at(update.type), block, snapshot.at(update.type),
                      cell_snapshot.at(update.type));
      embeddings[update.type] = std::move(h_next);
      cells[update.type] = std::move(c_next);
    }
  }
  return embeddings;
}

double max_abs_diff(const Mat& a, const Tensor& b) {
  if (static_cast<index>(a.size()) != b.rows()) return 1e30;
  double worst = 0;
  for (index i = 0; i < b.rows(); ++i) {
    if (static_cast<index>(a[static_cast<size_t>(i)].size()) != b.cols()) return 1e30;
    for (index j = 0; j < b.cols(); ++j) {
      worst = std::max(worst, std::abs(a[static_cast<size_t>(i)][static_cast<size_t>(j)] -
                                       static_cast<double>(b(i, j))));
    }
  }
  return worst;
}

}  // namespace tgn::testing
