#include "tgn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tgn {

namespace {

void check_finite(const Tensor& t, const char* where) {
  for (real v : t.data()) {
    if (!std::isfinite(v)) {
      throw Error(std::string(where) + ": produced a non-finite value");
    }
  }
}

Tape* joint_tape(std::initializer_list<const Tensor*> inputs, const char* op) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (t->tape() == nullptr) continue;
    if (tape != nullptr && tape != t->tape()) {
      throw Error(std::string(op) + ": inputs belong to different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

void finish_op(Tensor& out, const char* op, std::initializer_list<const Tensor*> inputs,
               Tape::BackwardFn backward) {
  check_finite(out, op);
  Tape* tape = joint_tape(inputs, op);
  if (tape == nullptr) return;
  std::vector<NodeId> ids;
  ids.reserve(inputs.size());
  for (const Tensor* t : inputs) ids.push_back(t->tape() ? t->node() : kNoNode);
  tape->record_result(out, std::move(ids), std::move(backward));
}

// Plain value kernels used in forward and backward passes; never recorded.
Tensor val_matmul_nn(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.cols());
  for (index i = 0; i < a.rows(); ++i) {
    for (index p = 0; p < a.cols(); ++p) {
      const real aip = a(i, p);
      if (aip == 0) continue;
      for (index j = 0; j < b.cols(); ++j) out(i, j) += aip * b(p, j);
    }
  }
  return out;
}

Tensor val_matmul_nt(const Tensor& a, const Tensor& b) {  // a * b^T
  Tensor out(a.rows(), b.rows());
  for (index i = 0; i < a.rows(); ++i) {
    for (index j = 0; j < b.rows(); ++j) {
      real acc = 0;
      for (index p = 0; p < a.cols(); ++p) acc += a(i, p) * b(j, p);
      out(i, j) = acc;
    }
  }
  return out;
}

Tensor val_matmul_tn(const Tensor& a, const Tensor& b) {  // a^T * b
  Tensor out(a.cols(), b.cols());
  for (index p = 0; p < a.rows(); ++p) {
    for (index i = 0; i < a.cols(); ++i) {
      const real api = a(p, i);
      if (api == 0) continue;
      for (index j = 0; j < b.cols(); ++j) out(i, j) += api * b(p, j);
    }
  }
  return out;
}

// y = M x (or M^T x). `inv_scale`, when given, multiplies output row r by
// inv_scale[r] after accumulation.
Tensor val_spmm(const SparseBinaryMatrix& m, const Tensor& x, bool transpose,
                const std::vector<real>* inv_scale) {
  const index d = x.cols();
  const index out_rows = transpose ? m.cols() : m.rows();
  Tensor out(out_rows, d);
  auto row_ptr = m.row_ptr();
  auto col_idx = m.col_idx();
  for (index a = 0; a < m.rows(); ++a) {
    for (index k = row_ptr[a]; k < row_ptr[a + 1]; ++k) {
      const index b = col_idx[k];
      const index src = transpose ? a : b;
      const index dst = transpose ? b : a;
      for (index j = 0; j < d; ++j) out(dst, j) += x(src, j);
    }
  }
  if (inv_scale != nullptr) {
    for (index r = 0; r < out_rows; ++r) {
      const real s = (*inv_scale)[r];
      for (index j = 0; j < d; ++j) out(r, j) *= s;
    }
  }
  return out;
}

std::vector<real> spmm_inv_counts(const SparseBinaryMatrix& m, bool transpose) {
  const index out_rows = transpose ? m.cols() : m.rows();
  std::vector<index> counts(out_rows, 0);
  auto row_ptr = m.row_ptr();
  auto col_idx = m.col_idx();
  if (transpose) {
    for (index k = 0; k < m.nnz(); ++k) counts[col_idx[k]]++;
  } else {
    for (index a = 0; a < m.rows(); ++a) counts[a] = row_ptr[a + 1] - row_ptr[a];
  }
  std::vector<real> inv(out_rows, 0);
  for (index r = 0; r < out_rows; ++r) {
    if (counts[r] > 0) inv[r] = static_cast<real>(1) / static_cast<real>(counts[r]);
  }
  return inv;
}

Tensor col_sums(const Tensor& x) {  // 1 x n
  Tensor out(1, x.cols());
  for (index i = 0; i < x.rows(); ++i) {
    for (index j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
  }
  return out;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace

// -- Tensor -------------------------------------------------------------

Tensor::Tensor(index rows, index cols) : rows_(rows), cols_(cols) {
  require(rows >= 0 && cols >= 0, "tensor: negative dimension");
  data_.assign(static_cast<size_t>(rows * cols), 0);
}

Tensor::Tensor(index rows, index cols, std::vector<real> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(rows >= 0 && cols >= 0, "tensor: negative dimension");
  require(static_cast<index>(data_.size()) == rows * cols,
          "tensor: value count does not match " + shape_str());
  check_finite(*this, "tensor");
}

Tensor Tensor::full(index rows, index cols, real value) {
  Tensor t(rows, cols);
  std::fill(t.data_.begin(), t.data_.end(), value);
  check_finite(t, "tensor");
  return t;
}

Tensor Tensor::row(std::initializer_list<real> values) {
  return Tensor(1, static_cast<index>(values.size()), std::vector<real>(values));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<real>> rows) {
  const index r = static_cast<index>(rows.size());
  const index c = r == 0 ? 0 : static_cast<index>(rows.begin()->size());
  std::vector<real> data;
  data.reserve(static_cast<size_t>(r * c));
  for (const auto& row : rows) {
    require(static_cast<index>(row.size()) == c, "tensor: ragged row literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

real Tensor::value() const {
  require(rows_ == 1 && cols_ == 1, "value(): tensor is " + shape_str() + ", not 1x1");
  return data_[0];
}

std::string Tensor::shape_str() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

// -- SparseBinaryMatrix ---------------------------------------------------

SparseBinaryMatrix::SparseBinaryMatrix(index rows, index cols) : rows_(rows), cols_(cols) {
  require(rows >= 0 && cols >= 0, "sparse matrix: negative dimension");
  row_ptr_.assign(static_cast<size_t>(rows) + 1, 0);
}

SparseBinaryMatrix SparseBinaryMatrix::from_pairs(
    index rows, index cols, std::vector<std::pair<index, index>> entries) {
  SparseBinaryMatrix m(rows, cols);
  for (const auto& [r, c] : entries) {
    require(r >= 0 && r < rows && c >= 0 && c < cols,
            "sparse matrix: entry (" + std::to_string(r) + "," + std::to_string(c) +
                ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  m.col_idx_.reserve(entries.size());
  for (const auto& [r, c] : entries) {
    m.row_ptr_[static_cast<size_t>(r) + 1]++;
    m.col_idx_.push_back(c);
  }
  for (index r = 0; r < rows; ++r) m.row_ptr_[static_cast<size_t>(r) + 1] += m.row_ptr_[r];
  return m;
}

SparseBinaryMatrix SparseBinaryMatrix::all_ones(index rows, index cols) {
  SparseBinaryMatrix m(rows, cols);
  m.col_idx_.reserve(static_cast<size_t>(rows * cols));
  for (index r = 0; r < rows; ++r) {
    m.row_ptr_[static_cast<size_t>(r) + 1] = m.row_ptr_[r] + cols;
    for (index c = 0; c < cols; ++c) m.col_idx_.push_back(c);
  }
  return m;
}

bool SparseBinaryMatrix::contains(index r, index c) const {
  if (r < 0 || r >= rows_) return false;
  auto begin = col_idx_.begin() + row_ptr_[r];
  auto end = col_idx_.begin() + row_ptr_[r + 1];
  return std::binary_search(begin, end, c);
}

bool SparseBinaryMatrix::has_self_loops() const {
  for (index r = 0; r < rows_; ++r) {
    if (contains(r, r)) return true;
  }
  return false;
}

std::vector<std::pair<index, index>> SparseBinaryMatrix::entries() const {
  std::vector<std::pair<index, index>> out;
  out.reserve(col_idx_.size());
  for (index r = 0; r < rows_; ++r) {
    for (index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.emplace_back(r, col_idx_[k]);
  }
  return out;
}

Tensor SparseBinaryMatrix::densify() const {
  Tensor out(rows_, cols_);
  for (const auto& [r, c] : entries()) out(r, c) = 1;
  return out;
}

// -- Tape -----------------------------------------------------------------

NodeId Tape::watch(Tensor& t) {
  if (t.tape() == this && t.node_ != kNoNode) return t.node_;
  nodes_.push_back(Node{{}, nullptr});
  t.tape_ = this;
  t.tape_token_ = token_;
  t.node_ = static_cast<NodeId>(nodes_.size()) - 1;
  t.requires_grad_ = true;
  return t.node_;
}

NodeId Tape::record_result(Tensor& out, std::vector<NodeId> inputs, BackwardFn backward) {
  nodes_.push_back(Node{std::move(inputs), std::move(backward)});
  out.tape_ = this;
  out.tape_token_ = token_;
  out.node_ = static_cast<NodeId>(nodes_.size()) - 1;
  out.requires_grad_ = true;
  return out.node_;
}

const Tensor& Gradients::at(NodeId id) const {
  if (!contains(id)) {
    throw Error("gradients: no gradient for node " + std::to_string(id));
  }
  return *grads_[id];
}

Gradients Tape::backward(const Tensor& loss) const {
  if (loss.tape() != this || loss.node() == kNoNode) {
    throw Error("backward: loss is not recorded on this tape");
  }
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw Error("backward: loss must be 1x1, got " + loss.shape_str());
  }
  Gradients out;
  out.grads_.resize(nodes_.size());
  out.grads_[loss.node()] = Tensor::ones(1, 1);
  for (NodeId id = loss.node(); id >= 0; --id) {
    const Node& node = nodes_[id];
    if (!out.grads_[id].has_value() || !node.backward) continue;
    std::vector<Tensor> input_grads = node.backward(*out.grads_[id]);
    if (input_grads.size() != node.inputs.size()) {
      throw Error("backward: op returned wrong gradient count");
    }
    for (size_t k = 0; k < input_grads.size(); ++k) {
      const NodeId in = node.inputs[k];
      if (in == kNoNode) continue;
      Tensor& g = input_grads[k];
      std::optional<Tensor>& slot = out.grads_[in];
      if (!slot.has_value()) {
        slot = std::move(g);
      } else {
        require(slot->same_shape(g), "backward: gradient shape mismatch");
        for (index i = 0; i < g.size(); ++i) slot->data()[i] += g.data()[i];
      }
    }
  }
  return out;
}

Gradients backward(const Tape& tape, const Tensor& loss) { return tape.backward(loss); }

// -- ops --------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(),
          "matmul: inner dimensions disagree, " + a.shape_str() + " x " + b.shape_str());
  Tensor out = val_matmul_nn(a, b);
  const bool need_a = a.tape() != nullptr;
  const bool need_b = b.tape() != nullptr;
  finish_op(out, "matmul", {&a, &b},
            [va = a, vb = b, need_a, need_b](const Tensor& up) {
              std::vector<Tensor> g(2);
              if (need_a) g[0] = val_matmul_nt(up, vb);
              if (need_b) g[1] = val_matmul_tn(va, up);
              return g;
            });
  return out;
}

Tensor spmm(const SparseBinaryMatrix& m, const Tensor& x, bool transpose, Aggregation agg) {
  const index need_rows = transpose ? m.rows() : m.cols();
  require(x.rows() == need_rows,
          "spmm: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
              (transpose ? " (transposed)" : "") + " cannot multiply " + x.shape_str());
  std::vector<real> inv;
  if (agg == Aggregation::mean) inv = spmm_inv_counts(m, transpose);
  Tensor out = val_spmm(m, x, transpose, agg == Aggregation::mean ? &inv : nullptr);
  const bool need_x = x.tape() != nullptr;
  finish_op(out, "spmm", {&x},
            [m, transpose, agg, inv = std::move(inv), need_x](const Tensor& up) {
              std::vector<Tensor> g(1);
              if (!need_x) return g;
              if (agg == Aggregation::sum) {
                g[0] = val_spmm(m, up, !transpose, nullptr);
              } else {
                Tensor scaled = up;
                for (index r = 0; r < scaled.rows(); ++r) {
                  for (index j = 0; j < scaled.cols(); ++j) scaled(r, j) *= inv[r];
                }
                g[0] = val_spmm(m, scaled, !transpose, nullptr);
              }
              return g;
            });
  return out;
}

namespace {

template <typename Fwd, typename Bwd>
Tensor binary_elementwise(const char* name, const Tensor& a, const Tensor& b, Fwd fwd,
                          Bwd grads) {
  require(a.same_shape(b), std::string(name) + ": shape mismatch " + a.shape_str() + " vs " +
                               b.shape_str());
  Tensor out(a.rows(), a.cols());
  for (index i = 0; i < a.size(); ++i) out.data()[i] = fwd(a.data()[i], b.data()[i]);
  const bool need_a = a.tape() != nullptr;
  const bool need_b = b.tape() != nullptr;
  finish_op(out, name, {&a, &b}, [va = a, vb = b, need_a, need_b, grads](const Tensor& up) {
    std::vector<Tensor> g(2);
    if (need_a) {
      g[0] = Tensor(va.rows(), va.cols());
      for (index i = 0; i < va.size(); ++i) {
        g[0].data()[i] = up.data()[i] * grads(va.data()[i], vb.data()[i], true);
      }
    }
    if (need_b) {
      g[1] = Tensor(va.rows(), va.cols());
      for (index i = 0; i < va.size(); ++i) {
        g[1].data()[i] = up.data()[i] * grads(va.data()[i], vb.data()[i], false);
      }
    }
    return g;
  });
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "add", a, b, [](real x, real y) { return x + y; },
      [](real, real, bool) -> real { return 1; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "sub", a, b, [](real x, real y) { return x - y; },
      [](real, real, bool wrt_a) -> real { return wrt_a ? 1 : -1; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "mul", a, b, [](real x, real y) { return x * y; },
      [](real x, real y, bool wrt_a) -> real { return wrt_a ? y : x; });
}

real stable_sigmoid(real x) {
  if (x >= 0) {
    const real e = std::exp(-x);
    return 1 / (1 + e);
  }
  const real e = std::exp(x);
  return e / (1 + e);
}

Tensor relu(const Tensor& x) {
  Tensor out(x.rows(), x.cols());
  for (index i = 0; i < x.size(); ++i) out.data()[i] = x.data()[i] > 0 ? x.data()[i] : 0;
  finish_op(out, "relu", {&x}, [vx = x](const Tensor& up) {
    std::vector<Tensor> g(1);
    g[0] = Tensor(vx.rows(), vx.cols());
    for (index i = 0; i < vx.size(); ++i) {
      g[0].data()[i] = vx.data()[i] > 0 ? up.data()[i] : 0;
    }
    return g;
  });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.rows(), x.cols());
  for (index i = 0; i < x.size(); ++i) out.data()[i] = stable_sigmoid(x.data()[i]);
  finish_op(out, "sigmoid", {&x}, [s = out](const Tensor& up) {
    std::vector<Tensor> g(1);
    g[0] = Tensor(s.rows(), s.cols());
    for (index i = 0; i < s.size(); ++i) {
      const real si = s.data()[i];
      g[0].data()[i] = up.data()[i] * si * (1 - si);
    }
    return g;
  });
  return out;
}

Tensor tanh(const Tensor& x) {
  Tensor out(x.rows(), x.cols());
  for (index i = 0; i < x.size(); ++i) out.data()[i] = std::tanh(x.data()[i]);
  finish_op(out, "tanh", {&x}, [y = out](const Tensor& up) {
    std::vector<Tensor> g(1);
    g[0] = Tensor(y.rows(), y.cols());
    for (index i = 0; i < y.size(); ++i) {
      const real yi = y.data()[i];
      g[0].data()[i] = up.data()[i] * (1 - yi * yi);
    }
    return g;
  });
  return out;
}

namespace {

Tensor concat_impl(std::span<const Tensor> parts, bool by_rows, const char* name) {
  require(!parts.empty(), std::string(name) + ": no parts");
  const index fixed = by_rows ? parts[0].cols() : parts[0].rows();
  index total = 0;
  for (const Tensor& p : parts) {
    require((by_rows ? p.cols() : p.rows()) == fixed,
            std::string(name) + ": part " + p.shape_str() + " does not match " +
                parts[0].shape_str());
    total += by_rows ? p.rows() : p.cols();
  }
  Tensor out = by_rows ? Tensor(total, fixed) : Tensor(fixed, total);
  index offset = 0;
  for (const Tensor& p : parts) {
    if (by_rows) {
      for (index i = 0; i < p.rows(); ++i) {
        for (index j = 0; j < p.cols(); ++j) out(offset + i, j) = p(i, j);
      }
      offset += p.rows();
    } else {
      for (index i = 0; i < p.rows(); ++i) {
        for (index j = 0; j < p.cols(); ++j) out(i, offset + j) = p(i, j);
      }
      offset += p.cols();
    }
  }

  check_finite(out, name);
  Tape* tape = nullptr;
  {
    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    for (const Tensor* t : ptrs) {
      if (t->tape() == nullptr) continue;
      require(tape == nullptr || tape == t->tape(),
              std::string(name) + ": inputs belong to different tapes");
      tape = t->tape();
    }
  }
  if (tape == nullptr) return out;

  std::vector<NodeId> ids;
  std::vector<index> extents;
  std::vector<char> need;
  for (const Tensor& p : parts) {
    ids.push_back(p.tape() ? p.node() : kNoNode);
    extents.push_back(by_rows ? p.rows() : p.cols());
    need.push_back(p.tape() != nullptr);
  }
  tape->record_result(out, std::move(ids),
                      [extents, need, fixed, by_rows](const Tensor& up) {
                        std::vector<Tensor> g(extents.size());
                        index offset = 0;
                        for (size_t k = 0; k < extents.size(); ++k) {
                          const index e = extents[k];
                          if (need[k]) {
                            Tensor slice = by_rows ? Tensor(e, fixed) : Tensor(fixed, e);
                            if (by_rows) {
                              for (index i = 0; i < e; ++i) {
                                for (index j = 0; j < fixed; ++j) slice(i, j) = up(offset + i, j);
                              }
                            } else {
                              for (index i = 0; i < fixed; ++i) {
                                for (index j = 0; j < e; ++j) slice(i, j) = up(i, offset + j);
                              }
                            }
                            g[k] = std::move(slice);
                          }
                          offset += e;
                        }
                        return g;
                      });
  return out;
}

}  // namespace

Tensor concat_cols(std::span<const Tensor> parts) { return concat_impl(parts, false, "concat_cols"); }
Tensor concat_cols(const std::vector<Tensor>& parts) {
  return concat_cols(std::span<const Tensor>(parts));
}
Tensor concat_rows(std::span<const Tensor> parts) { return concat_impl(parts, true, "concat_rows"); }
Tensor concat_rows(const std::vector<Tensor>& parts) {
  return concat_rows(std::span<const Tensor>(parts));
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  require(v.rows() == 1 && v.cols() == x.cols(),
          "add_rowvec: expected 1x" + std::to_string(x.cols()) + " row vector, got " +
              v.shape_str());
  Tensor out(x.rows(), x.cols());
  for (index i = 0; i < x.rows(); ++i) {
    for (index j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) + v(0, j);
  }
  const bool need_x = x.tape() != nullptr;
  const bool need_v = v.tape() != nullptr;
  finish_op(out, "add_rowvec", {&x, &v}, [need_x, need_v](const Tensor& up) {
    std::vector<Tensor> g(2);
    if (need_x) g[0] = up;
    if (need_v) g[1] = col_sums(up);
    return g;
  });
  return out;
}

Tensor tile_rows(const Tensor& v, index count) {
  require(v.rows() == 1, "tile_rows: expected a 1xN row vector, got " + v.shape_str());
  require(count >= 0, "tile_rows: negative count");
  Tensor out(count, v.cols());
  for (index i = 0; i < count; ++i) {
    for (index j = 0; j < v.cols(); ++j) out(i, j) = v(0, j);
  }
  const bool need_v = v.tape() != nullptr;
  finish_op(out, "tile_rows", {&v}, [need_v](const Tensor& up) {
    std::vector<Tensor> g(1);
    if (need_v) g[0] = col_sums(up);
    return g;
  });
  return out;
}

Tensor gather_rows(const Tensor& x, const std::vector<index>& rows) {
  for (index r : rows) {
    require(r >= 0 && r < x.rows(),
            "gather_rows: row " + std::to_string(r) + " outside " + x.shape_str());
  }
  Tensor out(static_cast<index>(rows.size()), x.cols());
  for (index p = 0; p < out.rows(); ++p) {
    for (index j = 0; j < x.cols(); ++j) out(p, j) = x(rows[p], j);
  }
  const bool need_x = x.tape() != nullptr;
  finish_op(out, "gather_rows", {&x},
            [rows, r = x.rows(), c = x.cols(), need_x](const Tensor& up) {
              std::vector<Tensor> g(1);
              if (need_x) {
                Tensor dx(r, c);
                for (index p = 0; p < up.rows(); ++p) {
                  for (index j = 0; j < c; ++j) dx(rows[p], j) += up(p, j);
                }
                g[0] = std::move(dx);
              }
              return g;
            });
  return out;
}

Tensor segment_mean(const Tensor& x, const std::vector<index>& segment_of, index num_segments) {
  require(static_cast<index>(segment_of.size()) == x.rows(),
          "segment_mean: membership length " + std::to_string(segment_of.size()) +
              " does not match " + x.shape_str());
  require(num_segments >= 1, "segment_mean: need at least one segment");
  std::vector<index> counts(num_segments, 0);
  for (index s : segment_of) {
    require(s >= 0 && s < num_segments, "segment_mean: segment index " + std::to_string(s) +
                                            " outside 0.." + std::to_string(num_segments - 1));
    counts[s]++;
  }
  for (index g = 0; g < num_segments; ++g) {
    require(counts[g] > 0, "segment_mean: segment " + std::to_string(g) + " is empty");
  }
  Tensor out(num_segments, x.cols());
  for (index i = 0; i < x.rows(); ++i) {
    for (index j = 0; j < x.cols(); ++j) out(segment_of[i], j) += x(i, j);
  }
  for (index g = 0; g < num_segments; ++g) {
    for (index j = 0; j < x.cols(); ++j) out(g, j) /= static_cast<real>(counts[g]);
  }
  const bool need_x = x.tape() != nullptr;
  finish_op(out, "segment_mean", {&x},
            [segment_of, counts, r = x.rows(), c = x.cols(), need_x](const Tensor& up) {
              std::vector<Tensor> g(1);
              if (need_x) {
                Tensor dx(r, c);
                for (index i = 0; i < r; ++i) {
                  const real inv = 1 / static_cast<real>(counts[segment_of[i]]);
                  for (index j = 0; j < c; ++j) dx(i, j) = up(segment_of[i], j) * inv;
                }
                g[0] = std::move(dx);
              }
              return g;
            });
  return out;
}

Tensor sum(const Tensor& x) {
  real acc = 0;
  for (real v : x.data()) acc += v;
  Tensor out = Tensor::scalar(acc);
  finish_op(out, "sum", {&x}, [r = x.rows(), c = x.cols()](const Tensor& up) {
    std::vector<Tensor> g(1);
    g[0] = Tensor::full(r, c, up.data()[0]);
    return g;
  });
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, real eps) {
  const index n = x.cols();
  require(gain.rows() == 1 && gain.cols() == n && bias.rows() == 1 && bias.cols() == n,
          "layer_norm: gain/bias must be 1x" + std::to_string(n));
  require(n > 0, "layer_norm: empty rows");
  Tensor out(x.rows(), n);
  for (index i = 0; i < x.rows(); ++i) {
    real mean = 0;
    for (index j = 0; j < n; ++j) mean += x(i, j);
    mean /= static_cast<real>(n);
    real var = 0;
    for (index j = 0; j < n; ++j) {
      const real d = x(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<real>(n);
    const real inv_std = 1 / std::sqrt(var + eps);
    for (index j = 0; j < n; ++j) {
      out(i, j) = gain(0, j) * ((x(i, j) - mean) * inv_std) + bias(0, j);
    }
  }
  const bool need_x = x.tape() != nullptr;
  const bool need_gain = gain.tape() != nullptr;
  const bool need_bias = bias.tape() != nullptr;
  finish_op(out, "layer_norm", {&x, &gain, &bias},
            [vx = x, vgain = gain, eps, need_x, need_gain, need_bias](const Tensor& up) {
              const index rows = vx.rows(), n = vx.cols();
              std::vector<Tensor> g(3);
              if (need_x) g[0] = Tensor(rows, n);
              if (need_gain) g[1] = Tensor(1, n);
              if (need_bias) g[2] = Tensor(1, n);
              const real nn = static_cast<real>(n);
              std::vector<real> xhat(static_cast<size_t>(n));
              for (index i = 0; i < rows; ++i) {
                real mean = 0;
                for (index j = 0; j < n; ++j) mean += vx(i, j);
                mean /= nn;
                real var = 0;
                for (index j = 0; j < n; ++j) {
                  const real d = vx(i, j) - mean;
                  var += d * d;
                }
                var /= nn;
                const real inv_std = 1 / std::sqrt(var + eps);
                for (index j = 0; j < n; ++j) xhat[j] = (vx(i, j) - mean) * inv_std;
                if (need_gain || need_bias) {
                  for (index j = 0; j < n; ++j) {
                    if (need_gain) g[1](0, j) += up(i, j) * xhat[j];
                    if (need_bias) g[2](0, j) += up(i, j);
                  }
                }
                if (need_x) {
                  real sum_dxhat = 0, sum_dxhat_xhat = 0;
                  for (index j = 0; j < n; ++j) {
                    const real dxh = up(i, j) * vgain(0, j);
                    sum_dxhat += dxh;
                    sum_dxhat_xhat += dxh * xhat[j];
                  }
                  for (index j = 0; j < n; ++j) {
                    const real dxh = up(i, j) * vgain(0, j);
                    g[0](i, j) =
                        inv_std * (dxh - sum_dxhat / nn - xhat[j] * sum_dxhat_xhat / nn);
                  }
                }
              }
              return g;
            });
  return out;
}

Tensor bce_with_logits(const Tensor& logits, const std::vector<real>& labels) {
  require(logits.cols() == 1, "bce_with_logits: logits must be Nx1, got " + logits.shape_str());
  require(logits.rows() >= 1, "bce_with_logits: empty batch");
  require(static_cast<index>(labels.size()) == logits.rows(),
          "bce_with_logits: " + std::to_string(labels.size()) + " labels for " +
              logits.shape_str() + " logits");
  for (real y : labels) {
    require(y == 0 || y == 1, "bce_with_logits: label " + std::to_string(y) + " is not 0 or 1");
  }
  const index n = logits.rows();
  real acc = 0;
  for (index i = 0; i < n; ++i) {
    const real z = logits(i, 0);
    const real y = labels[i];
    acc += std::max<real>(z, 0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor out = Tensor::scalar(acc / static_cast<real>(n));
  const bool need = logits.tape() != nullptr;
  finish_op(out, "bce_with_logits", {&logits}, [vz = logits, labels, need](const Tensor& up) {
    std::vector<Tensor> g(1);
    if (need) {
      const index n = vz.rows();
      Tensor dz(n, 1);
      const real scale = up.data()[0] / static_cast<real>(n);
      for (index i = 0; i < n; ++i) {
        dz(i, 0) = (stable_sigmoid(vz(i, 0)) - labels[i]) * scale;
      }
      g[0] = std::move(dz);
    }
    return g;
  });
  return out;
}

}  // namespace tgn
