#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tgn {

#ifdef TGN_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

using index = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Tape;
using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Dense row-major rank-2 tensor. Values are always finite; ops that would
/// produce NaN/Inf throw instead of propagating them.
class Tensor {
 public:
  Tensor() = default;
  Tensor(index rows, index cols);  // zero-filled
  Tensor(index rows, index cols, std::vector<real> values);

  static Tensor zeros(index rows, index cols) { return {rows, cols}; }
  static Tensor full(index rows, index cols, real value);
  static Tensor ones(index rows, index cols) { return full(rows, cols, 1); }
  static Tensor scalar(real value) { return full(1, 1, value); }
  static Tensor row(std::initializer_list<real> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<real>> rows);

  index rows() const { return rows_; }
  index cols() const { return cols_; }
  index size() const { return rows_ * cols_; }

  real operator()(index i, index j) const { return data_[i * cols_ + j]; }
  real& operator()(index i, index j) { return data_[i * cols_ + j]; }
  real value() const;  // 1x1 only

  const std::vector<real>& data() const { return data_; }
  std::vector<real>& data() { return data_; }

  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  bool requires_grad() const { return requires_grad_; }
  /// The tape this tensor is recorded on, or null once that tape is gone.
  /// Liveness is tracked with a token so a new tape reusing the same address
  /// can never alias a stale link.
  Tape* tape() const { return tape_token_.expired() ? nullptr : tape_; }
  NodeId node() const { return node_; }

 private:
  friend class Tape;
  index rows_ = 0;
  index cols_ = 0;
  std::vector<real> data_;
  Tape* tape_ = nullptr;
  std::weak_ptr<const char> tape_token_;
  NodeId node_ = kNoNode;
  bool requires_grad_ = false;
};

/// 0/1 adjacency matrix in CSR form. Entries are implicitly 1; column
/// indices are strictly increasing within each row and never duplicated.
class SparseBinaryMatrix {
 public:
  SparseBinaryMatrix() : row_ptr_(1, 0) {}
  SparseBinaryMatrix(index rows, index cols);  // no entries

  static SparseBinaryMatrix from_pairs(index rows, index cols,
                                       std::vector<std::pair<index, index>> entries);
  static SparseBinaryMatrix all_ones(index rows, index cols);

  index rows() const { return rows_; }
  index cols() const { return cols_; }
  index nnz() const { return static_cast<index>(col_idx_.size()); }

  std::span<const index> row_ptr() const { return row_ptr_; }
  std::span<const index> col_idx() const { return col_idx_; }

  bool contains(index r, index c) const;
  bool has_self_loops() const;
  std::vector<std::pair<index, index>> entries() const;
  Tensor densify() const;

 private:
  index rows_ = 0;
  index cols_ = 0;
  std::vector<index> row_ptr_;
  std::vector<index> col_idx_;
};

/// Gradients of one backward pass, keyed by tape node id.
class Gradients {
 public:
  bool contains(NodeId id) const {
    return id >= 0 && id < static_cast<NodeId>(grads_.size()) && grads_[id].has_value();
  }
  const Tensor& at(NodeId id) const;

 private:
  friend class Tape;
  std::vector<std::optional<Tensor>> grads_;
};

/// Records the forward computation as a topologically ordered list of nodes
/// so that one reverse sweep yields all gradients. A tape is single-writer
/// and confined to one logical thread.
class Tape {
 public:
  using BackwardFn = std::function<std::vector<Tensor>(const Tensor& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  /// Registers `t` as a differentiable leaf of this tape and returns its
  /// node id. Re-watching a tensor moves it onto this tape.
  NodeId watch(Tensor& t);

  /// Stamps `out` as the result of a recorded op. `inputs` holds the node id
  /// of each op input (kNoNode for untracked ones); `backward` maps the
  /// upstream gradient to one gradient per input, in the same order.
  NodeId record_result(Tensor& out, std::vector<NodeId> inputs, BackwardFn backward);

  /// Reverse sweep from a 1x1 loss recorded on this tape. Visits each node
  /// at most once, in reverse recording order.
  Gradients backward(const Tensor& loss) const;

  index num_nodes() const { return static_cast<index>(nodes_.size()); }

 private:
  struct Node {
    std::vector<NodeId> inputs;
    BackwardFn backward;  // null for leaves
  };
  std::vector<Node> nodes_;
  std::shared_ptr<const char> token_ = std::make_shared<const char>(0);
};

Gradients backward(const Tape& tape, const Tensor& loss);

enum class Aggregation { sum, mean };

// -- primitive ops ----------------------------------------------------------
// Every op validates shapes, checks the result for non-finite values, and
// records itself when any input lives on a tape.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor spmm(const SparseBinaryMatrix& m, const Tensor& x, bool transpose = false,
            Aggregation agg = Aggregation::sum);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_rows(const std::vector<Tensor>& parts);

/// x[m x n] + v[1 x n], v added to every row. The broadcast is explicit in
/// the op; plain add() requires exact shape match.
Tensor add_rowvec(const Tensor& x, const Tensor& v);
/// Stacks `count` copies of a 1 x n row vector.
Tensor tile_rows(const Tensor& v, index count);
Tensor gather_rows(const Tensor& x, const std::vector<index>& rows);
/// Per-segment mean of rows: result row g is the mean of x rows with
/// segment_of[i] == g. Every segment in [0, num_segments) must be non-empty.
Tensor segment_mean(const Tensor& x, const std::vector<index>& segment_of,
                    index num_segments);
Tensor sum(const Tensor& x);  // 1x1

/// Row-wise layer normalization with learned gain/bias (both 1 x n).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  real eps = static_cast<real>(1e-5));

/// Mean binary cross-entropy over logits[n x 1]; labels must be exactly 0 or 1.
/// Computed in the numerically stable logit formulation.
Tensor bce_with_logits(const Tensor& logits, const std::vector<real>& labels);

real stable_sigmoid(real x);

}  // namespace tgn
