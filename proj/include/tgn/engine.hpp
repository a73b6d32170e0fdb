#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tgn/nn.hpp"
#include "tgn/spec.hpp"
#include "tgn/tensor.hpp"

namespace tgn {

/// One or more graphs laid out for a compiled plan: per-type vertex counts,
/// every declared adjacency matrix, initial embeddings, optional initial
/// cell states (zero when missing), and per-type membership vectors mapping
/// each vertex to its graph for readout.
struct GraphBatch {
  index num_graphs = 0;
  std::map<std::string, index> counts;
  std::map<std::string, SparseBinaryMatrix> matrices;
  std::map<std::string, Tensor> embeddings;
  std::map<std::string, Tensor> hidden;
  std::map<std::string, std::vector<index>> graph_of;
};

/// Trainable state of a compiled plan: one MLP per referenced message
/// function and one LSTM cell per updated type.
struct TgnParams {
  std::map<std::string, nn::Mlp> messages;
  std::map<std::string, nn::LstmCell> updates;
};

/// Message MLPs are 3 linear layers with hidden width equal to the target
/// embedding size, ReLU inside and a linear output. Update cells consume the
/// aggregated message block and carry the type's embedding as LSTM output.
TgnParams init_tgn_params(const CompiledTgn& plan, Rng& rng, bool lstm_layer_norm = false);

void collect_params(TgnParams& params, nn::ParamMap& out);

struct RunOptions {
  Aggregation aggregation = Aggregation::sum;
  /// Order in which type updates are applied within an iteration. Results do
  /// not depend on it (updates read only timestep-t state); it exists so that
  /// the independence is testable. Empty means plan order.
  std::vector<std::string> update_order;
};

struct RunResult {
  std::map<std::string, Tensor> embeddings;
  std::map<std::string, Tensor> hidden;
};

/// Runs t_max synchronous message-passing iterations and returns the refined
/// per-type embeddings (and cell states). Differentiable end to end when the
/// parameters or initial embeddings are on a tape.
RunResult run(const CompiledTgn& plan, const TgnParams& params, const GraphBatch& batch,
              int t_max, const RunOptions& options = {});

/// Block-diagonal union: matrices are placed on the diagonal, embeddings and
/// cell states are stacked, and graph membership is reindexed by offset, so
/// no information flows between the original graphs.
GraphBatch batch_concat(const std::vector<GraphBatch>& batches);

/// Embedding snapshots at t = 0..t_max; the last entry equals run()'s output.
std::vector<std::map<std::string, Tensor>> embedding_trace(const CompiledTgn& plan,
                                                           const TgnParams& params,
                                                           const GraphBatch& batch, int t_max,
                                                           const RunOptions& options = {});

/// CSV with header "type,t,vertex,dim,value"; values at 17 significant digits.
void write_trace_csv(std::ostream& out,
                     const std::vector<std::map<std::string, Tensor>>& trace);
std::vector<std::map<std::string, Tensor>> read_trace_csv(std::istream& in);

/// Checks a batch against a plan; throws with the first mismatch found.
void check_batch(const CompiledTgn& plan, const GraphBatch& batch);

}  // namespace tgn
