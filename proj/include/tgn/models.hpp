#pragma once

#include <span>
#include <variant>

#include "tgn/engine.hpp"
#include "tgn/instances.hpp"

namespace tgn {

enum class Task { sat, tsp, centrality, kcolor };

Task task_from_string(const std::string& name);
const char* to_string(Task task);

enum class ColorInit { random, simplex };

struct ModelConfig {
  Task task = Task::sat;
  index d_l = 16;  // sat literals
  index d_c = 16;  // sat clauses / kcolor colors
  index d_v = 16;  // tsp + kcolor vertices
  index d_e = 16;  // tsp edges
  index d = 16;    // centrality vertices
  int t_max = 8;
  /// Hidden layer widths of the vote/compare heads; empty means one hidden
  /// layer as wide as the head input.
  std::vector<index> readout_hidden;
  std::uint64_t seed = 0;
  int k = 3;  // kcolor
  ColorInit color_init = ColorInit::random;
  bool lstm_layer_norm = false;
  std::vector<std::string> centrality_measures = kDefaultCentralityMeasures;
};

ModelConfig default_config(Task task);

/// Flattened position of one centrality comparison in a batch: global row
/// indices into the batched vertex embeddings plus the measure head to use.
struct PairQuery {
  index measure = 0;
  index u = 0;
  index v = 0;
};

/// Instances encoded for one engine run plus the per-decision targets. For
/// the graph-level tasks a decision is a graph; for centrality it is one
/// sampled comparison pair.
struct EncodedBatch {
  GraphBatch graph;
  std::vector<real> targets;
  std::vector<PairQuery> pair_queries;  // centrality only
};

/// Per-vertex votes pooled to one logit per graph (mean over the readout
/// type's vertices, using the membership vector).
Tensor graph_logits(const nn::Mlp& vote, const Tensor& embeddings,
                    const std::vector<index>& graph_of, index num_graphs);

/// sigmoid of graph_logits: per-graph probability of a YES answer.
Tensor predict(const nn::Mlp& vote, const Tensor& embeddings,
               const std::vector<index>& graph_of, index num_graphs);

/// Mean binary cross-entropy; takes logits, not probabilities.
Tensor bce_loss(const Tensor& logits, const std::vector<real>& labels);

/// k pairwise-equidistant unit vectors (regular simplex) padded to `dim`
/// columns; requires dim >= k.
Tensor simplex_rows(index k, index dim);

// -- the four instantiations ------------------------------------------------
// Each model owns its description, compiled plan and parameters, and turns
// task instances into engine batches plus decision heads.

class SatModel {
 public:
  using Instance = CnfInstance;
  static constexpr Task kTask = Task::sat;

  explicit SatModel(const ModelConfig& config);
  /// Literal/clause types; literals exchange with the clauses that contain
  /// them and with their negations, in the dimensionally consistent
  /// orientation (the literal update multiplies by the literal-clause matrix
  /// untransposed, the clause update by its transpose).
  static TgnSpec make_spec(index d_l, index d_c);

  const ModelConfig& config() const { return config_; }
  const TgnSpec& spec() const { return spec_; }
  const CompiledTgn& plan() const { return plan_; }
  const TgnParams& tgn_params() const { return tgn_; }
  nn::ParamMap parameters();

  /// Literal rows are variable order 1..N positive then 1..N negated; tied
  /// learned rows for literals and clauses.
  GraphBatch encode(const CnfInstance& instance, Rng& rng) const;
  EncodedBatch encode_batch(std::span<const CnfInstance> instances, Rng& rng) const;
  RunResult propagate(const GraphBatch& batch) const;
  Tensor decision_logits(const EncodedBatch& batch, const RunResult& result) const;
  std::vector<int> decisions(const EncodedBatch& batch, const RunResult& result) const;

 private:
  ModelConfig config_;
  TgnSpec spec_;
  CompiledTgn plan_;
  TgnParams tgn_;
  Tensor literal_init_;  // 1 x d_l
  Tensor clause_init_;   // 1 x d_c
  nn::Mlp vote_;         // d_l -> 1, votes over literal embeddings
};

class TspModel {
 public:
  using Instance = TspDecisionInstance;
  static constexpr Task kTask = Task::tsp;

  explicit TspModel(const ModelConfig& config);
  /// Vertex/edge types with one incidence matrix mapping each edge to its
  /// two endpoints.
  static TgnSpec make_spec(index d_v, index d_e);

  const ModelConfig& config() const { return config_; }
  const TgnSpec& spec() const { return spec_; }
  const CompiledTgn& plan() const { return plan_; }
  const TgnParams& tgn_params() const { return tgn_; }
  nn::ParamMap parameters();

  /// Edge embeddings are a learned projection of (weight, target cost);
  /// vertex embeddings are a tied learned row.
  GraphBatch encode(const TspDecisionInstance& instance, Rng& rng) const;
  EncodedBatch encode_batch(std::span<const TspDecisionInstance> instances, Rng& rng) const;
  RunResult propagate(const GraphBatch& batch) const;
  Tensor decision_logits(const EncodedBatch& batch, const RunResult& result) const;
  std::vector<int> decisions(const EncodedBatch& batch, const RunResult& result) const;

 private:
  ModelConfig config_;
  TgnSpec spec_;
  CompiledTgn plan_;
  TgnParams tgn_;
  Tensor vertex_init_;  // 1 x d_v
  Tensor proj_weight_;  // 2 x d_e
  Tensor proj_bias_;    // 1 x d_e
  nn::Mlp vote_;        // d_e -> 1, votes over edge embeddings
};

class CentralityModel {
 public:
  using Instance = CentralityInstance;
  static constexpr Task kTask = Task::centrality;

  explicit CentralityModel(const ModelConfig& config);
  /// Single vertex type; separate source and target message functions over
  /// the adjacency matrix and its transpose.
  static TgnSpec make_spec(index d);

  const ModelConfig& config() const { return config_; }
  const TgnSpec& spec() const { return spec_; }
  const CompiledTgn& plan() const { return plan_; }
  const TgnParams& tgn_params() const { return tgn_; }
  nn::ParamMap parameters();

  GraphBatch encode(const CentralityInstance& instance, Rng& rng) const;
  EncodedBatch encode_batch(std::span<const CentralityInstance> instances, Rng& rng) const;
  RunResult propagate(const GraphBatch& batch) const;
  /// One logit per sampled pair: compare head of the pair's measure applied
  /// to the concatenated (u, v) embeddings.
  Tensor decision_logits(const EncodedBatch& batch, const RunResult& result) const;
  /// Antisymmetrized: scores both orders and keeps the larger logit.
  std::vector<int> decisions(const EncodedBatch& batch, const RunResult& result) const;

 private:
  Tensor pair_logits(const EncodedBatch& batch, const RunResult& result, bool swapped) const;

  ModelConfig config_;
  TgnSpec spec_;
  CompiledTgn plan_;
  TgnParams tgn_;
  Tensor vertex_init_;            // 1 x d
  std::vector<nn::Mlp> compare_;  // one head per measure, 2d -> 1
};

class KcolorModel {
 public:
  using Instance = ColoringInstance;
  static constexpr Task kTask = Task::kcolor;

  explicit KcolorModel(const ModelConfig& config);
  /// Vertex/color types; vertices aggregate neighbours as identity messages
  /// and colors through a complete vertex-color matrix.
  static TgnSpec make_spec(index d_v, index d_c);

  const ModelConfig& config() const { return config_; }
  const TgnSpec& spec() const { return spec_; }
  const CompiledTgn& plan() const { return plan_; }
  const TgnParams& tgn_params() const { return tgn_; }
  nn::ParamMap parameters();

  /// Color embeddings are drawn U[0,1) per call (or placed on a simplex when
  /// configured); only vertex embeddings feed the vote head.
  GraphBatch encode(const ColoringInstance& instance, Rng& rng) const;
  EncodedBatch encode_batch(std::span<const ColoringInstance> instances, Rng& rng) const;
  RunResult propagate(const GraphBatch& batch) const;
  Tensor decision_logits(const EncodedBatch& batch, const RunResult& result) const;
  std::vector<int> decisions(const EncodedBatch& batch, const RunResult& result) const;

 private:
  ModelConfig config_;
  TgnSpec spec_;
  CompiledTgn plan_;
  TgnParams tgn_;
  Tensor vertex_init_;  // 1 x d_v
  nn::Mlp vote_;        // d_v -> 1
};

using AnyModel = std::variant<SatModel, TspModel, CentralityModel, KcolorModel>;

AnyModel make_model(const ModelConfig& config);

}  // namespace tgn
