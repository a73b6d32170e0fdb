#include "tgn/models.hpp"

#include <algorithm>
#include <cmath>

namespace tgn {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

void check_config(const ModelConfig& config, Task expected) {
  require(config.task == expected,
          std::string("model: config is for task ") + to_string(config.task));
  require(config.t_max >= 1, "model: t_max must be >= 1");
  for (index h : config.readout_hidden) require(h > 0, "model: readout widths must be positive");
}

std::vector<index> head_dims(index in, const std::vector<index>& hidden) {
  std::vector<index> dims{in};
  if (hidden.empty()) {
    dims.push_back(in);
  } else {
    dims.insert(dims.end(), hidden.begin(), hidden.end());
  }
  dims.push_back(1);
  return dims;
}

std::vector<index> zeros_membership(index count) { return std::vector<index>(count, 0); }

}  // namespace

Task task_from_string(const std::string& name) {
  if (name == "sat") return Task::sat;
  if (name == "tsp") return Task::tsp;
  if (name == "centrality") return Task::centrality;
  if (name == "kcolor") return Task::kcolor;
  throw Error("unknown task \"" + name + "\" (expected sat, tsp, centrality or kcolor)");
}

const char* to_string(Task task) {
  switch (task) {
    case Task::sat: return "sat";
    case Task::tsp: return "tsp";
    case Task::centrality: return "centrality";
    case Task::kcolor: return "kcolor";
  }
  return "unknown";
}

ModelConfig default_config(Task task) {
  ModelConfig config;
  config.task = task;
  switch (task) {
    case Task::sat:
      config.d_l = 32;
      config.d_c = 32;
      config.t_max = 16;
      break;
    case Task::tsp:
      config.d_v = 16;
      config.d_e = 16;
      config.t_max = 12;
      break;
    case Task::centrality:
      config.d = 16;
      config.t_max = 8;
      break;
    case Task::kcolor:
      config.d_v = 16;
      config.d_c = 16;
      config.t_max = 12;
      break;
  }
  return config;
}

Tensor graph_logits(const nn::Mlp& vote, const Tensor& embeddings,
                    const std::vector<index>& graph_of, index num_graphs) {
  const Tensor votes = nn::mlp_forward(vote, embeddings);
  return segment_mean(votes, graph_of, num_graphs);
}

Tensor predict(const nn::Mlp& vote, const Tensor& embeddings,
               const std::vector<index>& graph_of, index num_graphs) {
  return sigmoid(graph_logits(vote, embeddings, graph_of, num_graphs));
}

Tensor bce_loss(const Tensor& logits, const std::vector<real>& labels) {
  return bce_with_logits(logits, labels);
}

Tensor simplex_rows(index k, index dim) {
  require(k >= 1, "simplex_rows: k must be >= 1");
  require(dim >= k, "simplex_rows: need dim >= k to place " + std::to_string(k) + " points");
  Tensor out(k, dim);
  if (k == 1) {
    out(0, 0) = 1;
    return out;
  }
  const real kk = static_cast<real>(k);
  const real norm = std::sqrt(1 - 1 / kk);
  for (index i = 0; i < k; ++i) {
    for (index j = 0; j < k; ++j) {
      out(i, j) = ((i == j ? 1 : 0) - 1 / kk) / norm;
    }
  }
  return out;
}

// -- SatModel -----------------------------------------------------------------

TgnSpec SatModel::make_spec(index d_l, index d_c) {
  TgnSpec spec;
  spec.type_sizes = {{"L", d_l}, {"C", d_c}};
  spec.matrices = {{"LL", {"L", "L"}}, {"LC", {"L", "C"}}};
  spec.messages = {{"L_msg_C", {"L", "C"}}, {"C_msg_L", {"C", "L"}}};
  spec.updates["L"] = {{"LC", "C_msg_L", false, "C"}, {"LL", std::nullopt, false, "L"}};
  spec.updates["C"] = {{"LC", "L_msg_C", true, "L"}};
  return spec;
}

SatModel::SatModel(const ModelConfig& config) : config_(config) {
  check_config(config, Task::sat);
  require(config.d_l > 0 && config.d_c > 0, "sat model: embedding sizes must be positive");
  spec_ = make_spec(config.d_l, config.d_c);
  plan_ = compile(spec_);
  Rng rng(config.seed);
  tgn_ = init_tgn_params(plan_, rng, config.lstm_layer_norm);
  literal_init_ = nn::xavier_uniform(1, config.d_l, rng);
  clause_init_ = nn::xavier_uniform(1, config.d_c, rng);
  vote_ = nn::make_mlp(head_dims(config.d_l, config.readout_hidden), rng);
}

nn::ParamMap SatModel::parameters() {
  nn::ParamMap params;
  collect_params(tgn_, params);
  params["init/L"] = &literal_init_;
  params["init/C"] = &clause_init_;
  collect_params(vote_, "vote", params);
  return params;
}

GraphBatch SatModel::encode(const CnfInstance& instance, Rng&) const {
  require(instance.num_vars >= 1, "sat encode: formula has no variables");
  const index n = instance.num_vars;
  const index lits = 2 * n;
  const index m = static_cast<index>(instance.clauses.size());

  std::vector<std::pair<index, index>> lit_clause;
  for (index j = 0; j < m; ++j) {
    const auto& clause = instance.clauses[static_cast<size_t>(j)];
    require(!clause.empty(), "sat encode: clause " + std::to_string(j) + " is empty");
    for (int lit : clause) {
      const int var = std::abs(lit);
      require(var >= 1 && var <= instance.num_vars,
              "sat encode: variable " + std::to_string(var) + " outside 1.." +
                  std::to_string(instance.num_vars));
      const index row = lit > 0 ? index{var} - 1 : n + index{var} - 1;
      lit_clause.emplace_back(row, j);
    }
  }
  std::vector<std::pair<index, index>> negation;
  for (index i = 0; i < n; ++i) {
    negation.emplace_back(i, n + i);
    negation.emplace_back(n + i, i);
  }

  GraphBatch batch;
  batch.num_graphs = 1;
  batch.counts = {{"C", m}, {"L", lits}};
  batch.matrices["LL"] = SparseBinaryMatrix::from_pairs(lits, lits, std::move(negation));
  batch.matrices["LC"] = SparseBinaryMatrix::from_pairs(lits, m, std::move(lit_clause));
  batch.embeddings["L"] = tile_rows(literal_init_, lits);
  batch.embeddings["C"] = tile_rows(clause_init_, m);
  batch.graph_of["L"] = zeros_membership(lits);
  batch.graph_of["C"] = zeros_membership(m);
  return batch;
}

EncodedBatch SatModel::encode_batch(std::span<const CnfInstance> instances, Rng& rng) const {
  require(!instances.empty(), "sat encode: empty batch");
  std::vector<GraphBatch> parts;
  EncodedBatch out;
  for (const CnfInstance& instance : instances) {
    parts.push_back(encode(instance, rng));
    out.targets.push_back(instance.label ? 1 : 0);
  }
  out.graph = batch_concat(parts);
  return out;
}

RunResult SatModel::propagate(const GraphBatch& batch) const {
  return run(plan_, tgn_, batch, config_.t_max);
}

Tensor SatModel::decision_logits(const EncodedBatch& batch, const RunResult& result) const {
  return graph_logits(vote_, result.embeddings.at("L"), batch.graph.graph_of.at("L"),
                      batch.graph.num_graphs);
}

std::vector<int> SatModel::decisions(const EncodedBatch& batch, const RunResult& result) const {
  const Tensor logits = decision_logits(batch, result);
  std::vector<int> out;
  for (index i = 0; i < logits.rows(); ++i) out.push_back(logits(i, 0) > 0 ? 1 : 0);
  return out;
}

// -- TspModel -----------------------------------------------------------------

TgnSpec TspModel::make_spec(index d_v, index d_e) {
  TgnSpec spec;
  spec.type_sizes = {{"V", d_v}, {"E", d_e}};
  spec.matrices = {{"EV", {"E", "V"}}};
  spec.messages = {{"V_msg_E", {"V", "E"}}, {"E_msg_V", {"E", "V"}}};
  spec.updates["V"] = {{"EV", "E_msg_V", true, "E"}};
  spec.updates["E"] = {{"EV", "V_msg_E", false, "V"}};
  return spec;
}

TspModel::TspModel(const ModelConfig& config) : config_(config) {
  check_config(config, Task::tsp);
  require(config.d_v > 0 && config.d_e > 0, "tsp model: embedding sizes must be positive");
  spec_ = make_spec(config.d_v, config.d_e);
  plan_ = compile(spec_);
  Rng rng(config.seed);
  tgn_ = init_tgn_params(plan_, rng, config.lstm_layer_norm);
  vertex_init_ = nn::xavier_uniform(1, config.d_v, rng);
  proj_weight_ = nn::xavier_uniform(2, config.d_e, rng);
  proj_bias_ = Tensor(1, config.d_e);
  vote_ = nn::make_mlp(head_dims(config.d_e, config.readout_hidden), rng);
}

nn::ParamMap TspModel::parameters() {
  nn::ParamMap params;
  collect_params(tgn_, params);
  params["init/V"] = &vertex_init_;
  params["edge_proj/weight"] = &proj_weight_;
  params["edge_proj/bias"] = &proj_bias_;
  collect_params(vote_, "vote", params);
  return params;
}

GraphBatch TspModel::encode(const TspDecisionInstance& instance, Rng&) const {
  const index n = static_cast<index>(instance.coords.size());
  require(n >= 3, "tsp encode: need at least 3 vertices");
  require(static_cast<index>(instance.weights.size()) == n, "tsp encode: weight matrix size");
  for (index i = 0; i < n; ++i) {
    require(static_cast<index>(instance.weights[static_cast<size_t>(i)].size()) == n,
            "tsp encode: weight matrix is not square");
    for (index j = 0; j < n; ++j) {
      require(instance.weights[static_cast<size_t>(i)][static_cast<size_t>(j)] ==
                  instance.weights[static_cast<size_t>(j)][static_cast<size_t>(i)],
              "tsp encode: non-symmetric weights for an undirected instance");
    }
  }

  std::vector<std::pair<index, index>> incidence;
  std::vector<real> features;
  index num_edges = 0;
  for (index i = 0; i < n; ++i) {
    for (index j = i + 1; j < n; ++j) {
      incidence.emplace_back(num_edges, i);
      incidence.emplace_back(num_edges, j);
      features.push_back(instance.weights[static_cast<size_t>(i)][static_cast<size_t>(j)]);
      features.push_back(instance.target_cost);
      num_edges++;
    }
  }
  const Tensor edge_features(num_edges, 2, std::move(features));

  GraphBatch batch;
  batch.num_graphs = 1;
  batch.counts = {{"E", num_edges}, {"V", n}};
  batch.matrices["EV"] = SparseBinaryMatrix::from_pairs(num_edges, n, std::move(incidence));
  batch.embeddings["V"] = tile_rows(vertex_init_, n);
  batch.embeddings["E"] = add_rowvec(matmul(edge_features, proj_weight_), proj_bias_);
  batch.graph_of["V"] = zeros_membership(n);
  batch.graph_of["E"] = zeros_membership(num_edges);
  return batch;
}

EncodedBatch TspModel::encode_batch(std::span<const TspDecisionInstance> instances,
                                    Rng& rng) const {
  require(!instances.empty(), "tsp encode: empty batch");
  std::vector<GraphBatch> parts;
  EncodedBatch out;
  for (const TspDecisionInstance& instance : instances) {
    parts.push_back(encode(instance, rng));
    out.targets.push_back(instance.label ? 1 : 0);
  }
  out.graph = batch_concat(parts);
  return out;
}

RunResult TspModel::propagate(const GraphBatch& batch) const {
  return run(plan_, tgn_, batch, config_.t_max);
}

Tensor TspModel::decision_logits(const EncodedBatch& batch, const RunResult& result) const {
  return graph_logits(vote_, result.embeddings.at("E"), batch.graph.graph_of.at("E"),
                      batch.graph.num_graphs);
}

std::vector<int> TspModel::decisions(const EncodedBatch& batch, const RunResult& result) const {
  const Tensor logits = decision_logits(batch, result);
  std::vector<int> out;
  for (index i = 0; i < logits.rows(); ++i) out.push_back(logits(i, 0) > 0 ? 1 : 0);
  return out;
}

// -- CentralityModel ------------------------------------------------------------

TgnSpec CentralityModel::make_spec(index d) {
  TgnSpec spec;
  spec.type_sizes = {{"V", d}};
  spec.matrices = {{"M", {"V", "V"}}};
  spec.messages = {{"Vsource", {"V", "V"}}, {"Vtarget", {"V", "V"}}};
  spec.updates["V"] = {{"M", "Vsource", false, "V"}, {"M", "Vtarget", true, "V"}};
  return spec;
}

CentralityModel::CentralityModel(const ModelConfig& config) : config_(config) {
  check_config(config, Task::centrality);
  require(config.d > 0, "centrality model: embedding size must be positive");
  require(!config.centrality_measures.empty(), "centrality model: no measures configured");
  spec_ = make_spec(config.d);
  plan_ = compile(spec_);
  Rng rng(config.seed);
  tgn_ = init_tgn_params(plan_, rng, config.lstm_layer_norm);
  vertex_init_ = nn::xavier_uniform(1, config.d, rng);
  for (size_t i = 0; i < config.centrality_measures.size(); ++i) {
    compare_.push_back(nn::make_mlp(head_dims(2 * config.d, config.readout_hidden), rng));
  }
}

nn::ParamMap CentralityModel::parameters() {
  nn::ParamMap params;
  collect_params(tgn_, params);
  params["init/V"] = &vertex_init_;
  for (size_t i = 0; i < compare_.size(); ++i) {
    collect_params(compare_[i], "compare/" + config_.centrality_measures[i], params);
  }
  return params;
}

GraphBatch CentralityModel::encode(const CentralityInstance& instance, Rng&) const {
  const Graph& graph = instance.graph;
  require(graph.n >= 1, "centrality encode: empty graph");
  std::vector<std::pair<index, index>> arcs;
  for (const auto& [u, v] : graph.edges) {
    arcs.emplace_back(u, v);
    if (!graph.directed) arcs.emplace_back(v, u);
  }
  GraphBatch batch;
  batch.num_graphs = 1;
  batch.counts = {{"V", graph.n}};
  batch.matrices["M"] = SparseBinaryMatrix::from_pairs(graph.n, graph.n, std::move(arcs));
  batch.embeddings["V"] = tile_rows(vertex_init_, graph.n);
  batch.graph_of["V"] = zeros_membership(graph.n);
  return batch;
}

EncodedBatch CentralityModel::encode_batch(std::span<const CentralityInstance> instances,
                                           Rng& rng) const {
  require(!instances.empty(), "centrality encode: empty batch");
  std::vector<GraphBatch> parts;
  EncodedBatch out;
  index vertex_offset = 0;
  for (const CentralityInstance& instance : instances) {
    parts.push_back(encode(instance, rng));
    for (const CentralityPair& pair : instance.pairs) {
      auto it = std::find(config_.centrality_measures.begin(),
                          config_.centrality_measures.end(), pair.measure);
      if (it == config_.centrality_measures.end()) continue;  // no head for this measure
      PairQuery query;
      query.measure = it - config_.centrality_measures.begin();
      query.u = vertex_offset + pair.u;
      query.v = vertex_offset + pair.v;
      out.pair_queries.push_back(query);
      out.targets.push_back(pair.label ? 1 : 0);
    }
    vertex_offset += instance.graph.n;
  }
  require(!out.pair_queries.empty(), "centrality encode: batch has no comparison pairs");
  out.graph = batch_concat(parts);
  return out;
}

RunResult CentralityModel::propagate(const GraphBatch& batch) const {
  return run(plan_, tgn_, batch, config_.t_max);
}

Tensor CentralityModel::pair_logits(const EncodedBatch& batch, const RunResult& result,
                                    bool swapped) const {
  const Tensor& embeddings = result.embeddings.at("V");
  const index num_measures = static_cast<index>(compare_.size());
  const index num_queries = static_cast<index>(batch.pair_queries.size());

  // Queries are evaluated grouped by measure head, then put back in query
  // order with a gather.
  std::vector<Tensor> grouped;
  std::vector<index> grouped_pos(num_queries);
  index emitted = 0;
  for (index m = 0; m < num_measures; ++m) {
    std::vector<index> us, vs;
    for (index q = 0; q < num_queries; ++q) {
      if (batch.pair_queries[static_cast<size_t>(q)].measure != m) continue;
      grouped_pos[static_cast<size_t>(q)] = emitted++;
      us.push_back(batch.pair_queries[static_cast<size_t>(q)].u);
      vs.push_back(batch.pair_queries[static_cast<size_t>(q)].v);
    }
    if (us.empty()) continue;
    if (swapped) std::swap(us, vs);
    const Tensor pair_features = concat_cols(
        std::vector<Tensor>{gather_rows(embeddings, us), gather_rows(embeddings, vs)});
    grouped.push_back(nn::mlp_forward(compare_[static_cast<size_t>(m)], pair_features));
  }
  return gather_rows(concat_rows(grouped), grouped_pos);
}

Tensor CentralityModel::decision_logits(const EncodedBatch& batch,
                                        const RunResult& result) const {
  return pair_logits(batch, result, false);
}

std::vector<int> CentralityModel::decisions(const EncodedBatch& batch,
                                            const RunResult& result) const {
  const Tensor forward = pair_logits(batch, result, false);
  const Tensor reversed = pair_logits(batch, result, true);
  std::vector<int> out;
  for (index i = 0; i < forward.rows(); ++i) {
    out.push_back(forward(i, 0) > reversed(i, 0) ? 1 : 0);
  }
  return out;
}

// -- KcolorModel ------------------------------------------------------------

TgnSpec KcolorModel::make_spec(index d_v, index d_c) {
  TgnSpec spec;
  spec.type_sizes = {{"V", d_v}, {"C", d_c}};
  spec.matrices = {{"VV", {"V", "V"}}, {"VC", {"V", "C"}}};
  spec.messages = {{"V_msg_C", {"V", "C"}}, {"C_msg_V", {"C", "V"}}};
  spec.updates["V"] = {{"VV", std::nullopt, false, "V"}, {"VC", "C_msg_V", false, "C"}};
  spec.updates["C"] = {{"VC", "V_msg_C", true, "V"}};
  return spec;
}

KcolorModel::KcolorModel(const ModelConfig& config) : config_(config) {
  check_config(config, Task::kcolor);
  require(config.d_v > 0 && config.d_c > 0, "kcolor model: embedding sizes must be positive");
  require(config.k >= 1, "kcolor model: k must be >= 1");
  if (config.color_init == ColorInit::simplex) {
    require(config.d_c >= config.k, "kcolor model: simplex init needs d_c >= k");
  }
  spec_ = make_spec(config.d_v, config.d_c);
  plan_ = compile(spec_);
  Rng rng(config.seed);
  tgn_ = init_tgn_params(plan_, rng, config.lstm_layer_norm);
  vertex_init_ = nn::xavier_uniform(1, config.d_v, rng);
  vote_ = nn::make_mlp(head_dims(config.d_v, config.readout_hidden), rng);
}

nn::ParamMap KcolorModel::parameters() {
  nn::ParamMap params;
  collect_params(tgn_, params);
  params["init/V"] = &vertex_init_;
  collect_params(vote_, "vote", params);
  return params;
}

GraphBatch KcolorModel::encode(const ColoringInstance& instance, Rng& rng) const {
  const Graph& graph = instance.graph;
  require(graph.n >= 1, "kcolor encode: empty graph");
  require(!graph.directed, "kcolor encode: graph must be undirected");
  require(instance.k == config_.k, "kcolor encode: instance needs k=" +
                                       std::to_string(instance.k) + " but the model has k=" +
                                       std::to_string(config_.k));
  const index k = config_.k;
  std::vector<std::pair<index, index>> arcs;
  for (const auto& [u, v] : graph.edges) {
    arcs.emplace_back(u, v);
    arcs.emplace_back(v, u);
  }
  Tensor colors;
  if (config_.color_init == ColorInit::simplex) {
    colors = simplex_rows(k, config_.d_c);
  } else {
    colors = Tensor(k, config_.d_c);
    for (index i = 0; i < colors.size(); ++i) colors.data()[i] = rng.uniform();
  }

  GraphBatch batch;
  batch.num_graphs = 1;
  batch.counts = {{"C", k}, {"V", graph.n}};
  batch.matrices["VV"] = SparseBinaryMatrix::from_pairs(graph.n, graph.n, std::move(arcs));
  batch.matrices["VC"] = SparseBinaryMatrix::all_ones(graph.n, k);
  batch.embeddings["V"] = tile_rows(vertex_init_, graph.n);
  batch.embeddings["C"] = std::move(colors);
  batch.graph_of["V"] = zeros_membership(graph.n);
  batch.graph_of["C"] = zeros_membership(k);
  return batch;
}

EncodedBatch KcolorModel::encode_batch(std::span<const ColoringInstance> instances,
                                       Rng& rng) const {
  require(!instances.empty(), "kcolor encode: empty batch");
  std::vector<GraphBatch> parts;
  EncodedBatch out;
  for (const ColoringInstance& instance : instances) {
    parts.push_back(encode(instance, rng));
    out.targets.push_back(instance.label ? 1 : 0);
  }
  out.graph = batch_concat(parts);
  return out;
}

RunResult KcolorModel::propagate(const GraphBatch& batch) const {
  return run(plan_, tgn_, batch, config_.t_max);
}

Tensor KcolorModel::decision_logits(const EncodedBatch& batch, const RunResult& result) const {
  // Only vertex embeddings vote; color embeddings stay internal.
  return graph_logits(vote_, result.embeddings.at("V"), batch.graph.graph_of.at("V"),
                      batch.graph.num_graphs);
}

std::vector<int> KcolorModel::decisions(const EncodedBatch& batch,
                                        const RunResult& result) const {
  const Tensor logits = decision_logits(batch, result);
  std::vector<int> out;
  for (index i = 0; i < logits.rows(); ++i) out.push_back(logits(i, 0) > 0 ? 1 : 0);
  return out;
}

AnyModel make_model(const ModelConfig& config) {
  switch (config.task) {
    case Task::sat: return SatModel(config);
    case Task::tsp: return TspModel(config);
    case Task::centrality: return CentralityModel(config);
    case Task::kcolor: return KcolorModel(config);
  }
  throw Error("make_model: unknown task");
}

}  // namespace tgn
