#include "tgn/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tgn {

TgnParams init_tgn_params(const CompiledTgn& plan, Rng& rng, bool lstm_layer_norm) {
  TgnParams params;
  for (const std::string& name : plan.used_messages) {
    const TypePair& ends = plan.messages.at(name);
    const index from = plan.size_of(ends.first);
    const index to = plan.size_of(ends.second);
    params.messages[name] = nn::make_mlp({from, to, to, to}, rng);
  }
  for (const CompiledUpdate& update : plan.updates) {
    params.updates[update.type] =
        nn::make_lstm(update.message_width, update.width, rng, lstm_layer_norm);
  }
  return params;
}

void collect_params(TgnParams& params, nn::ParamMap& out) {
  for (auto& [name, mlp] : params.messages) collect_params(mlp, "message/" + name, out);
  for (auto& [type, cell] : params.updates) collect_params(cell, "update/" + type, out);
}

void check_batch(const CompiledTgn& plan, const GraphBatch& batch) {
  if (batch.num_graphs < 1) throw Error("batch: num_graphs must be >= 1");
  for (const std::string& type : plan.types) {
    auto cit = batch.counts.find(type);
    if (cit == batch.counts.end()) throw Error("batch: missing vertex count for type " + type);
    const index count = cit->second;
    if (count < 0) throw Error("batch: negative vertex count for type " + type);

    auto eit = batch.embeddings.find(type);
    if (eit == batch.embeddings.end()) {
      throw Error("batch: missing initial embeddings for type " + type);
    }
    if (eit->second.rows() != count || eit->second.cols() != plan.size_of(type)) {
      throw Error("batch: embeddings for " + type + " are " + eit->second.shape_str() +
                  ", expected [" + std::to_string(count) + "x" +
                  std::to_string(plan.size_of(type)) + "]");
    }
    auto hit = batch.hidden.find(type);
    if (hit != batch.hidden.end() && !hit->second.same_shape(eit->second)) {
      throw Error("batch: hidden state for " + type + " is " + hit->second.shape_str() +
                  ", expected " + eit->second.shape_str());
    }
    auto git = batch.graph_of.find(type);
    if (git == batch.graph_of.end() || static_cast<index>(git->second.size()) != count) {
      throw Error("batch: graph membership for " + type + " must list " +
                  std::to_string(count) + " vertices");
    }
    for (index g : git->second) {
      if (g < 0 || g >= batch.num_graphs) {
        throw Error("batch: graph index " + std::to_string(g) + " outside 0.." +
                    std::to_string(batch.num_graphs - 1));
      }
    }
  }
  std::vector<char> seen(static_cast<size_t>(batch.num_graphs), 0);
  for (const auto& [type, members] : batch.graph_of) {
    for (index g : members) seen[static_cast<size_t>(g)] = 1;
  }
  for (index g = 0; g < batch.num_graphs; ++g) {
    if (!seen[static_cast<size_t>(g)]) {
      throw Error("batch: graph " + std::to_string(g) + " has no vertices");
    }
  }
  for (const auto& [name, ends] : plan.matrices) {
    auto mit = batch.matrices.find(name);
    if (mit == batch.matrices.end()) throw Error("batch: missing matrix " + name);
    const index rows = batch.counts.at(ends.first);
    const index cols = batch.counts.at(ends.second);
    if (mit->second.rows() != rows || mit->second.cols() != cols) {
      throw Error("batch: matrix " + name + " is " + std::to_string(mit->second.rows()) + "x" +
                  std::to_string(mit->second.cols()) + ", expected " + std::to_string(rows) +
                  "x" + std::to_string(cols));
    }
  }
}

namespace {

struct State {
  std::map<std::string, Tensor> embeddings;
  std::map<std::string, Tensor> hidden;
};

State initial_state(const CompiledTgn& plan, const GraphBatch& batch) {
  State state;
  for (const std::string& type : plan.types) {
    state.embeddings[type] = batch.embeddings.at(type);
    auto hit = batch.hidden.find(type);
    if (hit != batch.hidden.end()) {
      state.hidden[type] = hit->second;
    } else {
      const Tensor& e = batch.embeddings.at(type);
      state.hidden[type] = Tensor(e.rows(), e.cols());
    }
  }
  return state;
}

void step(const CompiledTgn& plan, const TgnParams& params, const GraphBatch& batch,
          const RunOptions& options, State& state) {
  const State snapshot = state;  // all updates read timestep-t values only
  std::vector<std::string> order = options.update_order;
  if (order.empty()) {
    for (const CompiledUpdate& u : plan.updates) order.push_back(u.type);
  }
  for (const std::string& type : order) {
    const CompiledUpdate* update = plan.update_for(type);
    if (update == nullptr) throw Error("run: update order names unknown type " + type);
    std::vector<Tensor> aggregated;
    for (const AggregationTerm& term : update->terms) {
      Tensor msg = snapshot.embeddings.at(term.var);
      if (term.msg.has_value()) {
        msg = nn::mlp_forward(params.messages.at(*term.msg), msg);
      }
      aggregated.push_back(
          spmm(batch.matrices.at(term.mat), msg, term.transpose, options.aggregation));
    }
    const Tensor input = concat_cols(aggregated);
    nn::LstmState next = nn::lstm_step(params.updates.at(type), input,
                                       snapshot.embeddings.at(type), snapshot.hidden.at(type));
    state.embeddings[type] = std::move(next.h);
    state.hidden[type] = std::move(next.c);
  }
}

}  // namespace

RunResult run(const CompiledTgn& plan, const TgnParams& params, const GraphBatch& batch,
              int t_max, const RunOptions& options) {
  if (t_max < 0) throw Error("run: t_max must be >= 0");
  check_batch(plan, batch);
  State state = initial_state(plan, batch);
  for (int t = 0; t < t_max; ++t) step(plan, params, batch, options, state);
  return RunResult{std::move(state.embeddings), std::move(state.hidden)};
}

std::vector<std::map<std::string, Tensor>> embedding_trace(const CompiledTgn& plan,
                                                           const TgnParams& params,
                                                           const GraphBatch& batch, int t_max,
                                                           const RunOptions& options) {
  if (t_max < 0) throw Error("trace: t_max must be >= 0");
  check_batch(plan, batch);
  std::vector<std::map<std::string, Tensor>> trace;
  State state = initial_state(plan, batch);
  trace.push_back(state.embeddings);
  for (int t = 0; t < t_max; ++t) {
    step(plan, params, batch, options, state);
    trace.push_back(state.embeddings);
  }
  return trace;
}

GraphBatch batch_concat(const std::vector<GraphBatch>& batches) {
  if (batches.empty()) throw Error("batch_concat: no batches");

  auto keys_of = [](const auto& m) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : m) keys.push_back(k);
    return keys;
  };
  const std::vector<std::string> types = keys_of(batches.front().counts);
  const std::vector<std::string> matrix_names = keys_of(batches.front().matrices);
  for (const GraphBatch& b : batches) {
    if (keys_of(b.counts) != types || keys_of(b.matrices) != matrix_names) {
      throw Error("batch_concat: batches describe different plans");
    }
  }

  GraphBatch out;
  for (const GraphBatch& b : batches) out.num_graphs += b.num_graphs;

  const bool single = batches.size() == 1;
  for (const std::string& type : types) {
    index total = 0;
    std::vector<Tensor> embeddings;
    std::vector<Tensor> hidden;
    bool any_hidden = false;
    std::vector<index> members;
    index graph_offset = 0;
    for (const GraphBatch& b : batches) {
      total += b.counts.at(type);
      embeddings.push_back(b.embeddings.at(type));
      auto hit = b.hidden.find(type);
      if (hit != b.hidden.end()) {
        any_hidden = true;
        hidden.push_back(hit->second);
      } else {
        const Tensor& e = b.embeddings.at(type);
        hidden.push_back(Tensor(e.rows(), e.cols()));
      }
      for (index g : b.graph_of.at(type)) members.push_back(g + graph_offset);
      graph_offset += b.num_graphs;
    }
    out.counts[type] = total;
    out.embeddings[type] = single ? embeddings.front() : concat_rows(embeddings);
    if (any_hidden) out.hidden[type] = single ? hidden.front() : concat_rows(hidden);
    out.graph_of[type] = std::move(members);
  }

  for (const std::string& name : matrix_names) {
    index row_offset = 0, col_offset = 0, total_rows = 0, total_cols = 0;
    std::vector<std::pair<index, index>> entries;
    for (const GraphBatch& b : batches) {
      const SparseBinaryMatrix& m = b.matrices.at(name);
      total_rows += m.rows();
      total_cols += m.cols();
    }
    for (const GraphBatch& b : batches) {
      const SparseBinaryMatrix& m = b.matrices.at(name);
      for (const auto& [r, c] : m.entries()) entries.emplace_back(r + row_offset, c + col_offset);
      row_offset += m.rows();
      col_offset += m.cols();
    }
    out.matrices[name] = SparseBinaryMatrix::from_pairs(total_rows, total_cols, std::move(entries));
  }
  return out;
}

void write_trace_csv(std::ostream& out,
                     const std::vector<std::map<std::string, Tensor>>& trace) {
  out << "type,t,vertex,dim,value\n";
  char buf[64];
  for (size_t t = 0; t < trace.size(); ++t) {
    for (const auto& [type, emb] : trace[t]) {
      for (index v = 0; v < emb.rows(); ++v) {
        for (index d = 0; d < emb.cols(); ++d) {
          std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(emb(v, d)));
          out << type << ',' << t << ',' << v << ',' << d << ',' << buf << '\n';
        }
      }
    }
  }
}

std::vector<std::map<std::string, Tensor>> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "type,t,vertex,dim,value") {
    throw Error("trace csv: bad header");
  }
  // First pass over rows: collect extents, then fill.
  struct Row {
    std::string type;
    index t, vertex, dim;
    real value;
  };
  std::vector<Row> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    line_no++;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row row;
    char c1, c2, c3, c4;
    if (!std::getline(ls, row.type, ',')) throw Error("trace csv: bad row at line " + std::to_string(line_no));
    double value;
    std::istringstream rest(line.substr(row.type.size() + 1));
    if (!(rest >> row.t >> c1 >> row.vertex >> c2 >> row.dim >> c3 >> value) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      (void)c4;
      throw Error("trace csv: bad row at line " + std::to_string(line_no));
    }
    row.value = static_cast<real>(value);
    rows.push_back(std::move(row));
  }
  index t_count = 0;
  std::map<std::string, std::pair<index, index>> extents;
  for (const Row& row : rows) {
    t_count = std::max(t_count, row.t + 1);
    auto& e = extents[row.type];
    e.first = std::max(e.first, row.vertex + 1);
    e.second = std::max(e.second, row.dim + 1);
  }
  std::vector<std::map<std::string, Tensor>> trace(static_cast<size_t>(t_count));
  for (auto& snapshot : trace) {
    for (const auto& [type, e] : extents) snapshot[type] = Tensor(e.first, e.second);
  }
  for (const Row& row : rows) {
    trace[static_cast<size_t>(row.t)][row.type](row.vertex, row.dim) = row.value;
  }
  return trace;
}

}  // namespace tgn
