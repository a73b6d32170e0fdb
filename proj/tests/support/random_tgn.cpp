#include "support/random_tgn.hpp"

namespace tgn::testing {

void randomize_state(GraphBatch& batch, Rng& rng) {
  for (auto& [type, t] : batch.embeddings) {
    for (index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1, 1);
  }
  for (auto& [type, t] : batch.hidden) {
    for (index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1, 1);
  }
}

GraphBatch permute_batch(const GraphBatch& batch, const CompiledTgn& plan,
                         const std::map<std::string, std::vector<index>>& perms) {
  auto perm_of = [&](const std::string& type) {
    auto it = perms.find(type);
    if (it != perms.end()) return it->second;
    std::vector<index> identity(static_cast<size_t>(batch.counts.at(type)));
    for (size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<index>(i);
    return identity;
  };

  GraphBatch out = batch;
  for (const auto& [type, count] : batch.counts) {
    const std::vector<index> p = perm_of(type);
    const Tensor& emb = batch.embeddings.at(type);
    Tensor permuted(emb.rows(), emb.cols());
    for (index i = 0; i < emb.rows(); ++i) {
      for (index j = 0; j < emb.cols(); ++j) permuted(p[static_cast<size_t>(i)], j) = emb(i, j);
    }
    out.embeddings[type] = std::move(permuted);
    auto hit = batch.hidden.find(type);
    if (hit != batch.hidden.end()) {
      Tensor hperm(hit->second.rows(), hit->second.cols());
      for (index i = 0; i < hit->second.rows(); ++i) {
        for (index j = 0; j < hit->second.cols(); ++j) {
          hperm(p[static_cast<size_t>(i)], j) = hit->second(i, j);
        }
      }
      out.hidden[type] = std::move(hperm);
    }
    const auto& members = batch.graph_of.at(type);
    std::vector<index> moved(members.size());
    for (size_t i = 0; i < members.size(); ++i) moved[static_cast<size_t>(p[i])] = members[i];
    out.graph_of[type] = std::move(moved);
  }
  for (const auto& [name, ends] : plan.matrices) {
    const SparseBinaryMatrix& m = batch.matrices.at(name);
    const std::vector<index> pr = perm_of(ends.first);
    const std::vector<index> pc = perm_of(ends.second);
    std::vector<std::pair<index, index>> entries;
    for (const auto& [r, c] : m.entries()) {
      entries.emplace_back(pr[static_cast<size_t>(r)], pc[static_cast<size_t>(c)]);
    }
    out.matrices[name] = SparseBinaryMatrix::from_pairs(m.rows(), m.cols(), std::move(entries));
  }
  return out;
}

std::map<std::string, std::vector<index>> random_perms(const GraphBatch& batch, Rng& rng) {
  std::map<std::string, std::vector<index>> perms;
  for (const auto& [type, count] : batch.counts) {
    std::vector<index> p(static_cast<size_t>(count));
    for (size_t i = 0; i < p.size(); ++i) p[i] = static_cast<index>(i);
    rng.shuffle(p);
    perms[type] = std::move(p);
  }
  return perms;
}

RandomCase random_case(Rng& rng, int max_types, index max_vertices, bool random_hidden) {
  RandomCase out;
  const int num_types = static_cast<int>(rng.uniform_int(1, max_types));
  std::vector<std::string> types;
  for (int i = 0; i < num_types; ++i) {
    const std::string name = "T" + std::to_string(i);
    types.push_back(name);
    out.spec.type_sizes[name] = rng.uniform_int(2, 5);
  }

  int matrix_counter = 0;
  int message_counter = 0;
  for (const std::string& type : types) {
    const index num_terms = rng.uniform_int(1, 2);
    std::vector<AggregationTerm> terms;
    for (index t = 0; t < num_terms; ++t) {
      AggregationTerm term;
      term.var = types[static_cast<size_t>(rng.uniform_int(0, num_types - 1))];
      term.transpose = rng.bernoulli(0.5);
      term.mat = "A" + std::to_string(matrix_counter++);
      out.spec.matrices[term.mat] =
          term.transpose ? TypePair{term.var, type} : TypePair{type, term.var};
      const bool sizes_equal = out.spec.type_sizes[term.var] == out.spec.type_sizes[type];
      if (!sizes_equal || rng.bernoulli(0.7)) {
        term.msg = "mu" + std::to_string(message_counter++);
        out.spec.messages[*term.msg] = {term.var, type};
      }
      terms.push_back(std::move(term));
    }
    out.spec.updates[type] = std::move(terms);
  }

  out.plan = compile(out.spec);
  out.params = init_tgn_params(out.plan, rng);

  out.batch.num_graphs = 1;
  for (const std::string& type : types) {
    const index count = rng.uniform_int(1, max_vertices);
    out.batch.counts[type] = count;
    out.batch.embeddings[type] = Tensor(count, out.spec.type_sizes[type]);
    if (random_hidden && rng.bernoulli(0.5)) {
      out.batch.hidden[type] = Tensor(count, out.spec.type_sizes[type]);
    }
    out.batch.graph_of[type] = std::vector<index>(static_cast<size_t>(count), 0);
  }
  for (const auto& [name, ends] : out.spec.matrices) {
    const index rows = out.batch.counts[ends.first];
    const index cols = out.batch.counts[ends.second];
    std::vector<std::pair<index, index>> entries;
    for (index r = 0; r < rows; ++r) {
      for (index c = 0; c < cols; ++c) {
        if (rng.bernoulli(0.3)) entries.emplace_back(r, c);
      }
    }
    out.batch.matrices[name] = SparseBinaryMatrix::from_pairs(rows, cols, std::move(entries));
  }
  randomize_state(out.batch, rng);
  return out;
}

}  // namespace tgn::testing
