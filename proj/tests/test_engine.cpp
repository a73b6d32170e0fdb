#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support/dense_oracle.hpp"
#include "support/gradcheck.hpp"
#include "support/random_tgn.hpp"
#include "tgn/engine.hpp"

using namespace tgn;
using Index = tgn::index;

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.same_shape(b));
  double worst = 0;
  for (Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a.data()[i] - b.data()[i])));
  }
  return worst;
}

// Single type "V", one matrix "M", one MLP message.
struct OneTypeCase {
  TgnSpec spec;
  CompiledTgn plan;
  TgnParams params;
  GraphBatch batch;
};

OneTypeCase one_type_case(Index n, Index d, const std::vector<std::pair<Index, Index>>& edges,
                          std::uint64_t seed) {
  OneTypeCase c;
  c.spec.type_sizes = {{"V", d}};
  c.spec.matrices = {{"M", {"V", "V"}}};
  c.spec.messages = {{"V_cast_V", {"V", "V"}}};
  c.spec.updates["V"] = {{"M", "V_cast_V", false, "V"}};
  c.plan = compile(c.spec);
  Rng rng(seed);
  c.params = init_tgn_params(c.plan, rng);
  c.batch.num_graphs = 1;
  c.batch.counts = {{"V", n}};
  c.batch.matrices["M"] = SparseBinaryMatrix::from_pairs(n, n, edges);
  Tensor emb(n, d);
  for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = rng.uniform(-1, 1);
  c.batch.embeddings["V"] = std::move(emb);
  c.batch.graph_of["V"] = std::vector<Index>(static_cast<size_t>(n), 0);
  return c;
}

}  // namespace

TEST_CASE("t_max = 0 returns the initial embeddings unchanged") {
  auto c = one_type_case(4, 3, {{0, 1}, {1, 2}}, 1);
  const RunResult out = run(c.plan, c.params, c.batch, 0);
  CHECK(out.embeddings.at("V").data() == c.batch.embeddings.at("V").data());
}

TEST_CASE("an isolated vertex equals one lstm step on a zero message") {
  auto c = one_type_case(1, 4, {}, 2);
  const RunResult out = run(c.plan, c.params, c.batch, 1);
  const auto direct = nn::lstm_step(c.params.updates.at("V"), Tensor(1, 4),
                                    c.batch.embeddings.at("V"), Tensor(1, 4));
  CHECK(max_abs_diff(out.embeddings.at("V"), direct.h) == 0.0);
  CHECK(max_abs_diff(out.hidden.at("V"), direct.c) == 0.0);
}

TEST_CASE("3-vertex path matches the dense loop re-implementation") {
  auto c = one_type_case(3, 4, {{0, 1}, {1, 0}, {1, 2}, {2, 1}}, 3);
  const RunResult out = run(c.plan, c.params, c.batch, 2);
  const auto expect = testing::oracle_run(c.plan, c.params, c.batch, 2);
  CHECK(testing::max_abs_diff(expect.at("V"), out.embeddings.at("V")) < 1e-10);
}

TEST_CASE("random plans match the dense loop re-implementation") {
  Rng rng(4);
  for (int rep = 0; rep < 25; ++rep) {
    auto c = testing::random_case(rng);
    const int t_max = static_cast<int>(rng.uniform_int(0, 3));
    const RunResult out = run(c.plan, c.params, c.batch, t_max);
    const auto expect = testing::oracle_run(c.plan, c.params, c.batch, t_max);
    for (const std::string& type : c.plan.types) {
      CHECK(testing::max_abs_diff(expect.at(type), out.embeddings.at(type)) < 1e-10);
    }
  }
}

TEST_CASE("initial hidden states are honored and default to zero") {
  auto c = one_type_case(3, 4, {{0, 1}, {2, 0}}, 5);
  const RunResult zero_hidden = run(c.plan, c.params, c.batch, 1);
  c.batch.hidden["V"] = Tensor(3, 4);  // explicit zeros: identical
  const RunResult explicit_hidden = run(c.plan, c.params, c.batch, 1);
  CHECK(zero_hidden.embeddings.at("V").data() == explicit_hidden.embeddings.at("V").data());

  Rng rng(6);
  for (Index i = 0; i < c.batch.hidden["V"].size(); ++i) {
    c.batch.hidden["V"].data()[i] = rng.uniform(-1, 1);
  }
  const RunResult warm = run(c.plan, c.params, c.batch, 1);
  CHECK(max_abs_diff(warm.embeddings.at("V"), zero_hidden.embeddings.at("V")) > 0);
}

TEST_CASE("batch mismatches are rejected") {
  auto c = one_type_case(3, 4, {{0, 1}}, 7);
  GraphBatch bad = c.batch;
  bad.embeddings["V"] = Tensor(3, 5);
  CHECK_THROWS_AS(run(c.plan, c.params, bad, 1), Error);
  bad = c.batch;
  bad.matrices["M"] = SparseBinaryMatrix(2, 3);
  CHECK_THROWS_AS(run(c.plan, c.params, bad, 1), Error);
  bad = c.batch;
  bad.matrices.erase("M");
  CHECK_THROWS_AS(run(c.plan, c.params, bad, 1), Error);
  bad = c.batch;
  bad.graph_of["V"] = {0, 0};
  CHECK_THROWS_AS(run(c.plan, c.params, bad, 1), Error);
  CHECK_THROWS_AS(run(c.plan, c.params, c.batch, -1), Error);
}

TEST_CASE("batch_concat of one batch is that batch") {
  auto c = one_type_case(3, 4, {{0, 1}}, 8);
  const GraphBatch out = batch_concat({c.batch});
  CHECK(out.num_graphs == 1);
  CHECK(out.embeddings.at("V").data() == c.batch.embeddings.at("V").data());
  CHECK(out.matrices.at("M").entries() == c.batch.matrices.at("M").entries());
}

TEST_CASE("batch_concat builds a block diagonal with no cross edges") {
  auto a = one_type_case(2, 3, {{0, 1}, {1, 0}}, 9);
  auto b = one_type_case(2, 3, {{0, 0}, {1, 1}}, 10);
  const GraphBatch both = batch_concat({a.batch, b.batch});
  CHECK(both.num_graphs == 2);
  CHECK(both.counts.at("V") == 4);
  CHECK(both.graph_of.at("V") == std::vector<Index>{0, 0, 1, 1});
  for (const auto& [r, cidx] : both.matrices.at("M").entries()) {
    const bool first_block = r < 2 && cidx < 2;
    const bool second_block = r >= 2 && cidx >= 2;
    CHECK((first_block || second_block));
  }
}

TEST_CASE("batched execution equals separate execution") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    auto a = testing::random_case(rng, 2, 6);
    // Same plan, fresh graph/state for the sibling batch.
    auto b = a;
    for (auto& [name, m] : b.batch.matrices) {
      std::vector<std::pair<Index, Index>> entries;
      for (Index r = 0; r < m.rows(); ++r) {
        for (Index col = 0; col < m.cols(); ++col) {
          if (rng.bernoulli(static_cast<real>(0.3))) entries.emplace_back(r, col);
        }
      }
      m = SparseBinaryMatrix::from_pairs(m.rows(), m.cols(), std::move(entries));
    }
    testing::randomize_state(b.batch, rng);

    const GraphBatch joined = batch_concat({a.batch, b.batch});
    const RunResult separate = run(a.plan, a.params, a.batch, 2);
    const RunResult batched = run(a.plan, a.params, joined, 2);
    for (const std::string& type : a.plan.types) {
      const Tensor& part = separate.embeddings.at(type);
      const Tensor& whole = batched.embeddings.at(type);
      for (Index i = 0; i < part.rows(); ++i) {
        for (Index j = 0; j < part.cols(); ++j) {
          CHECK(std::abs(whole(i, j) - part(i, j)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("co-batched graphs cannot influence each other") {
  Rng rng(12);
  auto a = testing::random_case(rng, 2, 5);
  auto b = a;
  testing::randomize_state(b.batch, rng);

  const RunResult base = run(a.plan, a.params, batch_concat({a.batch, b.batch}), 3);
  testing::randomize_state(b.batch, rng);  // perturb only the second graph
  const RunResult perturbed = run(a.plan, a.params, batch_concat({a.batch, b.batch}), 3);
  for (const std::string& type : a.plan.types) {
    const Index rows = a.batch.counts.at(type);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < base.embeddings.at(type).cols(); ++j) {
        CHECK(base.embeddings.at(type)(i, j) == perturbed.embeddings.at(type)(i, j));
      }
    }
  }
}

TEST_CASE("permutation equivariance on random plans") {
  Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    auto c = testing::random_case(rng);
    const auto perms = testing::random_perms(c.batch, rng);
    const GraphBatch permuted = testing::permute_batch(c.batch, c.plan, perms);
    const RunResult out = run(c.plan, c.params, c.batch, 2);
    const RunResult out_perm = run(c.plan, c.params, permuted, 2);
    for (const std::string& type : c.plan.types) {
      const auto& p = perms.at(type);
      const Tensor& x = out.embeddings.at(type);
      const Tensor& y = out_perm.embeddings.at(type);
      for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
          CHECK(std::abs(y(p[static_cast<size_t>(i)], j) - x(i, j)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("update order within an iteration does not matter") {
  Rng rng(14);
  auto c = testing::random_case(rng, 2, 6);
  RunOptions reversed;
  for (const CompiledUpdate& u : c.plan.updates) reversed.update_order.push_back(u.type);
  std::reverse(reversed.update_order.begin(), reversed.update_order.end());
  const RunResult fwd = run(c.plan, c.params, c.batch, 3);
  const RunResult rev = run(c.plan, c.params, c.batch, 3, reversed);
  for (const std::string& type : c.plan.types) {
    CHECK(fwd.embeddings.at(type).data() == rev.embeddings.at(type).data());  // bitwise
  }
}

TEST_CASE("mean aggregation option changes only the scaling") {
  auto c = one_type_case(2, 2, {{0, 1}, {1, 0}, {1, 1}}, 15);
  RunOptions mean;
  mean.aggregation = Aggregation::mean;
  const RunResult s = run(c.plan, c.params, c.batch, 1);
  const RunResult m = run(c.plan, c.params, c.batch, 1, mean);
  // Row 0 has one incoming entry: sum == mean. Row 1 has two: they differ.
  CHECK(max_abs_diff(s.embeddings.at("V"), m.embeddings.at("V")) > 0);
  const auto msg = nn::mlp_forward(c.params.messages.at("V_cast_V"), c.batch.embeddings.at("V"));
  const Tensor agg_sum = spmm(c.batch.matrices.at("M"), msg, false, Aggregation::sum);
  const Tensor agg_mean = spmm(c.batch.matrices.at("M"), msg, false, Aggregation::mean);
  for (Index j = 0; j < agg_sum.cols(); ++j) {
    CHECK(agg_sum(0, j) == agg_mean(0, j));
    CHECK(agg_mean(1, j) == doctest::Approx(agg_sum(1, j) / 2).epsilon(1e-12));
  }
}

TEST_CASE("embedding trace snapshots the whole trajectory") {
  auto c = one_type_case(3, 4, {{0, 1}, {1, 2}, {2, 0}}, 16);
  const auto trace = embedding_trace(c.plan, c.params, c.batch, 3);
  CHECK(trace.size() == 4);
  CHECK(trace[0].at("V").data() == c.batch.embeddings.at("V").data());
  const RunResult out = run(c.plan, c.params, c.batch, 3);
  CHECK(trace.back().at("V").data() == out.embeddings.at("V").data());  // bitwise

  std::stringstream csv;
  write_trace_csv(csv, trace);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "type,t,vertex,dim,value");
  csv.seekg(0);
  const auto reload = read_trace_csv(csv);
  REQUIRE(reload.size() == trace.size());
  for (size_t t = 0; t < trace.size(); ++t) {
    CHECK(reload[t].at("V").data() == trace[t].at("V").data());  // 17 digits round-trip
  }
}

TEST_CASE("gradients flow through a 2-type network for 3 iterations") {
  Rng rng(17);
  // Two types, MLP message + identity term, transposed and plain matrices.
  TgnSpec spec;
  spec.type_sizes = {{"P", 3}, {"Q", 3}};
  spec.matrices = {{"PQ", {"P", "Q"}}, {"PP", {"P", "P"}}};
  spec.messages = {{"Q_cast_P", {"Q", "P"}}, {"P_cast_Q", {"P", "Q"}}};
  spec.updates["P"] = {{"PQ", "Q_cast_P", false, "Q"}, {"PP", std::nullopt, false, "P"}};
  spec.updates["Q"] = {{"PQ", "P_cast_Q", true, "P"}};
  const CompiledTgn plan = compile(spec);
  TgnParams params = init_tgn_params(plan, rng);

  GraphBatch batch;
  batch.num_graphs = 1;
  batch.counts = {{"P", 4}, {"Q", 2}};
  batch.matrices["PQ"] = SparseBinaryMatrix::from_pairs(4, 2, {{0, 0}, {1, 0}, {2, 1}, {3, 1}});
  batch.matrices["PP"] = SparseBinaryMatrix::from_pairs(4, 4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  batch.embeddings["P"] = Tensor(4, 3);
  batch.embeddings["Q"] = Tensor(2, 3);
  batch.graph_of["P"] = {0, 0, 0, 0};
  batch.graph_of["Q"] = {0, 0};
  testing::randomize_state(batch, rng);

  nn::ParamMap tgn_params;
  collect_params(params, tgn_params);
  std::vector<std::pair<std::string, Tensor*>> all;
  for (auto& [name, t] : tgn_params) all.emplace_back(name, t);
  all.emplace_back("init/P", &batch.embeddings.at("P"));
  all.emplace_back("init/Q", &batch.embeddings.at("Q"));

  const Tensor weights_p = Tensor::from_rows({{0.3, -0.7, 0.2}});
  const auto report = testing::finite_difference_check(
      all, [&](Tape& tape) {
        for (auto& [name, t] : tgn_params) tape.watch(*t);
        tape.watch(batch.embeddings.at("P"));
        tape.watch(batch.embeddings.at("Q"));
        const RunResult out = run(plan, params, batch, 3);
        const Tensor folded = add(sum(mul(out.embeddings.at("P"), tile_rows(weights_p, 4))),
                                  sum(out.embeddings.at("Q")));
        return folded;
      });
  INFO(report.worst);
  CHECK(report.max_rel_err < 1e-4);
  CHECK(report.checked > 100);
}
