#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "support/invalid_specs.hpp"
#include "tgn/engine.hpp"
#include "tgn/models.hpp"
#include "tgn/spec.hpp"

using namespace tgn;
using Index = tgn::index;

namespace {

const std::filesystem::path kSpecDir = std::filesystem::path(TGN_REPO_DIR) / "specs";

bool has_issue(const std::vector<SpecIssue>& issues, SpecIssueCode code,
               const std::string& subject) {
  return std::any_of(issues.begin(), issues.end(), [&](const SpecIssue& issue) {
    return issue.code == code && issue.subject == subject;
  });
}

}  // namespace

TEST_CASE("the literal/clause description validates with the expected widths") {
  const TgnSpec spec = SatModel::make_spec(8, 6);
  const CompiledTgn plan = compile(spec);
  CHECK(plan.message_width("L") == 16);  // two terms of width d_l
  CHECK(plan.message_width("C") == 6);   // one term of width d_c
  CHECK(plan.update_for("L")->terms.size() == 2);
  CHECK(plan.update_for("C")->terms.size() == 1);
  CHECK(plan.update_for("L")->terms[1].msg == std::nullopt);  // negation term is identity
}

TEST_CASE("a term naming an undeclared matrix reports that name") {
  TgnSpec spec = SatModel::make_spec(8, 6);
  spec.updates["L"].push_back({"XY", std::nullopt, false, "L"});
  const auto issues = validate(spec);
  REQUIRE(!issues.empty());
  CHECK(has_issue(issues, SpecIssueCode::unknown_matrix, "XY"));
  CHECK_THROWS_AS(compile(spec), SpecError);
}

TEST_CASE("every crafted invalid description fails with its expected class") {
  for (const auto& c : testing::invalid_spec_suite()) {
    INFO(c.name);
    const auto issues = validate(c.spec);
    CHECK(!issues.empty());
    CHECK(has_issue(issues, c.expected, c.subject));
  }
}

TEST_CASE("validate never throws; compile carries the full issue list") {
  TgnSpec spec;  // empty: trivially valid (no types, no updates)
  CHECK(validate(spec).empty());

  spec.type_sizes = {{"A", 0}};
  spec.updates["A"] = {};
  spec.updates["B"] = {{"nope", "nada", false, "Z"}};
  const auto issues = validate(spec);
  CHECK(issues.size() >= 5);  // size, empty update, undeclared B/Z, unknown matrix + message
  try {
    compile(spec);
    FAIL("compile must throw");
  } catch (const SpecError& e) {
    CHECK(e.issues().size() == issues.size());
  }
}

TEST_CASE("minimal one-type description round-trips through text") {
  TgnSpec spec;
  spec.type_sizes = {{"V", 4}};
  spec.matrices = {{"M", {"V", "V"}}};
  spec.updates["V"] = {{"M", std::nullopt, true, "V"}};
  const TgnSpec reloaded = spec_from_json(spec_to_json(spec));
  CHECK(reloaded == spec);
}

TEST_CASE("all shipped golden descriptions parse, validate and match the builders") {
  struct GoldenCase {
    const char* file;
    TgnSpec expected;
  };
  const ModelConfig sat = default_config(Task::sat);
  const ModelConfig tsp = default_config(Task::tsp);
  const ModelConfig cent = default_config(Task::centrality);
  const ModelConfig kcol = default_config(Task::kcolor);
  const std::vector<GoldenCase> cases{
      {"neurosat.json", SatModel::make_spec(sat.d_l, sat.d_c)},
      {"tsp.json", TspModel::make_spec(tsp.d_v, tsp.d_e)},
      {"centrality.json", CentralityModel::make_spec(cent.d)},
      {"kcolor.json", KcolorModel::make_spec(kcol.d_v, kcol.d_c)},
      {"graph_network.json", graph_network_example_spec()},
  };
  for (const auto& c : cases) {
    INFO(c.file);
    const TgnSpec loaded = load_spec_file(kSpecDir / c.file);
    CHECK(validate(loaded).empty());
    CHECK(loaded == c.expected);
    CHECK(spec_from_json(spec_to_json(loaded)) == loaded);
  }
}

TEST_CASE("the shipped decision-TSP description has the documented structure") {
  const TgnSpec spec = load_spec_file(kSpecDir / "tsp.json");
  REQUIRE(spec.type_sizes.count("V") == 1);
  REQUIRE(spec.type_sizes.count("E") == 1);
  CHECK(spec.matrices.at("EV") == TypePair{"E", "V"});
  CHECK(spec.messages.at("V_msg_E") == TypePair{"V", "E"});
  CHECK(spec.messages.at("E_msg_V") == TypePair{"E", "V"});
  const auto& v_terms = spec.updates.at("V");
  REQUIRE(v_terms.size() == 1);
  CHECK(v_terms[0].mat == "EV");
  CHECK(v_terms[0].transpose);  // vertices read through the transposed incidence
  CHECK(v_terms[0].msg == "E_msg_V");
  const auto& e_terms = spec.updates.at("E");
  REQUIRE(e_terms.size() == 1);
  CHECK_FALSE(e_terms[0].transpose);
}

TEST_CASE("malformed documents are rejected with positions") {
  CHECK_THROWS_WITH_AS(spec_from_json(R"({"matrices":{},"messages":{},"updates":{}})"),
                       doctest::Contains("type_sizes"), Error);
  try {
    spec_from_json("{\n  \"type_sizes\": {\n    \"V\": oops\n");
    FAIL("must throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(
      spec_from_json(R"({"type_sizes":{"V":4,"V":5},"matrices":{},"messages":{},"updates":{}})"),
      doctest::Contains("duplicate key"), Error);
  CHECK_THROWS_AS(
      spec_from_json(
          R"({"type_sizes":{"V":4},"matrices":{},"messages":{},"updates":{"V":[{"mat":"M","weird":1,"var":"V"}]}})"),
      Error);
}

TEST_CASE("terms accept both transpose spellings and omit defaults on save") {
  const std::string text = R"({
    "type_sizes": {"V": 4},
    "matrices": {"M": ["V", "V"]},
    "messages": {},
    "updates": {"V": [{"mat": "M", "transpose": true, "var": "V"}]}
  })";
  const TgnSpec spec = spec_from_json(text);
  CHECK(spec.updates.at("V")[0].transpose);
  const std::string saved = spec_to_json(spec);
  CHECK(saved.find("transpose?") != std::string::npos);
}

TEST_CASE("renaming every name yields the same plan up to names") {
  const TgnSpec spec = SatModel::make_spec(8, 6);
  auto rename = [](const std::string& s) { return "x_" + s; };
  TgnSpec renamed;
  for (const auto& [k, v] : spec.type_sizes) renamed.type_sizes[rename(k)] = v;
  for (const auto& [k, v] : spec.matrices) {
    renamed.matrices[rename(k)] = {rename(v.first), rename(v.second)};
  }
  for (const auto& [k, v] : spec.messages) {
    renamed.messages[rename(k)] = {rename(v.first), rename(v.second)};
  }
  for (const auto& [k, terms] : spec.updates) {
    for (AggregationTerm term : terms) {
      term.mat = rename(term.mat);
      if (term.msg) term.msg = rename(*term.msg);
      term.var = rename(term.var);
      renamed.updates[rename(k)].push_back(term);
    }
  }
  const CompiledTgn a = compile(spec);
  const CompiledTgn b = compile(renamed);
  REQUIRE(a.updates.size() == b.updates.size());
  for (size_t i = 0; i < a.updates.size(); ++i) {
    CHECK(b.updates[i].type == rename(a.updates[i].type));
    CHECK(b.updates[i].width == a.updates[i].width);
    CHECK(b.updates[i].message_width == a.updates[i].message_width);
    CHECK(b.updates[i].terms.size() == a.updates[i].terms.size());
  }
}

TEST_CASE("compilation is deterministic") {
  const TgnSpec spec = KcolorModel::make_spec(5, 7);
  const CompiledTgn a = compile(spec);
  const CompiledTgn b = compile(spec);
  CHECK(a.types == b.types);
  CHECK(a.used_messages == b.used_messages);
  REQUIRE(a.updates.size() == b.updates.size());
  for (size_t i = 0; i < a.updates.size(); ++i) {
    CHECK(a.updates[i].terms == b.updates[i].terms);
    CHECK(a.updates[i].message_width == b.updates[i].message_width);
  }
}

TEST_CASE("node/edge/global example: dataflow and degenerate graphs") {
  const TgnSpec spec = graph_network_example_spec(4, 5, 6);
  CHECK(validate(spec).empty());
  const CompiledTgn plan = compile(spec);

  // The global type aggregates exactly twice: once from nodes, once from edges.
  const CompiledUpdate* global = plan.update_for("G");
  REQUIRE(global != nullptr);
  REQUIRE(global->terms.size() == 2);
  std::vector<std::string> senders{global->terms[0].var, global->terms[1].var};
  std::sort(senders.begin(), senders.end());
  CHECK(senders == std::vector<std::string>{"E", "V"});
  CHECK(plan.message_width("G") == 12);

  // One node, zero edges: every aggregation still executes.
  Rng rng(3);
  TgnParams params = init_tgn_params(plan, rng);
  GraphBatch batch;
  batch.num_graphs = 1;
  batch.counts = {{"E", 0}, {"G", 1}, {"V", 1}};
  batch.matrices["EV_src"] = SparseBinaryMatrix(0, 1);
  batch.matrices["EV_tgt"] = SparseBinaryMatrix(0, 1);
  batch.matrices["EG"] = SparseBinaryMatrix(0, 1);
  batch.matrices["VG"] = SparseBinaryMatrix::all_ones(1, 1);
  batch.embeddings["V"] = Tensor::ones(1, 4);
  batch.embeddings["E"] = Tensor(0, 5);
  batch.embeddings["G"] = Tensor::ones(1, 6);
  batch.graph_of["V"] = {0};
  batch.graph_of["E"] = {};
  batch.graph_of["G"] = {0};
  const RunResult out = run(plan, params, batch, 2);
  CHECK(out.embeddings.at("V").rows() == 1);
  CHECK(out.embeddings.at("E").rows() == 0);
  CHECK(out.embeddings.at("G").rows() == 1);
}
