#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgn/tensor.hpp"

namespace tgn {

/// One argument of an update function: aggregate messages of type `var`
/// through adjacency matrix `mat` (optionally transposed). When `msg` is
/// absent the sender embeddings pass through unchanged (identity message),
/// which requires matching embedding sizes.
struct AggregationTerm {
  std::string mat;
  std::optional<std::string> msg;
  bool transpose = false;
  std::string var;

  bool operator==(const AggregationTerm&) const = default;
};

using TypePair = std::pair<std::string, std::string>;

/// Declarative description of a typed graph network: embedding sizes per
/// vertex type, named adjacency matrices and message functions between
/// types, and per-type lists of aggregation terms.
struct TgnSpec {
  std::map<std::string, index> type_sizes;
  std::map<std::string, TypePair> matrices;   // name -> (row type, col type)
  std::map<std::string, TypePair> messages;   // name -> (from type, to type)
  std::map<std::string, std::vector<AggregationTerm>> updates;

  bool operator==(const TgnSpec&) const = default;
};

enum class SpecIssueCode {
  non_positive_size,
  undeclared_type,
  unknown_matrix,
  unknown_message,
  message_endpoint_mismatch,
  matrix_endpoint_mismatch,
  identity_size_mismatch,
  empty_update,
};

struct SpecIssue {
  SpecIssueCode code;
  std::string subject;  // offending name
  std::string detail;
};

class SpecError : public Error {
 public:
  explicit SpecError(std::vector<SpecIssue> issues);
  const std::vector<SpecIssue>& issues() const { return issues_; }

 private:
  std::vector<SpecIssue> issues_;
};

/// Update plan of one type: the term list in declared order plus the derived
/// dimensions. `message_width` is the total width of the aggregated message
/// block (each term contributes the updated type's embedding size), so the
/// update function consumes width + message_width columns of information.
struct CompiledUpdate {
  std::string type;
  index width = 0;          // n_i
  index message_width = 0;  // D(i)
  std::vector<AggregationTerm> terms;
};

/// Validated, dimension-checked execution plan. Deterministic: the same
/// description always compiles to the same plan.
struct CompiledTgn {
  std::vector<std::string> types;  // name order
  std::map<std::string, index> type_sizes;
  std::map<std::string, TypePair> matrices;
  std::map<std::string, TypePair> messages;
  std::vector<CompiledUpdate> updates;        // type-name order
  std::vector<std::string> used_messages;     // messages referenced by terms

  index size_of(const std::string& type) const;
  const CompiledUpdate* update_for(const std::string& type) const;
  /// D(i); zero for types that are never updated.
  index message_width(const std::string& type) const;
};

/// Collects every violation; an empty result means the description is valid.
std::vector<SpecIssue> validate(const TgnSpec& spec);

/// Returns the plan, or throws SpecError carrying every violation.
CompiledTgn compile(const TgnSpec& spec);

// -- serialization ----------------------------------------------------------
// JSON document with four top-level sections mirroring the builder
// dictionaries: type_sizes, matrices, messages, updates. Aggregation terms
// use keys "mat", "msg" (optional), "transpose?" (optional) and "var".

std::string spec_to_json(const TgnSpec& spec);
TgnSpec spec_from_json(const std::string& text);

TgnSpec load_spec_file(const std::filesystem::path& path);
void save_spec_file(const TgnSpec& spec, const std::filesystem::path& path);

/// Node/edge/global instantiation: edges exchange with their endpoint nodes
/// through source/target incidence matrices, and a one-vertex global type is
/// fully connected to both nodes and edges.
TgnSpec graph_network_example_spec(index d_node = 8, index d_edge = 8, index d_global = 8);

const char* to_string(SpecIssueCode code);

}  // namespace tgn
