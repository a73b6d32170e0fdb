#include "tgn/spec.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tgn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string issues_to_message(const std::vector<SpecIssue>& issues) {
  std::ostringstream os;
  os << "invalid TGN description (" << issues.size() << " issue"
     << (issues.size() == 1 ? "" : "s") << "):";
  for (const SpecIssue& issue : issues) {
    os << "\n  [" << to_string(issue.code) << "] " << issue.subject << ": " << issue.detail;
  }
  return os.str();
}

}  // namespace

const char* to_string(SpecIssueCode code) {
  switch (code) {
    case SpecIssueCode::non_positive_size: return "non-positive-size";
    case SpecIssueCode::undeclared_type: return "undeclared-type";
    case SpecIssueCode::unknown_matrix: return "unknown-matrix";
    case SpecIssueCode::unknown_message: return "unknown-message";
    case SpecIssueCode::message_endpoint_mismatch: return "message-endpoint-mismatch";
    case SpecIssueCode::matrix_endpoint_mismatch: return "matrix-endpoint-mismatch";
    case SpecIssueCode::identity_size_mismatch: return "identity-size-mismatch";
    case SpecIssueCode::empty_update: return "empty-update";
  }
  return "unknown";
}

SpecError::SpecError(std::vector<SpecIssue> issues)
    : Error(issues_to_message(issues)), issues_(std::move(issues)) {}

std::vector<SpecIssue> validate(const TgnSpec& spec) {
  std::vector<SpecIssue> issues;
  auto declared = [&](const std::string& t) { return spec.type_sizes.count(t) > 0; };
  auto undeclared = [&](const std::string& t, const std::string& where) {
    issues.push_back({SpecIssueCode::undeclared_type, t,
                      "type referenced by " + where + " is not in type_sizes"});
  };

  for (const auto& [type, size] : spec.type_sizes) {
    if (size <= 0) {
      issues.push_back({SpecIssueCode::non_positive_size, type,
                        "embedding size " + std::to_string(size) + " must be positive"});
    }
  }
  for (const auto& [name, ends] : spec.matrices) {
    if (!declared(ends.first)) undeclared(ends.first, "matrix " + name);
    if (!declared(ends.second)) undeclared(ends.second, "matrix " + name);
  }
  for (const auto& [name, ends] : spec.messages) {
    if (!declared(ends.first)) undeclared(ends.first, "message " + name);
    if (!declared(ends.second)) undeclared(ends.second, "message " + name);
  }

  for (const auto& [type, terms] : spec.updates) {
    if (!declared(type)) undeclared(type, "updates");
    if (terms.empty()) {
      issues.push_back({SpecIssueCode::empty_update, type,
                        "updated type has an empty aggregation list"});
      continue;
    }
    for (const AggregationTerm& term : terms) {
      if (!declared(term.var)) undeclared(term.var, "a term updating " + type);

      auto mit = spec.matrices.find(term.mat);
      if (mit == spec.matrices.end()) {
        issues.push_back({SpecIssueCode::unknown_matrix, term.mat,
                          "matrix used by a term updating " + type + " is not declared"});
      } else {
        TypePair eff = mit->second;
        if (term.transpose) std::swap(eff.first, eff.second);
        if (eff.first != type || eff.second != term.var) {
          issues.push_back(
              {SpecIssueCode::matrix_endpoint_mismatch, term.mat,
               "term updating " + type + " from " + term.var + " needs a (" + type + "," +
                   term.var + ") orientation but the matrix" +
                   (term.transpose ? " transposed" : "") + " is (" + eff.first + "," +
                   eff.second + ")"});
        }
      }

      if (term.msg.has_value()) {
        auto it = spec.messages.find(*term.msg);
        if (it == spec.messages.end()) {
          issues.push_back({SpecIssueCode::unknown_message, *term.msg,
                            "message used by a term updating " + type + " is not declared"});
        } else if (it->second.first != term.var || it->second.second != type) {
          issues.push_back({SpecIssueCode::message_endpoint_mismatch, *term.msg,
                            "declared (" + it->second.first + "->" + it->second.second +
                                ") but the term sends " + term.var + " -> " + type});
        }
      } else if (declared(term.var) && declared(type) &&
                 spec.type_sizes.at(term.var) != spec.type_sizes.at(type)) {
        issues.push_back(
            {SpecIssueCode::identity_size_mismatch, term.mat,
             "identity message from " + term.var + " (size " +
                 std::to_string(spec.type_sizes.at(term.var)) + ") into " + type + " (size " +
                 std::to_string(spec.type_sizes.at(type)) + ") needs equal sizes"});
      }
    }
  }
  return issues;
}

CompiledTgn compile(const TgnSpec& spec) {
  std::vector<SpecIssue> issues = validate(spec);
  if (!issues.empty()) throw SpecError(std::move(issues));

  CompiledTgn plan;
  plan.type_sizes = spec.type_sizes;
  plan.matrices = spec.matrices;
  plan.messages = spec.messages;
  for (const auto& [type, size] : spec.type_sizes) plan.types.push_back(type);

  std::set<std::string> used;
  for (const auto& [type, terms] : spec.updates) {
    CompiledUpdate update;
    update.type = type;
    update.width = spec.type_sizes.at(type);
    update.message_width = static_cast<index>(terms.size()) * update.width;
    update.terms = terms;
    for (const AggregationTerm& term : terms) {
      if (term.msg.has_value()) used.insert(*term.msg);
    }
    plan.updates.push_back(std::move(update));
  }
  plan.used_messages.assign(used.begin(), used.end());
  return plan;
}

index CompiledTgn::size_of(const std::string& type) const {
  auto it = type_sizes.find(type);
  if (it == type_sizes.end()) throw Error("plan: unknown type " + type);
  return it->second;
}

const CompiledUpdate* CompiledTgn::update_for(const std::string& type) const {
  for (const CompiledUpdate& u : updates) {
    if (u.type == type) return &u;
  }
  return nullptr;
}

index CompiledTgn::message_width(const std::string& type) const {
  const CompiledUpdate* u = update_for(type);
  return u == nullptr ? 0 : u->message_width;
}

// -- serialization ----------------------------------------------------------

namespace {

std::pair<int, int> line_col(const std::string& text, size_t byte) {
  int line = 1;
  int col = 1;
  for (size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
  }
  return {line, col};
}

index get_size(const json& j, const std::string& type) {
  if (!j.is_number_integer() || j.get<index>() != j.get<index>()) {
    throw Error("type_sizes." + type + " must be an integer");
  }
  return j.get<index>();
}

TypePair get_pair(const json& j, const std::string& section, const std::string& name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
    throw Error(section + "." + name + " must be a pair of type names");
  }
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

AggregationTerm get_term(const json& j, const std::string& type) {
  const std::string where = "updates." + type;
  if (!j.is_object()) throw Error(where + " entries must be objects");
  AggregationTerm term;
  bool have_mat = false, have_var = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "mat") {
      if (!value.is_string()) throw Error(where + ": mat must be a string");
      term.mat = value.get<std::string>();
      have_mat = true;
    } else if (key == "msg") {
      if (!value.is_string()) throw Error(where + ": msg must be a string");
      term.msg = value.get<std::string>();
    } else if (key == "transpose?" || key == "transpose") {
      if (!value.is_boolean()) throw Error(where + ": transpose? must be a boolean");
      term.transpose = value.get<bool>();
    } else if (key == "var") {
      if (!value.is_string()) throw Error(where + ": var must be a string");
      term.var = value.get<std::string>();
      have_var = true;
    } else {
      throw Error(where + ": unknown term key \"" + key + "\"");
    }
  }
  if (!have_mat) throw Error(where + ": term is missing \"mat\"");
  if (!have_var) throw Error(where + ": term is missing \"var\"");
  return term;
}

}  // namespace

TgnSpec spec_from_json(const std::string& text) {
  std::vector<std::set<std::string>> object_keys;
  json::parser_callback_t guard = [&](int /*depth*/, json::parse_event_t event,
                                      json& parsed) -> bool {
    if (event == json::parse_event_t::object_start) {
      object_keys.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      object_keys.pop_back();
    } else if (event == json::parse_event_t::key) {
      const auto key = parsed.get<std::string>();
      if (!object_keys.back().insert(key).second) {
        throw Error("duplicate key \"" + key + "\"");
      }
    }
    return true;
  };

  json doc;
  try {
    doc = json::parse(text, guard);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte);
    throw Error("parse error at line " + std::to_string(line) + ", column " +
                std::to_string(col) + ": " + e.what());
  }

  if (!doc.is_object()) throw Error("document must be a JSON object");
  for (const char* section : {"type_sizes", "matrices", "messages", "updates"}) {
    if (!doc.contains(section)) throw Error("missing section \"" + std::string(section) + "\"");
    if (!doc[section].is_object()) {
      throw Error("section \"" + std::string(section) + "\" must be an object");
    }
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "type_sizes" && key != "matrices" && key != "messages" && key != "updates") {
      throw Error("unknown section \"" + key + "\"");
    }
  }

  TgnSpec spec;
  for (const auto& [type, size] : doc["type_sizes"].items()) {
    spec.type_sizes[type] = get_size(size, type);
  }
  for (const auto& [name, ends] : doc["matrices"].items()) {
    spec.matrices[name] = get_pair(ends, "matrices", name);
  }
  for (const auto& [name, ends] : doc["messages"].items()) {
    spec.messages[name] = get_pair(ends, "messages", name);
  }
  for (const auto& [type, terms] : doc["updates"].items()) {
    if (!terms.is_array()) throw Error("updates." + type + " must be an array of terms");
    auto& list = spec.updates[type];
    for (const json& term : terms) list.push_back(get_term(term, type));
  }
  return spec;
}

std::string spec_to_json(const TgnSpec& spec) {
  ordered_json doc;
  ordered_json sizes = ordered_json::object();
  for (const auto& [type, size] : spec.type_sizes) sizes[type] = size;
  ordered_json mats = ordered_json::object();
  for (const auto& [name, ends] : spec.matrices) mats[name] = {ends.first, ends.second};
  ordered_json msgs = ordered_json::object();
  for (const auto& [name, ends] : spec.messages) msgs[name] = {ends.first, ends.second};
  ordered_json updates = ordered_json::object();
  for (const auto& [type, terms] : spec.updates) {
    ordered_json list = ordered_json::array();
    for (const AggregationTerm& term : terms) {
      ordered_json t = ordered_json::object();
      t["mat"] = term.mat;
      if (term.msg.has_value()) t["msg"] = *term.msg;
      if (term.transpose) t["transpose?"] = true;
      t["var"] = term.var;
      list.push_back(std::move(t));
    }
    updates[type] = std::move(list);
  }
  doc["type_sizes"] = std::move(sizes);
  doc["matrices"] = std::move(mats);
  doc["messages"] = std::move(msgs);
  doc["updates"] = std::move(updates);
  return doc.dump(2) + "\n";
}

TgnSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return spec_from_json(buf.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void save_spec_file(const TgnSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << spec_to_json(spec);
}

TgnSpec graph_network_example_spec(index d_node, index d_edge, index d_global) {
  TgnSpec spec;
  spec.type_sizes = {{"V", d_node}, {"E", d_edge}, {"G", d_global}};
  spec.matrices = {
      {"EV_src", {"E", "V"}},  // edge -> its source vertex
      {"EV_tgt", {"E", "V"}},  // edge -> its target vertex
      {"EG", {"E", "G"}},      // complete: every edge -> the graph vertex
      {"VG", {"V", "G"}},      // complete: every node -> the graph vertex
  };
  spec.messages = {
      {"V_src_E", {"V", "E"}}, {"V_tgt_E", {"V", "E"}}, {"G_cast_E", {"G", "E"}},
      {"E_cast_V", {"E", "V"}}, {"G_cast_V", {"G", "V"}},
      {"V_cast_G", {"V", "G"}}, {"E_cast_G", {"E", "G"}},
  };
  spec.updates["E"] = {
      {"EV_src", "V_src_E", false, "V"},
      {"EV_tgt", "V_tgt_E", false, "V"},
      {"EG", "G_cast_E", false, "G"},
  };
  spec.updates["V"] = {
      {"EV_tgt", "E_cast_V", true, "E"},
      {"VG", "G_cast_V", false, "G"},
  };
  spec.updates["G"] = {
      {"VG", "V_cast_G", true, "V"},
      {"EG", "E_cast_G", true, "E"},
  };
  return spec;
}

}  // namespace tgn
