#pragma once

// Crafted invalid TGN descriptions, each paired with the issue class its
// validation must report.

#include <string>
#include <vector>

#include "tgn/spec.hpp"

namespace tgn::testing {

struct InvalidSpecCase {
  std::string name;
  TgnSpec spec;
  SpecIssueCode expected;
  std::string subject;  // offending name the issue must carry
};

inline std::vector<InvalidSpecCase> invalid_spec_suite() {
  std::vector<InvalidSpecCase> cases;
  auto base = [] {
    TgnSpec spec;
    spec.type_sizes = {{"A", 4}, {"B", 6}};
    spec.matrices = {{"AB", {"A", "B"}}, {"AA", {"A", "A"}}};
    spec.messages = {{"B_to_A", {"B", "A"}}, {"A_to_B", {"A", "B"}}};
    spec.updates["A"] = {{"AB", "B_to_A", false, "B"}};
    return spec;
  };

  {
    InvalidSpecCase c{"matrix references undeclared type", base(),
                      SpecIssueCode::undeclared_type, "Z"};
    c.spec.matrices["AZ"] = {"A", "Z"};
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"message references undeclared type", base(),
                      SpecIssueCode::undeclared_type, "Q"};
    c.spec.messages["bad"] = {"Q", "A"};
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"update key is an undeclared type", base(),
                      SpecIssueCode::undeclared_type, "Ghost"};
    c.spec.updates["Ghost"] = {{"AA", std::nullopt, false, "A"}};
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"term sender is an undeclared type", base(),
                      SpecIssueCode::undeclared_type, "W"};
    c.spec.updates["A"].push_back({"AA", std::nullopt, false, "W"});
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"term names a matrix that is never declared", base(),
                      SpecIssueCode::unknown_matrix, "XY"};
    c.spec.updates["A"].push_back({"XY", std::nullopt, false, "A"});
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"term names a message that is never declared", base(),
                      SpecIssueCode::unknown_message, "mystery"};
    c.spec.updates["A"].push_back({"AA", "mystery", false, "A"});
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"message direction opposes the term", base(),
                      SpecIssueCode::message_endpoint_mismatch, "A_to_B"};
    c.spec.updates["A"].push_back({"AB", "A_to_B", false, "B"});
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"matrix needs a transpose the term does not set", base(),
                      SpecIssueCode::matrix_endpoint_mismatch, "AB"};
    c.spec.updates["B"] = {{"AB", "A_to_B", false, "A"}};
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"matrix endpoints do not touch the updated type", base(),
                      SpecIssueCode::matrix_endpoint_mismatch, "AA"};
    c.spec.updates["B"] = {{"AA", "A_to_B", false, "A"}};
    cases.push_back(std::move(c));
  }
  {
    // Identity message between types of different widths, the miswired
    // var:'C' shape of the coloring dictionaries.
    InvalidSpecCase c{"identity message between unequal sizes", TgnSpec{},
                      SpecIssueCode::identity_size_mismatch, "VC"};
    c.spec.type_sizes = {{"V", 4}, {"C", 6}};
    c.spec.matrices = {{"VV", {"V", "V"}}, {"VC", {"V", "C"}}};
    c.spec.updates["V"] = {{"VV", std::nullopt, false, "V"},
                           {"VC", std::nullopt, false, "C"}};
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"updated type with an empty aggregation list", base(),
                      SpecIssueCode::empty_update, "B"};
    c.spec.updates["B"] = {};
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"zero embedding size", base(), SpecIssueCode::non_positive_size, "A"};
    c.spec.type_sizes["A"] = 0;
    cases.push_back(std::move(c));
  }
  {
    InvalidSpecCase c{"negative embedding size", base(), SpecIssueCode::non_positive_size, "B"};
    c.spec.type_sizes["B"] = -3;
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace tgn::testing
