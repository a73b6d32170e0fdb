#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgn/rng.hpp"
#include "tgn/tensor.hpp"

namespace tgn {

struct Graph {
  index n = 0;
  bool directed = false;
  std::vector<std::pair<index, index>> edges;
};

// -- SAT ----------------------------------------------------------------

/// CNF over variables 1..num_vars; a literal is +v or -v. Clauses never
/// contain a variable twice (in either polarity). The label always matches
/// dpll_solve.
struct CnfInstance {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  bool label = false;
};

struct DpllResult {
  bool sat = false;
  std::vector<bool> assignment;  // 1-based values at index var-1; valid when sat
};

/// Exact DPLL with unit propagation. The witness assignment satisfies every
/// clause when sat.
DpllResult dpll_solve(const CnfInstance& cnf, int max_vars = 20);

bool satisfies(const CnfInstance& cnf, const std::vector<bool>& assignment);

/// Adds random clauses (width 2..4, distinct variables, uniform signs) until
/// the formula turns unsatisfiable, then flips one literal of the final
/// clause to obtain the satisfiable sibling. The pair differs in exactly one
/// sign and both labels are verified with dpll_solve.
std::pair<CnfInstance, CnfInstance> gen_sat_pair(int num_vars, Rng& rng);  // (sat, unsat)

// -- decision TSP ---------------------------------------------------------

struct TspDecisionInstance {
  std::vector<std::array<real, 2>> coords;   // points in the unit square
  std::vector<std::vector<real>> weights;    // symmetric euclidean distances
  real target_cost = 0;
  bool label = false;  // optimal tour cost <= target_cost
};

/// Exact optimal tour cost by the Bellman-Held-Karp subset dynamic program.
real held_karp(const std::vector<std::vector<real>>& weights, index max_n = 14);

std::vector<std::vector<real>> euclidean_weights(const std::vector<std::array<real, 2>>& coords);

/// Random euclidean instance pair sharing one graph: targets at 1.02 and
/// 0.98 of the optimal cost, labeled YES / NO by construction.
std::pair<TspDecisionInstance, TspDecisionInstance> gen_tsp_pair(index n, Rng& rng);

// -- centrality -------------------------------------------------------------

struct CentralityPair {
  std::string measure;
  index u = 0;
  index v = 0;
  bool label = false;  // c(u) < c(v); ties are never sampled
};

struct CentralityInstance {
  Graph graph;  // directed
  std::map<std::string, std::vector<real>> values;
  std::vector<CentralityPair> pairs;
};

inline const std::vector<std::string> kDefaultCentralityMeasures = {"degree", "betweenness"};

/// Per-vertex values for the requested measures. "degree" counts in+out
/// edges; "betweenness" is Brandes' algorithm on unweighted paths
/// (unreachable pairs contribute zero). "closeness" (harmonic) and
/// "eigenvector" are available but not in the default set.
std::map<std::string, std::vector<real>> centralities(
    const Graph& graph, const std::vector<std::string>& measures = kDefaultCentralityMeasures);

CentralityInstance gen_centrality_instance(
    index n, Rng& rng, const std::vector<std::string>& measures = kDefaultCentralityMeasures,
    index pairs_per_measure = 12);

// -- k-coloring -------------------------------------------------------------

struct ColoringInstance {
  Graph graph;  // undirected, simple
  int k = 3;
  bool label = false;
};

/// Exact backtracking decision with the first vertex pinned to color 0.
bool kcolorable(const Graph& graph, int k, index max_n = 20);

/// Adds random edges until the graph stops being k-colorable; the YES
/// instance drops the edge that crossed the threshold. Requires n > k.
std::pair<ColoringInstance, ColoringInstance> gen_kcolor_pair(index n, int k, Rng& rng);

// -- instance files -----------------------------------------------------------
// All floating point values are written with 17 significant digits. Readers
// re-verify labels against the oracles and fail on any inconsistency.

void write_dimacs(const CnfInstance& cnf, std::ostream& out);
CnfInstance read_dimacs(std::istream& in);

void write_tsp(const TspDecisionInstance& inst, std::ostream& out);
TspDecisionInstance read_tsp(std::istream& in);

void write_graph(const Graph& graph, std::ostream& out);
Graph read_graph(std::istream& in);

void write_centrality_values(const CentralityInstance& inst, std::ostream& out);
/// Reads values and pairs for a previously read graph.
CentralityInstance read_centrality_values(const Graph& graph, std::istream& in);

void write_kcolor(const ColoringInstance& inst, std::ostream& out);
ColoringInstance read_kcolor(std::istream& in);

// -- dataset directories ------------------------------------------------------
// A dataset is a directory of instance files, loaded in filename order:
// *.cnf, *.tsp, *.graph + *.cent, *.kcol.

void save_sat_dataset(const std::vector<CnfInstance>& data, const std::filesystem::path& dir);
std::vector<CnfInstance> load_sat_dataset(const std::filesystem::path& dir);

void save_tsp_dataset(const std::vector<TspDecisionInstance>& data,
                      const std::filesystem::path& dir);
std::vector<TspDecisionInstance> load_tsp_dataset(const std::filesystem::path& dir);

void save_centrality_dataset(const std::vector<CentralityInstance>& data,
                             const std::filesystem::path& dir);
std::vector<CentralityInstance> load_centrality_dataset(const std::filesystem::path& dir);

void save_kcolor_dataset(const std::vector<ColoringInstance>& data,
                         const std::filesystem::path& dir);
std::vector<ColoringInstance> load_kcolor_dataset(const std::filesystem::path& dir);

}  // namespace tgn
