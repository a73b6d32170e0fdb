#include "tgn/instances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tgn {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

std::string fmt_real(real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
  return buf;
}

}  // namespace

// -- SAT ----------------------------------------------------------------

bool satisfies(const CnfInstance& cnf, const std::vector<bool>& assignment) {
  for (const auto& clause : cnf.clauses) {
    bool ok = false;
    for (int lit : clause) {
      const int var = std::abs(lit);
      if (assignment[static_cast<size_t>(var) - 1] == (lit > 0)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

namespace {

// 0 = unassigned, 1 = true, -1 = false
bool dpll_rec(const std::vector<std::vector<int>>& clauses, std::vector<int>& assign) {
  // Unit propagation to fixpoint.
  std::vector<int> trail;
  for (;;) {
    bool progress = false;
    for (const auto& clause : clauses) {
      int unknown = 0;
      int unit = 0;
      bool satisfied = false;
      for (int lit : clauses.empty() ? std::vector<int>{} : clause) {
        const int var = std::abs(lit);
        const int val = assign[static_cast<size_t>(var) - 1];
        if (val == 0) {
          unknown++;
          unit = lit;
        } else if ((val > 0) == (lit > 0)) {
          satisfied = true;
          break;
        }
      }
      if (satisfied) continue;
      if (unknown == 0) {  // conflict
        for (int var : trail) assign[static_cast<size_t>(var) - 1] = 0;
        return false;
      }
      if (unknown == 1) {
        const int var = std::abs(unit);
        assign[static_cast<size_t>(var) - 1] = unit > 0 ? 1 : -1;
        trail.push_back(var);
        progress = true;
      }
    }
    if (!progress) break;
  }

  // Pick a branching variable from the first unsatisfied clause.
  int branch = 0;
  bool all_satisfied = true;
  for (const auto& clause : clauses) {
    bool satisfied = false;
    int candidate = 0;
    for (int lit : clause) {
      const int val = assign[static_cast<size_t>(std::abs(lit)) - 1];
      if (val == 0 && candidate == 0) candidate = std::abs(lit);
      if (val != 0 && (val > 0) == (lit > 0)) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) {
      all_satisfied = false;
      branch = candidate;
      break;
    }
  }
  if (all_satisfied) return true;

  for (int value : {1, -1}) {
    assign[static_cast<size_t>(branch) - 1] = value;
    if (dpll_rec(clauses, assign)) return true;
  }
  assign[static_cast<size_t>(branch) - 1] = 0;
  for (int var : trail) assign[static_cast<size_t>(var) - 1] = 0;
  return false;
}

void check_cnf(const CnfInstance& cnf) {
  for (const auto& clause : cnf.clauses) {
    require(!clause.empty(), "cnf: empty clause");
    std::set<int> vars;
    for (int lit : clause) {
      const int var = std::abs(lit);
      require(var >= 1 && var <= cnf.num_vars,
              "cnf: variable " + std::to_string(var) + " outside 1.." +
                  std::to_string(cnf.num_vars));
      require(vars.insert(var).second, "cnf: clause uses variable " + std::to_string(var) +
                                           " twice");
    }
  }
}

}  // namespace

DpllResult dpll_solve(const CnfInstance& cnf, int max_vars) {
  require(cnf.num_vars >= 0, "dpll: negative variable count");
  require(cnf.num_vars <= max_vars, "dpll: " + std::to_string(cnf.num_vars) +
                                        " variables exceed the bound of " +
                                        std::to_string(max_vars));
  check_cnf(cnf);
  std::vector<int> assign(static_cast<size_t>(cnf.num_vars), 0);
  DpllResult result;
  result.sat = dpll_rec(cnf.clauses, assign);
  if (result.sat) {
    result.assignment.resize(static_cast<size_t>(cnf.num_vars));
    for (size_t i = 0; i < assign.size(); ++i) result.assignment[i] = assign[i] == 1;
    require(satisfies(cnf, result.assignment), "dpll: witness fails a clause");
  }
  return result;
}

std::pair<CnfInstance, CnfInstance> gen_sat_pair(int num_vars, Rng& rng) {
  require(num_vars >= 2, "gen_sat_pair: need at least 2 variables");
  const int clause_limit = 40 + 10 * num_vars;
  CnfInstance formula;
  formula.num_vars = num_vars;
  while (static_cast<int>(formula.clauses.size()) < clause_limit) {
    const int width = static_cast<int>(
        std::min<index>(rng.uniform_int(2, 4), num_vars));
    std::vector<int> clause;
    std::set<int> used;
    while (static_cast<int>(clause.size()) < width) {
      const int var = static_cast<int>(rng.uniform_int(1, num_vars));
      if (!used.insert(var).second) continue;
      clause.push_back(rng.bernoulli(static_cast<real>(0.5)) ? var : -var);
    }
    formula.clauses.push_back(clause);
    if (!dpll_solve(formula).sat) {
      CnfInstance unsat = formula;
      unsat.label = false;
      CnfInstance sat = formula;
      auto& last = sat.clauses.back();
      last[static_cast<size_t>(rng.uniform_int(0, width - 1))] *= -1;
      sat.label = true;
      require(dpll_solve(sat).sat, "gen_sat_pair: flipped sibling is not satisfiable");
      return {std::move(sat), std::move(unsat)};
    }
  }
  throw Error("gen_sat_pair: retry limit exceeded after " + std::to_string(clause_limit) +
              " clauses");
}

// -- decision TSP ---------------------------------------------------------

std::vector<std::vector<real>> euclidean_weights(const std::vector<std::array<real, 2>>& coords) {
  const index n = static_cast<index>(coords.size());
  std::vector<std::vector<real>> w(static_cast<size_t>(n),
                                   std::vector<real>(static_cast<size_t>(n), 0));
  for (index i = 0; i < n; ++i) {
    for (index j = i + 1; j < n; ++j) {
      const real dx = coords[i][0] - coords[j][0];
      const real dy = coords[i][1] - coords[j][1];
      const real d = std::sqrt(dx * dx + dy * dy);
      w[i][j] = d;
      w[j][i] = d;
    }
  }
  return w;
}

real held_karp(const std::vector<std::vector<real>>& weights, index max_n) {
  const index n = static_cast<index>(weights.size());
  require(n >= 3, "held_karp: need at least 3 vertices");
  require(n <= max_n, "held_karp: " + std::to_string(n) + " vertices exceed the bound of " +
                          std::to_string(max_n));
  for (const auto& row : weights) {
    require(static_cast<index>(row.size()) == n, "held_karp: weight matrix is not square");
  }
  const index full = index{1} << n;
  const real inf = std::numeric_limits<real>::infinity();
  // cost[mask][j]: cheapest path from 0 over exactly the vertices in mask,
  // ending at j. Vertex 0 is always in the mask.
  std::vector<std::vector<real>> cost(static_cast<size_t>(full),
                                      std::vector<real>(static_cast<size_t>(n), inf));
  cost[1][0] = 0;
  for (index mask = 1; mask < full; ++mask) {
    if (!(mask & 1)) continue;
    for (index j = 0; j < n; ++j) {
      const real base = cost[static_cast<size_t>(mask)][static_cast<size_t>(j)];
      if (base == inf || !(mask & (index{1} << j))) continue;
      for (index next = 1; next < n; ++next) {
        if (mask & (index{1} << next)) continue;
        const index next_mask = mask | (index{1} << next);
        real& slot = cost[static_cast<size_t>(next_mask)][static_cast<size_t>(next)];
        const real candidate = base + weights[static_cast<size_t>(j)][static_cast<size_t>(next)];
        if (candidate < slot) slot = candidate;
      }
    }
  }
  real best = inf;
  for (index j = 1; j < n; ++j) {
    const real tour = cost[static_cast<size_t>(full - 1)][static_cast<size_t>(j)] +
                      weights[static_cast<size_t>(j)][0];
    if (tour < best) best = tour;
  }
  return best;
}

std::pair<TspDecisionInstance, TspDecisionInstance> gen_tsp_pair(index n, Rng& rng) {
  TspDecisionInstance base;
  base.coords.resize(static_cast<size_t>(n));
  for (auto& p : base.coords) {
    p[0] = rng.uniform();
    p[1] = rng.uniform();
  }
  base.weights = euclidean_weights(base.coords);
  const real optimal = held_karp(base.weights);
  TspDecisionInstance yes = base;
  yes.target_cost = static_cast<real>(1.02) * optimal;
  yes.label = true;
  TspDecisionInstance no = std::move(base);
  no.target_cost = static_cast<real>(0.98) * optimal;
  no.label = false;
  return {std::move(yes), std::move(no)};
}

// -- centrality -------------------------------------------------------------

namespace {

// Arc list: directed edges as given, undirected edges in both orientations.
std::vector<std::vector<index>> out_arcs(const Graph& g) {
  std::vector<std::vector<index>> out(static_cast<size_t>(g.n));
  for (const auto& [u, v] : g.edges) {
    out[static_cast<size_t>(u)].push_back(v);
    if (!g.directed) out[static_cast<size_t>(v)].push_back(u);
  }
  return out;
}

std::vector<real> degree_centrality(const Graph& g) {
  std::vector<real> deg(static_cast<size_t>(g.n), 0);
  for (const auto& [u, v] : g.edges) {
    deg[static_cast<size_t>(u)] += 1;
    deg[static_cast<size_t>(v)] += 1;
  }
  return deg;
}

std::vector<real> betweenness_centrality(const Graph& g) {
  const auto adj = out_arcs(g);
  const index n = g.n;
  std::vector<real> bc(static_cast<size_t>(n), 0);
  for (index s = 0; s < n; ++s) {
    std::vector<index> order;
    std::vector<std::vector<index>> preds(static_cast<size_t>(n));
    std::vector<real> sigma(static_cast<size_t>(n), 0);
    std::vector<index> dist(static_cast<size_t>(n), -1);
    sigma[static_cast<size_t>(s)] = 1;
    dist[static_cast<size_t>(s)] = 0;
    std::deque<index> queue{s};
    while (!queue.empty()) {
      const index u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (index w : adj[static_cast<size_t>(u)]) {
        if (dist[static_cast<size_t>(w)] < 0) {
          dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(u)] + 1;
          queue.push_back(w);
        }
        if (dist[static_cast<size_t>(w)] == dist[static_cast<size_t>(u)] + 1) {
          sigma[static_cast<size_t>(w)] += sigma[static_cast<size_t>(u)];
          preds[static_cast<size_t>(w)].push_back(u);
        }
      }
    }
    std::vector<real> delta(static_cast<size_t>(n), 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const index w = *it;
      for (index p : preds[static_cast<size_t>(w)]) {
        delta[static_cast<size_t>(p)] += sigma[static_cast<size_t>(p)] /
                                         sigma[static_cast<size_t>(w)] *
                                         (1 + delta[static_cast<size_t>(w)]);
      }
      if (w != s) bc[static_cast<size_t>(w)] += delta[static_cast<size_t>(w)];
    }
  }
  return bc;
}

std::vector<real> closeness_centrality(const Graph& g) {
  // Harmonic form: sum of 1/d over reachable vertices, robust to
  // disconnected graphs.
  const auto adj = out_arcs(g);
  std::vector<real> close(static_cast<size_t>(g.n), 0);
  for (index s = 0; s < g.n; ++s) {
    std::vector<index> dist(static_cast<size_t>(g.n), -1);
    dist[static_cast<size_t>(s)] = 0;
    std::deque<index> queue{s};
    while (!queue.empty()) {
      const index u = queue.front();
      queue.pop_front();
      for (index w : adj[static_cast<size_t>(u)]) {
        if (dist[static_cast<size_t>(w)] < 0) {
          dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(u)] + 1;
          queue.push_back(w);
          close[static_cast<size_t>(s)] += 1 / static_cast<real>(dist[static_cast<size_t>(w)]);
        }
      }
    }
  }
  return close;
}

std::vector<real> eigenvector_centrality(const Graph& g) {
  const index n = g.n;
  std::vector<real> x(static_cast<size_t>(n), 1);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<real> next(static_cast<size_t>(n), 0);
    for (const auto& [u, v] : g.edges) {
      next[static_cast<size_t>(v)] += x[static_cast<size_t>(u)];
      if (!g.directed) next[static_cast<size_t>(u)] += x[static_cast<size_t>(v)];
    }
    real norm = 0;
    for (real value : next) norm += value * value;
    norm = std::sqrt(norm);
    if (norm == 0) return std::vector<real>(static_cast<size_t>(n), 0);
    for (real& value : next) value /= norm;
    x = std::move(next);
  }
  return x;
}

void check_graph(const Graph& g) {
  require(g.n >= 0, "graph: negative vertex count");
  for (const auto& [u, v] : g.edges) {
    require(u >= 0 && u < g.n && v >= 0 && v < g.n,
            "graph: edge (" + std::to_string(u) + "," + std::to_string(v) + ") outside 0.." +
                std::to_string(g.n - 1));
  }
}

}  // namespace

std::map<std::string, std::vector<real>> centralities(const Graph& graph,
                                                      const std::vector<std::string>& measures) {
  check_graph(graph);
  std::map<std::string, std::vector<real>> out;
  for (const std::string& measure : measures) {
    if (measure == "degree") {
      out[measure] = degree_centrality(graph);
    } else if (measure == "betweenness") {
      out[measure] = betweenness_centrality(graph);
    } else if (measure == "closeness") {
      out[measure] = closeness_centrality(graph);
    } else if (measure == "eigenvector") {
      out[measure] = eigenvector_centrality(graph);
    } else {
      throw Error("centralities: unknown measure " + measure);
    }
  }
  return out;
}

CentralityInstance gen_centrality_instance(index n, Rng& rng,
                                           const std::vector<std::string>& measures,
                                           index pairs_per_measure) {
  require(n >= 2, "gen_centrality_instance: need at least 2 vertices");
  for (int attempt = 0; attempt < 64; ++attempt) {
    CentralityInstance inst;
    inst.graph.n = n;
    inst.graph.directed = true;
    const real p = rng.uniform(static_cast<real>(0.15), static_cast<real>(0.35));
    for (index u = 0; u < n; ++u) {
      for (index v = 0; v < n; ++v) {
        if (u != v && rng.bernoulli(p)) inst.graph.edges.emplace_back(u, v);
      }
    }
    inst.values = centralities(inst.graph, measures);
    bool usable = true;
    for (const std::string& measure : measures) {
      const auto& c = inst.values.at(measure);
      std::set<std::pair<index, index>> used;
      index tries = 0;
      index found = 0;
      while (found < pairs_per_measure && tries < 60 * pairs_per_measure) {
        tries++;
        const index u = rng.uniform_int(0, n - 1);
        const index v = rng.uniform_int(0, n - 1);
        if (u == v) continue;
        if (c[static_cast<size_t>(u)] == c[static_cast<size_t>(v)]) continue;  // ties excluded
        if (!used.insert({u, v}).second) continue;
        inst.pairs.push_back(
            {measure, u, v, c[static_cast<size_t>(u)] < c[static_cast<size_t>(v)]});
        found++;
      }
      if (found == 0) usable = false;
    }
    if (usable) return inst;
  }
  throw Error("gen_centrality_instance: could not sample comparison pairs");
}

// -- k-coloring -------------------------------------------------------------

namespace {

bool kcolor_rec(const std::vector<std::vector<index>>& adj, const std::vector<index>& order,
                std::vector<int>& color, int k, size_t pos, int max_used) {
  if (pos == order.size()) return true;
  const index v = order[pos];
  // Colors appear in first-use order, which pins the first vertex to 0.
  const int upper = std::min(k - 1, max_used + 1);
  for (int c = 0; c <= upper; ++c) {
    bool ok = true;
    for (index w : adj[static_cast<size_t>(v)]) {
      if (color[static_cast<size_t>(w)] == c) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    color[static_cast<size_t>(v)] = c;
    if (kcolor_rec(adj, order, color, k, pos + 1, std::max(max_used, c))) return true;
    color[static_cast<size_t>(v)] = -1;
  }
  return false;
}

}  // namespace

bool kcolorable(const Graph& graph, int k, index max_n) {
  require(k >= 1, "kcolorable: k must be >= 1");
  require(graph.n <= max_n, "kcolorable: " + std::to_string(graph.n) +
                                " vertices exceed the bound of " + std::to_string(max_n));
  check_graph(graph);
  if (graph.n == 0) return true;
  std::vector<std::vector<index>> adj(static_cast<size_t>(graph.n));
  for (const auto& [u, v] : graph.edges) {
    if (u == v) return false;  // a self loop conflicts with every coloring
    adj[static_cast<size_t>(u)].push_back(v);
    adj[static_cast<size_t>(v)].push_back(u);
  }
  std::vector<index> order(static_cast<size_t>(graph.n));
  for (index i = 0; i < graph.n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](index a, index b) {
    const size_t da = adj[static_cast<size_t>(a)].size();
    const size_t db = adj[static_cast<size_t>(b)].size();
    return da != db ? da > db : a < b;
  });
  std::vector<int> color(static_cast<size_t>(graph.n), -1);
  return kcolor_rec(adj, order, color, k, 0, -1);
}

std::pair<ColoringInstance, ColoringInstance> gen_kcolor_pair(index n, int k, Rng& rng) {
  require(n > k, "gen_kcolor_pair: need n > k");
  std::vector<std::pair<index, index>> candidates;
  for (index u = 0; u < n; ++u) {
    for (index v = u + 1; v < n; ++v) candidates.emplace_back(u, v);
  }
  rng.shuffle(candidates);
  Graph graph;
  graph.n = n;
  graph.directed = false;
  for (const auto& edge : candidates) {
    graph.edges.push_back(edge);
    if (!kcolorable(graph, k)) {
      ColoringInstance no{graph, k, false};
      ColoringInstance yes{graph, k, true};
      yes.graph.edges.pop_back();
      require(kcolorable(yes.graph, k), "gen_kcolor_pair: YES sibling is not colorable");
      return {std::move(yes), std::move(no)};
    }
  }
  throw Error("gen_kcolor_pair: complete graph stayed colorable");
}

// -- instance files -----------------------------------------------------------

namespace {

/// Line-oriented reader that reports positions in diagnostics.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::optional<std::string> next() {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    line_no_++;
    return line;
  }

  std::string expect(const std::string& what) {
    auto line = next();
    if (!line) throw Error("line " + std::to_string(line_no_ + 1) + ": expected " + what);
    return *line;
  }

  int line_no() const { return line_no_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

void write_dimacs(const CnfInstance& cnf, std::ostream& out) {
  out << "c label " << (cnf.label ? "sat" : "unsat") << "\n";
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << "\n";
  for (const auto& clause : cnf.clauses) {
    for (int lit : clause) out << lit << ' ';
    out << "0\n";
  }
}

CnfInstance read_dimacs(std::istream& in) {
  LineReader reader(in);
  CnfInstance cnf;
  std::optional<bool> label;
  int declared_clauses = -1;
  std::vector<int> current;
  for (auto line = reader.next(); line; line = reader.next()) {
    std::istringstream ls(*line);
    std::string head;
    if (!(ls >> head)) continue;  // blank line
    if (head == "c") {
      std::string key, value;
      if (ls >> key >> value && key == "label") {
        if (value == "sat") label = true;
        else if (value == "unsat") label = false;
        else reader.fail("label must be sat or unsat, got " + value);
      }
      continue;
    }
    if (head == "p") {
      std::string kind;
      if (!(ls >> kind >> cnf.num_vars >> declared_clauses) || kind != "cnf") {
        reader.fail("malformed header, expected \"p cnf <vars> <clauses>\"");
      }
      continue;
    }
    if (declared_clauses < 0) reader.fail("clause before the \"p cnf\" header");
    std::istringstream body(*line);
    int lit;
    while (body >> lit) {
      if (lit == 0) {
        if (current.empty()) reader.fail("empty clause");
        cnf.clauses.push_back(current);
        current.clear();
      } else {
        current.push_back(lit);
      }
    }
  }
  if (!current.empty()) throw Error("dimacs: last clause not terminated by 0");
  if (declared_clauses < 0) throw Error("dimacs: missing \"p cnf\" header");
  if (static_cast<int>(cnf.clauses.size()) != declared_clauses) {
    throw Error("dimacs: header declares " + std::to_string(declared_clauses) +
                " clauses but file has " + std::to_string(cnf.clauses.size()));
  }
  check_cnf(cnf);
  const bool solved = dpll_solve(cnf).sat;
  if (label.has_value() && *label != solved) {
    throw Error("dimacs: stored label disagrees with the solver");
  }
  cnf.label = solved;
  return cnf;
}

void write_tsp(const TspDecisionInstance& inst, std::ostream& out) {
  out << inst.coords.size() << "\n";
  for (const auto& p : inst.coords) out << fmt_real(p[0]) << ' ' << fmt_real(p[1]) << "\n";
  out << fmt_real(inst.target_cost) << "\n";
  out << (inst.label ? 1 : 0) << "\n";
}

TspDecisionInstance read_tsp(std::istream& in) {
  LineReader reader(in);
  TspDecisionInstance inst;
  index n = 0;
  {
    std::istringstream ls(reader.expect("vertex count"));
    if (!(ls >> n) || n < 3) reader.fail("corrupted header: need a vertex count >= 3");
  }
  inst.coords.resize(static_cast<size_t>(n));
  for (index i = 0; i < n; ++i) {
    std::istringstream ls(reader.expect("coordinate line"));
    double x, y;
    if (!(ls >> x >> y)) reader.fail("expected \"x y\"");
    inst.coords[static_cast<size_t>(i)] = {static_cast<real>(x), static_cast<real>(y)};
  }
  {
    std::istringstream ls(reader.expect("target cost"));
    double c;
    if (!(ls >> c)) reader.fail("expected the target cost");
    inst.target_cost = static_cast<real>(c);
  }
  {
    std::istringstream ls(reader.expect("label"));
    int v;
    if (!(ls >> v) || (v != 0 && v != 1)) reader.fail("label must be 0 or 1");
    inst.label = v == 1;
  }
  inst.weights = euclidean_weights(inst.coords);
  const real optimal = held_karp(inst.weights);
  if (inst.label != (optimal <= inst.target_cost)) {
    throw Error("tsp: stored label disagrees with the optimal tour cost");
  }
  return inst;
}

void write_graph(const Graph& graph, std::ostream& out) {
  out << graph.n << ' ' << graph.edges.size() << ' ' << (graph.directed ? 1 : 0) << "\n";
  for (const auto& [u, v] : graph.edges) out << u << ' ' << v << "\n";
}

Graph read_graph(std::istream& in) {
  LineReader reader(in);
  Graph graph;
  index m = 0;
  {
    std::istringstream ls(reader.expect("graph header"));
    int directed;
    if (!(ls >> graph.n >> m >> directed) || (directed != 0 && directed != 1) || graph.n < 0 ||
        m < 0) {
      reader.fail("corrupted header: expected \"n m directed\"");
    }
    graph.directed = directed == 1;
  }
  for (index i = 0; i < m; ++i) {
    std::istringstream ls(reader.expect("edge line"));
    index u, v;
    if (!(ls >> u >> v)) reader.fail("expected \"u v\"");
    graph.edges.emplace_back(u, v);
  }
  check_graph(graph);
  return graph;
}

void write_centrality_values(const CentralityInstance& inst, std::ostream& out) {
  for (const auto& [measure, values] : inst.values) {
    for (index v = 0; v < static_cast<index>(values.size()); ++v) {
      out << v << ' ' << measure << ' ' << fmt_real(values[static_cast<size_t>(v)]) << "\n";
    }
  }
  for (const CentralityPair& pair : inst.pairs) {
    out << "pair " << pair.measure << ' ' << pair.u << ' ' << pair.v << ' '
        << (pair.label ? 1 : 0) << "\n";
  }
}

CentralityInstance read_centrality_values(const Graph& graph, std::istream& in) {
  LineReader reader(in);
  CentralityInstance inst;
  inst.graph = graph;
  for (auto line = reader.next(); line; line = reader.next()) {
    if (line->empty()) continue;
    std::istringstream ls(*line);
    std::string first;
    ls >> first;
    if (first == "pair") {
      CentralityPair pair;
      int label;
      if (!(ls >> pair.measure >> pair.u >> pair.v >> label) || (label != 0 && label != 1)) {
        reader.fail("expected \"pair <measure> <u> <v> <0|1>\"");
      }
      pair.label = label == 1;
      inst.pairs.push_back(std::move(pair));
    } else {
      index v;
      std::string measure;
      double value;
      std::istringstream vs(*line);
      if (!(vs >> v >> measure >> value)) reader.fail("expected \"<vertex> <measure> <value>\"");
      if (v < 0 || v >= graph.n) reader.fail("vertex " + std::to_string(v) + " out of range");
      auto& column = inst.values[measure];
      column.resize(static_cast<size_t>(graph.n), 0);
      column[static_cast<size_t>(v)] = static_cast<real>(value);
    }
  }
  std::vector<std::string> measures;
  for (const auto& [measure, values] : inst.values) measures.push_back(measure);
  const auto recomputed = centralities(graph, measures);
  for (const auto& [measure, values] : inst.values) {
    const auto& expect = recomputed.at(measure);
    for (size_t v = 0; v < values.size(); ++v) {
      if (std::abs(values[v] - expect[v]) > 1e-9) {
        throw Error("centrality: stored " + measure + " of vertex " + std::to_string(v) +
                    " disagrees with the oracle");
      }
    }
  }
  for (const CentralityPair& pair : inst.pairs) {
    const auto it = inst.values.find(pair.measure);
    if (it == inst.values.end()) throw Error("centrality: pair uses unknown measure " + pair.measure);
    const real cu = it->second[static_cast<size_t>(pair.u)];
    const real cv = it->second[static_cast<size_t>(pair.v)];
    if (cu == cv || pair.label != (cu < cv)) {
      throw Error("centrality: stored pair label disagrees with the values");
    }
  }
  return inst;
}

void write_kcolor(const ColoringInstance& inst, std::ostream& out) {
  write_graph(inst.graph, out);
  out << "k " << inst.k << "\n";
  out << "label " << (inst.label ? 1 : 0) << "\n";
}

ColoringInstance read_kcolor(std::istream& in) {
  ColoringInstance inst;
  inst.graph = read_graph(in);
  if (inst.graph.directed) throw Error("kcolor: graph must be undirected");
  LineReader reader(in);
  {
    std::istringstream ls(reader.expect("k line"));
    std::string key;
    if (!(ls >> key >> inst.k) || key != "k" || inst.k < 1) reader.fail("expected \"k <count>\"");
  }
  {
    std::istringstream ls(reader.expect("label line"));
    std::string key;
    int label;
    if (!(ls >> key >> label) || key != "label" || (label != 0 && label != 1)) {
      reader.fail("expected \"label <0|1>\"");
    }
    inst.label = label == 1;
  }
  if (inst.label != kcolorable(inst.graph, inst.k)) {
    throw Error("kcolor: stored label disagrees with the oracle");
  }
  return inst;
}

// -- dataset directories ------------------------------------------------------

namespace {

namespace fs = std::filesystem;

std::string item_name(size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu%s", i, ext);
  return buf;
}

std::vector<fs::path> list_sorted(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error("dataset: " + dir.string() + " is not a directory");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

template <typename T, typename WriteFn>
void save_items(const std::vector<T>& data, const fs::path& dir, const char* ext, WriteFn fn) {
  fs::create_directories(dir);
  for (size_t i = 0; i < data.size(); ++i) {
    const fs::path path = dir / item_name(i, ext);
    std::ofstream out(path);
    if (!out) throw Error("dataset: cannot write " + path.string());
    fn(data[i], out);
  }
}

template <typename T, typename ReadFn>
std::vector<T> load_items(const fs::path& dir, const std::string& ext, ReadFn fn) {
  std::vector<T> data;
  for (const fs::path& path : list_sorted(dir, ext)) {
    std::ifstream in(path);
    if (!in) throw Error("dataset: cannot open " + path.string());
    try {
      data.push_back(fn(in, path));
    } catch (const Error& e) {
      throw Error(path.string() + ": " + e.what());
    }
  }
  return data;
}

}  // namespace

void save_sat_dataset(const std::vector<CnfInstance>& data, const fs::path& dir) {
  save_items(data, dir, ".cnf", [](const CnfInstance& c, std::ostream& o) { write_dimacs(c, o); });
}

std::vector<CnfInstance> load_sat_dataset(const fs::path& dir) {
  return load_items<CnfInstance>(dir, ".cnf",
                                 [](std::istream& in, const fs::path&) { return read_dimacs(in); });
}

void save_tsp_dataset(const std::vector<TspDecisionInstance>& data, const fs::path& dir) {
  save_items(data, dir, ".tsp",
             [](const TspDecisionInstance& t, std::ostream& o) { write_tsp(t, o); });
}

std::vector<TspDecisionInstance> load_tsp_dataset(const fs::path& dir) {
  return load_items<TspDecisionInstance>(
      dir, ".tsp", [](std::istream& in, const fs::path&) { return read_tsp(in); });
}

void save_centrality_dataset(const std::vector<CentralityInstance>& data, const fs::path& dir) {
  fs::create_directories(dir);
  for (size_t i = 0; i < data.size(); ++i) {
    {
      std::ofstream out(dir / item_name(i, ".graph"));
      if (!out) throw Error("dataset: cannot write " + (dir / item_name(i, ".graph")).string());
      write_graph(data[i].graph, out);
    }
    {
      std::ofstream out(dir / item_name(i, ".cent"));
      if (!out) throw Error("dataset: cannot write " + (dir / item_name(i, ".cent")).string());
      write_centrality_values(data[i], out);
    }
  }
}

std::vector<CentralityInstance> load_centrality_dataset(const fs::path& dir) {
  return load_items<CentralityInstance>(
      dir, ".graph", [](std::istream& in, const fs::path& path) {
        const Graph graph = read_graph(in);
        fs::path cent = path;
        cent.replace_extension(".cent");
        std::ifstream cin(cent);
        if (!cin) throw Error("dataset: missing " + cent.string());
        return read_centrality_values(graph, cin);
      });
}

void save_kcolor_dataset(const std::vector<ColoringInstance>& data, const fs::path& dir) {
  save_items(data, dir, ".kcol",
             [](const ColoringInstance& c, std::ostream& o) { write_kcolor(c, o); });
}

std::vector<ColoringInstance> load_kcolor_dataset(const fs::path& dir) {
  return load_items<ColoringInstance>(
      dir, ".kcol", [](std::istream& in, const fs::path&) { return read_kcolor(in); });
}

}  // namespace tgn
