#include "bplab/factor_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

namespace bplab {

ParseError::ParseError(std::size_t line, std::size_t field, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", field " + std::to_string(field) +
                         ": " + what),
      line_(line),
      field_(field) {}

FactorTable::FactorTable(std::array<double, 4> entries) : entries_(entries) {
  bool any_positive = false;
  for (double e : entries_) {
    if (!std::isfinite(e)) throw GraphError(GraphErrorKind::kNonFiniteWeight, "non-finite factor weight");
    if (e < 0.0) {
      throw GraphError(GraphErrorKind::kNegativeWeight,
                       "negative factor weight " + format_real(e));
    }
    any_positive = any_positive || e > 0.0;
  }
  if (!any_positive) throw GraphError(GraphErrorKind::kAllZeroTable, "factor table is all zero");
}

FactorTable FactorTable::transposed() const {
  return FactorTable({entries_[0], entries_[2], entries_[1], entries_[3]});
}

FactorGraph FactorGraph::build(std::size_t num_vars, std::vector<Factor> factors) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const Factor& f = factors[i];
    const std::string label = "factor " + std::to_string(i);
    if (f.a >= num_vars || f.b >= num_vars) {
      throw GraphError(GraphErrorKind::kIndexOutOfRange,
                       label + " references a variable outside [0, " + std::to_string(num_vars) + ")");
    }
    if (f.a == f.b) {
      throw GraphError(GraphErrorKind::kSelfLoop,
                       label + " is a self-loop on variable " + std::to_string(f.a));
    }
    if (!seen.emplace(std::min(f.a, f.b), std::max(f.a, f.b)).second) {
      throw GraphError(GraphErrorKind::kDuplicateEdge,
                       label + " duplicates edge {" + std::to_string(f.a) + "," + std::to_string(f.b) + "}");
    }
  }

  FactorGraph g;
  g.num_vars_ = num_vars;
  g.factors_ = std::move(factors);
  g.adjacency_.resize(num_vars);
  for (std::size_t i = 0; i < g.factors_.size(); ++i) {
    const Factor& f = g.factors_[i];
    g.adjacency_[f.a].push_back({f.b, i});
    g.adjacency_[f.b].push_back({f.a, i});
  }
  for (auto& nbrs : g.adjacency_) {
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.var < y.var; });
  }
  return g;
}

std::string_view structure_name(Structure s) {
  switch (s) {
    case Structure::kTriangle: return "Triangle";
    case Structure::kSquare: return "Square";
    case Structure::kDating: return "Dating graph";
    case Structure::kTwoLoops: return "Two loops";
    case Structure::kQbbnChain: return "QBBN chain";
    case Structure::kChain2: return "Chain2";
    case Structure::kRandomTree: return "Random tree";
  }
  return "unknown";
}

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

FactorTable random_table(Rng& rng, double low, double high) {
  std::array<double, 4> entries{};
  for (double& e : entries) e = uniform_real(rng, low, high);
  return FactorTable(entries);
}

FactorGraph from_edges(std::size_t n, const std::vector<Edge>& edges, Rng& rng, double low,
                       double high) {
  std::vector<Factor> factors;
  factors.reserve(edges.size());
  for (const auto& [a, b] : edges) factors.push_back({a, b, random_table(rng, low, high)});
  return FactorGraph::build(n, std::move(factors));
}

std::vector<Edge> random_tree_edges(std::size_t n, Rng& rng) {
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(label[i - 1], label[uniform_index(rng, i)]);

  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t parent = uniform_index(rng, i);
    edges.emplace_back(label[parent], label[i]);
  }
  return edges;
}

}  // namespace

FactorGraph generate(StructureKind kind, Rng& rng, double low, double high) {
  switch (kind.structure) {
    case Structure::kTriangle:
      return from_edges(3, {{0, 1}, {1, 2}, {2, 0}}, rng, low, high);
    case Structure::kSquare:
      return from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, rng, low, high);
    case Structure::kDating:
      return from_edges(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}}, rng, low, high);
    case Structure::kTwoLoops:
      return from_edges(4, {{0, 1}, {1, 2}, {2, 0}, {1, 3}, {2, 3}}, rng, low, high);
    case Structure::kQbbnChain:
      return from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}}, rng, low, high);
    case Structure::kChain2:
      return from_edges(2, {{0, 1}}, rng, low, high);
    case Structure::kRandomTree:
      return generate_random_tree(kind.tree_vars, rng, low, high);
  }
  throw std::invalid_argument("unknown structure");
}

FactorGraph generate_random_tree(std::size_t n, Rng& rng, double low, double high) {
  if (n == 0) throw std::invalid_argument("a tree needs at least one variable");
  return from_edges(n, random_tree_edges(n, rng), rng, low, high);
}

FactorGraph generate_random_graph(std::size_t n, std::size_t extra_edges, Rng& rng, double low,
                                  double high) {
  if (n == 0) throw std::invalid_argument("a graph needs at least one variable");
  std::vector<Edge> edges = random_tree_edges(n, rng);
  std::set<Edge> present;
  for (const auto& [a, b] : edges) present.emplace(std::min(a, b), std::max(a, b));

  const std::size_t max_edges = n * (n - 1) / 2;
  for (std::size_t added = 0; added < extra_edges && present.size() < max_edges;) {
    const std::size_t a = uniform_index(rng, n);
    const std::size_t b = uniform_index(rng, n);
    if (a == b || !present.emplace(std::min(a, b), std::max(a, b)).second) continue;
    edges.emplace_back(a, b);
    ++added;
  }
  return from_edges(n, edges, rng, low, high);
}

namespace {

// BFS hop counts from `source`; unreachable variables stay at npos.
std::vector<std::size_t> hops_from(const FactorGraph& g, std::size_t source) {
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(g.num_vars(), npos);
  std::queue<std::size_t> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (const Neighbor& nb : g.neighbors(v)) {
      if (dist[nb.var] == npos) {
        dist[nb.var] = dist[v] + 1;
        frontier.push(nb.var);
      }
    }
  }
  return dist;
}

std::size_t component_count(const FactorGraph& g) {
  std::vector<bool> seen(g.num_vars(), false);
  std::size_t components = 0;
  for (std::size_t v = 0; v < g.num_vars(); ++v) {
    if (seen[v]) continue;
    ++components;
    const auto dist = hops_from(g, v);
    for (std::size_t u = 0; u < g.num_vars(); ++u) {
      if (dist[u] != static_cast<std::size_t>(-1)) seen[u] = true;
    }
  }
  return components;
}

}  // namespace

bool is_connected(const FactorGraph& g) { return component_count(g) <= 1; }

bool is_tree(const FactorGraph& g) {
  return g.num_vars() > 0 && is_connected(g) && g.factors().size() == g.num_vars() - 1;
}

std::size_t diameter(const FactorGraph& g) {
  std::size_t best = 0;
  for (std::size_t v = 0; v < g.num_vars(); ++v) {
    for (std::size_t d : hops_from(g, v)) {
      if (d == static_cast<std::size_t>(-1)) {
        throw GraphError(GraphErrorKind::kDisconnected, "diameter of a disconnected graph");
      }
      best = std::max(best, d);
    }
  }
  return best;
}

std::size_t loop_count(const FactorGraph& g) {
  return g.factors().size() + component_count(g) - g.num_vars();
}

std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format real");
  return std::string(buf.data(), end);
}

std::string serialize(const FactorGraph& g) {
  std::string out = "vars " + std::to_string(g.num_vars()) + "\n";
  for (const Factor& f : g.factors()) {
    out += "factor " + std::to_string(f.a) + " " + std::to_string(f.b);
    for (double e : f.table.entries()) out += " " + format_real(e);
    out += "\n";
  }
  return out;
}

namespace text {

std::string_view strip_comment(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  return line;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::size_t parse_count(std::string_view token, std::size_t line, std::size_t field) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, field, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

double parse_real(std::string_view token, std::size_t line, std::size_t field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, field, "expected a real number, got '" + std::string(token) + "'");
  }
  return value;
}

Factor parse_factor_record(std::span<const std::string_view> fields, std::size_t line,
                           std::size_t index, std::size_t num_vars) {
  const std::string label = "factor " + std::to_string(index);
  if (fields.size() < 3) throw ParseError(line, fields.size() + 1, label + ": missing variable index");
  const std::size_t a = parse_count(fields[1], line, 2);
  const std::size_t b = parse_count(fields[2], line, 3);
  if (fields.size() < 7) {
    throw ParseError(line, fields.size() + 1,
                     label + ": missing table entry (expected 4, got " +
                         std::to_string(fields.size() - 3) + ")");
  }
  if (fields.size() > 7) throw ParseError(line, 8, label + ": trailing fields");
  if (a >= num_vars || b >= num_vars) {
    throw ParseError(line, a >= num_vars ? 2 : 3, label + ": variable index out of range");
  }
  if (a == b) throw ParseError(line, 3, label + ": self-loop");

  std::array<double, 4> entries{};
  for (std::size_t k = 0; k < 4; ++k) {
    entries[k] = parse_real(fields[3 + k], line, 4 + k);
    if (entries[k] < 0.0) throw ParseError(line, 4 + k, label + ": negative weight");
    if (!std::isfinite(entries[k])) throw ParseError(line, 4 + k, label + ": non-finite weight");
  }
  try {
    return {a, b, FactorTable(entries)};
  } catch (const GraphError& e) {
    throw ParseError(line, 4, label + ": " + e.what());
  }
}

}  // namespace text

FactorGraph parse_graph(std::string_view input) {
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t num_vars = 0;
  std::vector<Factor> factors;
  std::set<std::pair<std::size_t, std::size_t>> seen;

  while (!input.empty()) {
    const auto nl = input.find('\n');
    const std::string_view raw = input.substr(0, nl);
    input = nl == std::string_view::npos ? std::string_view{} : input.substr(nl + 1);
    ++line_no;

    const auto fields = text::split_fields(text::strip_comment(raw));
    if (fields.empty()) continue;

    if (!have_header) {
      if (fields[0] != "vars" || fields.size() != 2) {
        throw ParseError(line_no, 1, "expected header 'vars N'");
      }
      num_vars = text::parse_count(fields[1], line_no, 2);
      have_header = true;
      continue;
    }
    if (fields[0] != "factor") {
      throw ParseError(line_no, 1, "unknown record '" + std::string(fields[0]) + "'");
    }

    const Factor f = text::parse_factor_record(fields, line_no, factors.size(), num_vars);
    if (!seen.emplace(std::min(f.a, f.b), std::max(f.a, f.b)).second) {
      throw ParseError(line_no, 2, "factor " + std::to_string(factors.size()) + ": duplicate edge");
    }
    factors.push_back(f);
  }
  if (!have_header) throw ParseError(line_no, 1, "missing 'vars N' header");
  return FactorGraph::build(num_vars, std::move(factors));
}

}  // namespace bplab
