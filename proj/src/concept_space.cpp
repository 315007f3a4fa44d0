#include "bplab/concept_space.hpp"

#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "bplab/factor_graph.hpp"

namespace bplab {

std::vector<RoutingKey> enumerate_routing_keys(std::size_t n) {
  std::vector<RoutingKey> keys;
  keys.reserve(2 * n * n);
  for (NodeType t : {NodeType::kVariable, NodeType::kFactor}) {
    for (std::size_t own = 0; own < n; ++own) {
      for (std::size_t nbr = 0; nbr < n; ++nbr) keys.push_back({t, own, nbr});
    }
  }
  return keys;
}

std::size_t routing_key_count(std::size_t n) {
  if (n == 0) throw std::invalid_argument("routing keys need n >= 1");
  return 2 * n * n;
}

namespace {

std::optional<std::size_t> hot_position(const TokenMatrix& x, std::size_t token, std::size_t start) {
  const auto row = static_cast<Eigen::Index>(token);
  for (std::size_t i = 0; i < x.layout.n; ++i) {
    if (x.values(row, static_cast<Eigen::Index>(start + i)) != 0.0) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<RoutingKey> routing_key(const TokenMatrix& x, std::size_t token, std::size_t head) {
  const auto own = hot_position(x, token, x.layout.own_block());
  const auto nbr = hot_position(x, token, x.layout.nbr_block(head));
  if (!own) throw std::invalid_argument("token " + std::to_string(token) + " has no own index");
  if (!nbr) return std::nullopt;
  const double type = x.values(static_cast<Eigen::Index>(token), TokenLayout::node_type);
  return RoutingKey{type == 0.0 ? NodeType::kVariable : NodeType::kFactor, *own, *nbr};
}

bool routing_invariance(const TokenMatrix& x, const TransformerWeights& w) {
  constexpr double kTol = 1e-12;
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  const auto n = static_cast<std::size_t>(x.values.rows());
  bool any_pair = false;
  bool invariant = true;

  for (std::size_t h = 0; h < 2; ++h) {
    const Eigen::MatrixXd rows = attention_weights(x, w.heads[h], w.mode, w.temperature);
    std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> first_with_key;
    for (std::size_t t = 0; t < n; ++t) {
      const auto key = routing_key(x, t, h);
      std::tuple<int, std::size_t, std::size_t> k;
      if (key) {
        k = {static_cast<int>(key->node_type), key->own_index, key->nbr_index};
      } else {
        const double type = x.values(static_cast<Eigen::Index>(t), TokenLayout::node_type);
        k = {type == 0.0 ? 0 : 1, *hot_position(x, t, x.layout.own_block()), kNone};
      }
      const auto [it, inserted] = first_with_key.emplace(k, t);
      if (inserted) continue;
      any_pair = true;
      const double gap = (rows.row(static_cast<Eigen::Index>(t)) -
                          rows.row(static_cast<Eigen::Index>(it->second)))
                             .cwiseAbs()
                             .maxCoeff();
      if (gap > kTol) invariant = false;
    }
  }
  if (!any_pair) throw std::invalid_argument("no two tokens share a routing key");
  return invariant;
}

FsmSpec parse_fsm(std::string_view input) {
  FsmSpec spec;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!input.empty()) {
    const auto nl = input.find('\n');
    const std::string_view raw = input.substr(0, nl);
    input = nl == std::string_view::npos ? std::string_view{} : input.substr(nl + 1);
    ++line_no;

    const auto fields = text::split_fields(text::strip_comment(raw));
    if (fields.empty()) continue;
    if (!have_header) {
      if (fields[0] != "states" || fields.size() != 2) {
        throw ParseError(line_no, 1, "expected header 'states N'");
      }
      spec.n_states = text::parse_count(fields[1], line_no, 2);
      if (spec.n_states == 0) throw ParseError(line_no, 2, "need at least one state");
      have_header = true;
      continue;
    }
    if (fields[0] != "sym") throw ParseError(line_no, 1, "expected 'sym ID q0' ...'");
    if (fields.size() != spec.n_states + 2) {
      throw ParseError(line_no, fields.size() + 1,
                       "sym row needs an id and " + std::to_string(spec.n_states) + " successors");
    }
    if (!seen.emplace(fields[1]).second) {
      throw ParseError(line_no, 2, "symbol '" + std::string(fields[1]) + "' declared twice");
    }
    std::vector<std::size_t> row;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const std::size_t q = text::parse_count(fields[i], line_no, i + 1);
      if (q >= spec.n_states) throw ParseError(line_no, i + 1, "successor state out of range");
      row.push_back(q);
    }
    spec.symbols.emplace_back(fields[1]);
    spec.delta.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(line_no, 1, "missing 'states N' header");
  return spec;
}

std::size_t fsm_behavior_classes(const FsmSpec& spec) {
  if (spec.n_states == 0) throw std::invalid_argument("an automaton needs at least one state");
  std::set<std::vector<std::size_t>> behaviors;
  for (const auto& row : spec.delta) {
    if (row.size() != spec.n_states) throw std::invalid_argument("transition row has the wrong length");
    behaviors.insert(row);
  }
  return behaviors.size();
}

std::uint64_t fsm_class_bound(std::size_t n) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t bound = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (bound > kMax / n) return kMax;
    bound *= n;
  }
  return bound;
}

FsmSpec random_fsm(std::size_t n_states, std::size_t n_symbols, Rng& rng) {
  if (n_states == 0) throw std::invalid_argument("an automaton needs at least one state");
  FsmSpec spec;
  spec.n_states = n_states;
  for (std::size_t s = 0; s < n_symbols; ++s) {
    spec.symbols.push_back("s" + std::to_string(s));
    std::vector<std::size_t> row(n_states);
    for (auto& q : row) q = uniform_index(rng, n_states);
    spec.delta.push_back(std::move(row));
  }
  return spec;
}

}  // namespace bplab
