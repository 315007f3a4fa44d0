#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bplab/random.hpp"
#include "bplab/transformer.hpp"

namespace bplab {

enum class NodeType { kVariable, kFactor };

struct RoutingKey {
  NodeType node_type = NodeType::kVariable;
  std::size_t own_index = 0;
  std::size_t nbr_index = 0;

  friend auto operator<=>(const RoutingKey&, const RoutingKey&) = default;
};

/// All 2 n^2 triples, variable keys first, then by own and neighbor index.
std::vector<RoutingKey> enumerate_routing_keys(std::size_t n);

/// 2 n^2. Throws std::invalid_argument for n = 0.
std::size_t routing_key_count(std::size_t n);

/// The key token `token` presents to head `head`: node type, own one-hot
/// position, neighbor-h one-hot position. nullopt when the neighbor block is
/// empty.
std::optional<RoutingKey> routing_key(const TokenMatrix& x, std::size_t token, std::size_t head);

/// True iff, in both heads, every pair of tokens sharing a routing key has
/// attention rows equal within 1e-12. Padded tokens are keyed by
/// (type, own) alone. Throws std::invalid_argument when no pair shares a key.
bool routing_invariance(const TokenMatrix& x, const TransformerWeights& w);

/// Transition table; delta[s][q] is the successor of state q under symbol s.
struct FsmSpec {
  std::size_t n_states = 0;
  std::vector<std::string> symbols;
  std::vector<std::vector<std::size_t>> delta;
};

/// `states N`, then one `sym ID q0' q1' ... q(N-1)'` row per symbol.
FsmSpec parse_fsm(std::string_view text);

/// Distinct maps state -> state among the symbols.
std::size_t fsm_behavior_classes(const FsmSpec& spec);

/// n^n, saturating at UINT64_MAX.
std::uint64_t fsm_class_bound(std::size_t n);

/// Each transition drawn uniformly.
FsmSpec random_fsm(std::size_t n_states, std::size_t n_symbols, Rng& rng);

}  // namespace bplab
