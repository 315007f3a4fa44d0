#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "bplab/bp_engine.hpp"
#include "bplab/core_math.hpp"
#include "bplab/factor_graph.hpp"

namespace bplab {

/// Residual-stream layout for an n-variable graph. One token per variable.
///
///   0            own belief
///   1..4         table of the factor to neighbor 0, entries (own, nbr) 00 01 10 11
///   5            node type (0 = variable)
///   6            own index / (n - 1)
///   7            neighbor-0 index / (n - 1)
///   [8, 8+n)     own index, one-hot
///   [8+n, 8+2n)  neighbor 0, one-hot (all zero when absent)
///   [8+2n, 8+3n) neighbor 1, one-hot (all zero when absent)
///   8+3n, 8+3n+1 scratch slots written by heads 0 and 1
struct TokenLayout {
  std::size_t n = 0;

  static constexpr std::size_t belief = 0;
  static constexpr std::size_t node_type = 5;
  static constexpr std::size_t own_index = 6;
  static constexpr std::size_t nbr_index = 7;
  static constexpr std::size_t table(std::size_t own, std::size_t nbr) { return 1 + 2 * own + nbr; }

  [[nodiscard]] std::size_t own_block() const { return 8; }
  [[nodiscard]] std::size_t nbr_block(std::size_t head) const { return 8 + (1 + head) * n; }
  [[nodiscard]] std::size_t scratch(std::size_t head) const { return 8 + 3 * n + head; }
  [[nodiscard]] std::size_t d_model() const { return 8 + 3 * n + 2; }
};

/// n_tokens x d_model; row i is token i.
struct TokenMatrix {
  TokenLayout layout;
  Eigen::MatrixXd values;
};

/// D x D with a single 1 at (d, d). Throws std::out_of_range.
Eigen::MatrixXd project_dim(std::size_t d, std::size_t width);

/// D x D with a single 1 at (d, s): moves dimension s into dimension d.
Eigen::MatrixXd cross_project(std::size_t s, std::size_t d, std::size_t width);

enum class AttentionMode { kSoft, kHard };

/// Projections act on token column vectors: q_j = wq x_j. The optional gate
/// scales each query's output by gate . x_j, so a query whose neighbor
/// block is empty writes nothing.
struct HeadWeights {
  Eigen::MatrixXd wq;
  Eigen::MatrixXd wk;
  Eigen::MatrixXd wv;
  std::optional<Eigen::RowVectorXd> gate;
};

struct TransformerWeights {
  std::array<HeadWeights, 2> heads;
  FfnParams ffn;
  double temperature = 64.0;
  AttentionMode mode = AttentionMode::kHard;
};

TokenMatrix encode_bp_state(const FactorGraph& g, const BeliefState& s);

/// Beliefs from dim 0. A scratch slot holding exactly 0 (cleared or never
/// written) decodes as 0.5.
BeliefState decode_tf_state(const TokenMatrix& x);

/// Row-stochastic n x n matrix: row j is the distribution of query j over
/// keys. Hard mode puts all mass on the first maximal score.
Eigen::MatrixXd attention_weights(const TokenMatrix& x, const HeadWeights& h, AttentionMode mode,
                                  double beta);

/// The head's contribution to the residual stream (not yet added).
Eigen::MatrixXd attention_head(const TokenMatrix& x, const HeadWeights& h, AttentionMode mode,
                               double beta);

/// x + attention_head(x, h, ...).
TokenMatrix apply_head(const TokenMatrix& x, const HeadWeights& h, AttentionMode mode, double beta);

/// Per token: belief <- weighted_update(scratch0, scratch1), scratch cleared.
/// An empty (exactly 0) slot counts as 0.5.
TokenMatrix ffn_update(const TokenMatrix& x, const FfnParams& params);

struct ForwardTrace {
  TokenMatrix after_attention;
  TokenMatrix output;
};

ForwardTrace forward_trace(const TokenMatrix& x, const TransformerWeights& w);

/// Both heads read the same residual state; their deltas are summed, then
/// the FFN runs.
TokenMatrix forward_pass(const TokenMatrix& x, const TransformerWeights& w);

/// Head h matches the neighbor-h block of the query against the own block
/// of every key and copies the key's belief into scratch slot h.
TransformerWeights build_bp_weights(std::size_t n);

}  // namespace bplab
