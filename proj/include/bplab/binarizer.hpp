#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bplab/core_math.hpp"
#include "bplab/exact_oracle.hpp"
#include "bplab/factor_graph.hpp"

namespace bplab {

enum class GateKind { kAnd, kOr };

/// Largest k-ary factor binarize_graph accepts.
inline constexpr std::size_t kMaxArity = 8;

/// ceil(log2 k) for k >= 1.
std::size_t ceil_log2(std::size_t k);

/// Operand ids 0..k-1 are the inputs; each step's output gets the next id.
struct CombineStep {
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t output = 0;
  std::size_t level = 0;  // 1-based
};

struct BinarizedPlan {
  std::size_t arity = 0;
  std::vector<CombineStep> steps;  // arity - 1 of them
  std::size_t depth = 0;
  std::size_t result = 0;  // operand id holding the combined value
};

/// Level-by-level pairing; an odd operand out is carried to the next level.
/// depth = ceil(log2 k).
BinarizedPlan balanced_plan(std::size_t k);

/// ((x0 . x1) . x2) ... ; depth k - 1.
BinarizedPlan left_fold_plan(std::size_t k);

template <typename Op>
Probability evaluate_plan(const BinarizedPlan& plan, std::span<const Probability> inputs, Op op) {
  std::vector<Probability> operands(inputs.begin(), inputs.end());
  operands.resize(plan.arity + plan.steps.size());
  for (const CombineStep& s : plan.steps) operands[s.output] = op(operands[s.left], operands[s.right]);
  return operands[plan.result];
}

struct CombinedResult {
  BinarizedPlan plan;
  Probability combined;
};

/// Balanced chain of update_belief; equals sigmoid(sum logit(m_i)).
CombinedResult binarize_or(std::span<const Probability> inputs);

/// Balanced chain of limit-case conjunctions. Inputs must sit at the
/// certainty limits kProbEps / 1 - kProbEps.
CombinedResult binarize_and(std::span<const Probability> inputs);

/// Conjunction on {kProbEps, 1 - kProbEps}. Throws DomainError for soft inputs.
Probability limit_conjunction(Probability a, Probability b);

[[nodiscard]] bool at_certainty_limit(Probability p);

/// A k-ary node `output <- kind(inputs)`.
///
/// OR: output is linked to each input by the pairwise `link` table (oriented
/// [output][input]); the inputs' evidence combines at output by log-odds
/// addition. AND: output is the hard conjunction of the inputs.
struct KaryFactor {
  GateKind kind = GateKind::kOr;
  std::size_t output = 0;
  std::vector<std::size_t> inputs;
  FactorTable link = FactorTable::equality();
};

struct AnnotatedGraph {
  std::size_t num_vars = 0;
  std::vector<Factor> factors;
  std::vector<KaryFactor> kfactors;
};

/// Conjunction constraint `output == AND(inputs)` with at most two inputs.
struct Gate {
  std::size_t output = 0;
  std::vector<std::size_t> inputs;
};

struct IntermediateOrigin {
  std::size_t kfactor = 0;
  std::size_t level = 0;
};

/// Pairwise rewrite of an annotated graph. Original variables keep their
/// indices; intermediates are appended after them.
///
/// OR intermediates are copies of the output tied by equality factors, with
/// the link tables moved to the lowest level. AND intermediates hold partial
/// conjunctions; their edges carry uniform tables and the semantics live in
/// `and_gates`. For k >= 2 every input sits exactly depth = ceil(log2 k) hops
/// below the output: an unpaired operand is forwarded through a single-child
/// node. A unary node is a single edge.
struct BinarizedGraph {
  FactorGraph graph;
  std::vector<Gate> and_gates;
  std::vector<std::size_t> original_to_new;
  std::vector<IntermediateOrigin> intermediates;  // entry i describes variable num_original + i
  std::vector<std::size_t> depths;                // per k-ary factor
  std::size_t num_original = 0;
};

/// Throws std::invalid_argument for arity 0 or above kMaxArity, repeated or
/// self-referencing inputs; GraphError for duplicate edges.
BinarizedGraph binarize_graph(const AnnotatedGraph& annotated);

/// The unbinarized model: pairwise factors plus OR link factors, with AND
/// nodes as k-ary hard constraints.
ExactMarginals annotated_marginals(const AnnotatedGraph& annotated);

/// Exact marginals of the binarized model (all variables, originals first).
ExactMarginals binarized_marginals(const BinarizedGraph& binarized);

/// Number of intermediates a k-ary node introduces.
std::size_t intermediate_count(std::size_t k);

/// Text format: the graph format plus
/// `kfactor OUT IN1 ... INk kind=or|and [link=f00,f01,f10,f11]`.
AnnotatedGraph parse_annotated_graph(std::string_view text);
std::string serialize(const AnnotatedGraph& annotated);

}  // namespace bplab
