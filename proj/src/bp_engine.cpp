#include "bplab/bp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bplab {

BeliefState BeliefState::fresh(std::size_t num_vars) {
  BeliefState s;
  s.beliefs.assign(num_vars, Probability(0.5));
  s.scratch.assign(num_vars, {Probability(0.5), Probability(0.5)});
  return s;
}

BeliefState BeliefState::from_beliefs(std::vector<Probability> beliefs) {
  BeliefState s = fresh(beliefs.size());
  s.beliefs = std::move(beliefs);
  return s;
}

std::array<Probability, 2> gather(const FactorGraph& g, const BeliefState& s, std::size_t var) {
  const auto nbrs = g.neighbors(var);
  std::array<Probability, 2> slots{Probability(0.5), Probability(0.5)};
  for (std::size_t h = 0; h < 2 && h < nbrs.size(); ++h) slots[h] = s.beliefs[nbrs[h].var];
  return slots;
}

namespace {

void check_sized(const FactorGraph& g, const BeliefState& s) {
  if (s.beliefs.size() != g.num_vars() || s.scratch.size() != g.num_vars()) {
    throw std::invalid_argument("belief state is not sized to the graph");
  }
}

template <typename Update>
BeliefState run_round(const FactorGraph& g, const BeliefState& s, Update update) {
  check_sized(g, s);
  BeliefState next = s;
  for (std::size_t v = 0; v < g.num_vars(); ++v) next.scratch[v] = gather(g, s, v);
  for (std::size_t v = 0; v < g.num_vars(); ++v) {
    next.beliefs[v] = update(v, next.scratch[v][0], next.scratch[v][1]);
  }
  return next;
}

Message normalized(const Message& m) {
  const double total = m[0] + m[1];
  return {m[0] / total, m[1] / total};
}

}  // namespace

BeliefState qbbn_round(const FactorGraph& g, const BeliefState& s) {
  return run_round(g, s, [](std::size_t, Probability m0, Probability m1) {
    return update_belief(m0, m1);
  });
}

BeliefState weighted_round(const FactorGraph& g, const BeliefState& s,
                           std::span<const FfnParams> params) {
  if (params.size() != g.num_vars()) throw std::invalid_argument("params not sized to the graph");
  return run_round(g, s, [&](std::size_t v, Probability m0, Probability m1) {
    return weighted_update(m0, m1, params[v]);
  });
}

MessageSet MessageSet::uniform(const FactorGraph& g) {
  const Message half{0.5, 0.5};
  MessageSet m;
  m.var_to_factor.assign(g.factors().size(), {half, half});
  m.factor_to_var.assign(g.factors().size(), {half, half});
  return m;
}

double sumproduct_sweep(const FactorGraph& g, MessageSet& m, const ConvergenceOptions& opts) {
  const auto factors = g.factors();

  // Variable-to-factor: product of the other incoming factor messages.
  for (std::size_t f = 0; f < factors.size(); ++f) {
    for (int side = 0; side < 2; ++side) {
      const std::size_t v = side == 0 ? factors[f].a : factors[f].b;
      Message out{1.0, 1.0};
      for (const Neighbor& nb : g.neighbors(v)) {
        if (nb.factor == f) continue;
        const int in_side = factors[nb.factor].a == v ? 0 : 1;
        const Message& in = m.factor_to_var[nb.factor][in_side];
        out[0] *= in[0];
        out[1] *= in[1];
      }
      m.var_to_factor[f][side] = opts.normalize ? normalized(out) : out;
    }
  }

  // Factor-to-variable: sum out the partner.
  double change = 0.0;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const FactorTable& t = factors[f].table;
    const Message& from_a = m.var_to_factor[f][0];
    const Message& from_b = m.var_to_factor[f][1];
    std::array<Message, 2> fresh{};
    for (int x = 0; x < 2; ++x) {
      fresh[0][x] = t(x, 0) * from_b[0] + t(x, 1) * from_b[1];
      fresh[1][x] = t(0, x) * from_a[0] + t(1, x) * from_a[1];
    }
    for (int side = 0; side < 2; ++side) {
      Message& slot = m.factor_to_var[f][side];
      const Message before = normalized(slot);
      Message next = opts.normalize ? normalized(fresh[side]) : fresh[side];
      if (opts.damping > 0.0) {
        for (int x = 0; x < 2; ++x) next[x] = (1.0 - opts.damping) * next[x] + opts.damping * slot[x];
        if (opts.normalize) next = normalized(next);
      }
      slot = next;
      const Message after = normalized(slot);
      change = std::max({change, std::abs(after[0] - before[0]), std::abs(after[1] - before[1])});
    }
  }
  return change;
}

std::vector<Probability> sumproduct_marginals(const FactorGraph& g, const MessageSet& m) {
  const auto factors = g.factors();
  std::vector<Probability> marginals;
  marginals.reserve(g.num_vars());
  for (std::size_t v = 0; v < g.num_vars(); ++v) {
    Message belief{1.0, 1.0};
    for (const Neighbor& nb : g.neighbors(v)) {
      const int side = factors[nb.factor].a == v ? 0 : 1;
      const Message in = normalized(m.factor_to_var[nb.factor][side]);
      belief[0] *= in[0];
      belief[1] *= in[1];
    }
    marginals.push_back(Probability::clamped(normalized(belief)[1]));
  }
  return marginals;
}

BpResult sumproduct_run(const FactorGraph& g, const ConvergenceOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) {
    throw std::invalid_argument("damping must lie in [0,1)");
  }
  BpResult result;
  result.messages = MessageSet::uniform(g);
  while (result.iterations < opts.max_iters) {
    const double change = sumproduct_sweep(g, result.messages, opts);
    ++result.iterations;
    if (change < opts.tol) {
      result.converged = true;
      break;
    }
  }
  result.marginals = sumproduct_marginals(g, result.messages);
  return result;
}

std::vector<double> values_of(std::span<const Probability> ps) {
  std::vector<double> out;
  out.reserve(ps.size());
  for (Probability p : ps) out.push_back(p.value());
  return out;
}

}  // namespace bplab
