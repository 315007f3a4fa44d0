#include "bplab/binarizer.hpp"

#include <set>
#include <string>
#include <stdexcept>

namespace bplab {

std::size_t ceil_log2(std::size_t k) {
  if (k == 0) throw std::invalid_argument("ceil_log2 of zero");
  std::size_t depth = 0;
  for (std::size_t span = 1; span < k; span *= 2) ++depth;
  return depth;
}

BinarizedPlan balanced_plan(std::size_t k) {
  if (k == 0) throw std::invalid_argument("cannot binarize an empty input list");
  BinarizedPlan plan;
  plan.arity = k;
  std::vector<std::size_t> level_ids(k);
  for (std::size_t i = 0; i < k; ++i) level_ids[i] = i;
  std::size_t next_id = k;
  while (level_ids.size() > 1) {
    ++plan.depth;
    std::vector<std::size_t> next_level;
    for (std::size_t i = 0; i < level_ids.size(); i += 2) {
      if (i + 1 == level_ids.size()) {
        next_level.push_back(level_ids[i]);
        continue;
      }
      plan.steps.push_back({level_ids[i], level_ids[i + 1], next_id, plan.depth});
      next_level.push_back(next_id++);
    }
    level_ids = std::move(next_level);
  }
  plan.result = level_ids.front();
  return plan;
}

BinarizedPlan left_fold_plan(std::size_t k) {
  if (k == 0) throw std::invalid_argument("cannot binarize an empty input list");
  BinarizedPlan plan;
  plan.arity = k;
  std::size_t acc = 0;
  for (std::size_t i = 1; i < k; ++i) {
    const std::size_t out = k + i - 1;
    plan.steps.push_back({acc, i, out, i});
    acc = out;
  }
  plan.depth = k - 1;
  plan.result = acc;
  return plan;
}

bool at_certainty_limit(Probability p) {
  return p.value() == kProbEps || p.value() == 1.0 - kProbEps;
}

Probability limit_conjunction(Probability a, Probability b) {
  if (!at_certainty_limit(a) || !at_certainty_limit(b)) {
    throw DomainError("conjunction is only exact at the certainty limits");
  }
  const bool both = a.value() > 0.5 && b.value() > 0.5;
  return Probability::clamped(both ? 1.0 : 0.0);
}

CombinedResult binarize_or(std::span<const Probability> inputs) {
  BinarizedPlan plan = balanced_plan(inputs.size());
  const Probability combined = evaluate_plan(plan, inputs, update_belief);
  return {std::move(plan), combined};
}

CombinedResult binarize_and(std::span<const Probability> inputs) {
  BinarizedPlan plan = balanced_plan(inputs.size());
  for (Probability p : inputs) {
    if (!at_certainty_limit(p)) throw DomainError("AND inputs must sit at the certainty limits");
  }
  const Probability combined = evaluate_plan(plan, inputs, limit_conjunction);
  return {std::move(plan), combined};
}

std::size_t intermediate_count(std::size_t k) {
  const std::size_t depth = ceil_log2(k);
  std::size_t count = 0;
  std::size_t width = k;
  for (std::size_t level = 1; level < depth; ++level) {
    width = (width + 1) / 2;
    count += width;
  }
  return count;
}

namespace {

void validate(const AnnotatedGraph& annotated) {
  for (std::size_t q = 0; q < annotated.kfactors.size(); ++q) {
    const KaryFactor& kf = annotated.kfactors[q];
    const std::string label = "k-ary factor " + std::to_string(q);
    const std::size_t k = kf.inputs.size();
    if (k == 0) throw std::invalid_argument(label + " has no inputs");
    if (k > kMaxArity) {
      throw std::invalid_argument(label + " has arity " + std::to_string(k) +
                                  ", above the cap of " + std::to_string(kMaxArity));
    }
    if (kf.output >= annotated.num_vars) throw std::invalid_argument(label + ": output out of range");
    std::set<std::size_t> seen;
    for (std::size_t in : kf.inputs) {
      if (in >= annotated.num_vars) throw std::invalid_argument(label + ": input out of range");
      if (in == kf.output) throw std::invalid_argument(label + ": output listed as its own input");
      if (!seen.insert(in).second) throw std::invalid_argument(label + ": repeated input");
    }
  }
}

// Pairwise factors, OR links and AND topology edges over the original
// variables. AND edges carry uniform tables.
FactorGraph direct_graph(const AnnotatedGraph& annotated) {
  std::vector<Factor> factors = annotated.factors;
  for (const KaryFactor& kf : annotated.kfactors) {
    for (std::size_t in : kf.inputs) {
      factors.push_back({kf.output, in, kf.kind == GateKind::kOr ? kf.link : FactorTable::uniform()});
    }
  }
  return FactorGraph::build(annotated.num_vars, std::move(factors));
}

bool conjunctions_hold(std::uint64_t x, std::span<const Gate> gates) {
  for (const Gate& gate : gates) {
    bool all = true;
    for (std::size_t in : gate.inputs) all = all && ((x >> in) & 1U);
    if (static_cast<bool>((x >> gate.output) & 1U) != all) return false;
  }
  return true;
}

}  // namespace

BinarizedGraph binarize_graph(const AnnotatedGraph& annotated) {
  validate(annotated);
  direct_graph(annotated);  // rejects duplicate edges up front

  BinarizedGraph out;
  out.num_original = annotated.num_vars;
  out.original_to_new.resize(annotated.num_vars);
  for (std::size_t v = 0; v < annotated.num_vars; ++v) out.original_to_new[v] = v;

  std::vector<Factor> factors = annotated.factors;
  std::size_t next_var = annotated.num_vars;

  for (std::size_t q = 0; q < annotated.kfactors.size(); ++q) {
    const KaryFactor& kf = annotated.kfactors[q];
    const bool is_or = kf.kind == GateKind::kOr;
    const std::size_t depth = ceil_log2(kf.inputs.size());
    out.depths.push_back(depth);

    auto connect = [&](std::size_t parent, const std::vector<std::size_t>& children,
                       std::size_t level) {
      for (std::size_t child : children) {
        FactorTable table = FactorTable::uniform();
        if (is_or) table = level <= 1 ? kf.link : FactorTable::equality();
        factors.push_back({parent, child, table});
      }
      if (!is_or) out.and_gates.push_back({parent, children});
    };

    if (depth == 0) {
      connect(kf.output, kf.inputs, 1);
      continue;
    }

    std::vector<std::size_t> level_nodes = kf.inputs;
    for (std::size_t level = 1; level <= depth; ++level) {
      std::vector<std::size_t> parents;
      for (std::size_t i = 0; i < level_nodes.size(); i += 2) {
        std::vector<std::size_t> children{level_nodes[i]};
        if (i + 1 < level_nodes.size()) children.push_back(level_nodes[i + 1]);
        std::size_t parent = kf.output;
        if (level < depth) {
          parent = next_var++;
          out.intermediates.push_back({q, level});
        }
        connect(parent, children, level);
        parents.push_back(parent);
      }
      level_nodes = std::move(parents);
    }
  }

  out.graph = FactorGraph::build(next_var, std::move(factors));
  return out;
}

ExactMarginals annotated_marginals(const AnnotatedGraph& annotated) {
  validate(annotated);
  const FactorGraph g = direct_graph(annotated);
  std::vector<Gate> conjunctions;
  for (const KaryFactor& kf : annotated.kfactors) {
    if (kf.kind == GateKind::kAnd) conjunctions.push_back({kf.output, kf.inputs});
  }
  return exact_marginals(g, [&](std::uint64_t x) { return conjunctions_hold(x, conjunctions); });
}

ExactMarginals binarized_marginals(const BinarizedGraph& binarized) {
  return exact_marginals(binarized.graph, [&](std::uint64_t x) {
    return conjunctions_hold(x, binarized.and_gates);
  });
}

AnnotatedGraph parse_annotated_graph(std::string_view input) {
  AnnotatedGraph out;
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
      if (fields[0] != "vars" || fields.size() != 2) {
        throw ParseError(line_no, 1, "expected header 'vars N'");
      }
      out.num_vars = text::parse_count(fields[1], line_no, 2);
      have_header = true;
      continue;
    }
    if (fields[0] == "factor") {
      out.factors.push_back(text::parse_factor_record(fields, line_no, out.factors.size(), out.num_vars));
      continue;
    }
    if (fields[0] != "kfactor") {
      throw ParseError(line_no, 1, "unknown record '" + std::string(fields[0]) + "'");
    }

    KaryFactor kf;
    bool have_kind = false;
    if (fields.size() < 2) throw ParseError(line_no, 2, "kfactor: missing output");
    kf.output = text::parse_count(fields[1], line_no, 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const std::string_view f = fields[i];
      if (f.starts_with("kind=")) {
        const auto kind = f.substr(5);
        if (kind == "or") {
          kf.kind = GateKind::kOr;
        } else if (kind == "and") {
          kf.kind = GateKind::kAnd;
        } else {
          throw ParseError(line_no, i + 1, "kfactor: kind must be 'or' or 'and'");
        }
        have_kind = true;
      } else if (f.starts_with("link=")) {
        std::array<double, 4> entries{};
        std::string_view rest = f.substr(5);
        for (std::size_t k = 0; k < 4; ++k) {
          const auto comma = rest.find(',');
          if ((k < 3) == (comma == std::string_view::npos)) {
            throw ParseError(line_no, i + 1, "kfactor: link needs four comma-separated entries");
          }
          entries[k] = text::parse_real(rest.substr(0, comma), line_no, i + 1);
          rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        try {
          kf.link = FactorTable(entries);
        } catch (const GraphError& e) {
          throw ParseError(line_no, i + 1, std::string("kfactor link: ") + e.what());
        }
      } else {
        kf.inputs.push_back(text::parse_count(f, line_no, i + 1));
      }
    }
    if (!have_kind) throw ParseError(line_no, fields.size() + 1, "kfactor: missing kind=or|and");
    out.kfactors.push_back(std::move(kf));
  }
  if (!have_header) throw ParseError(line_no, 1, "missing 'vars N' header");
  validate(out);
  return out;
}

std::string serialize(const AnnotatedGraph& annotated) {
  std::string out = serialize(FactorGraph::build(annotated.num_vars, annotated.factors));
  for (const KaryFactor& kf : annotated.kfactors) {
    out += "kfactor " + std::to_string(kf.output);
    for (std::size_t in : kf.inputs) out += " " + std::to_string(in);
    out += kf.kind == GateKind::kOr ? " kind=or" : " kind=and";
    if (kf.kind == GateKind::kOr) {
      out += " link=";
      const auto& e = kf.link.entries();
      out += format_real(e[0]) + "," + format_real(e[1]) + "," + format_real(e[2]) + "," +
             format_real(e[3]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace bplab
