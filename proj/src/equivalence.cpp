#include "bplab/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bplab/exact_oracle.hpp"

namespace bplab {

EquivalenceReport check_round(const FactorGraph& g, const BeliefState& s,
                              const TransformerWeights& w, double tol, std::size_t layers) {
  const std::vector<FfnParams> params(g.num_vars(), w.ffn);
  BeliefState bp = s;
  TokenMatrix x = encode_bp_state(g, s);
  for (std::size_t l = 0; l < layers; ++l) {
    bp = w.ffn == FfnParams::exact_bp() ? qbbn_round(g, bp) : weighted_round(g, bp, params);
    x = forward_pass(x, w);
  }
  const BeliefState tf = decode_tf_state(x);

  EquivalenceReport r;
  r.mode = w.mode;
  r.beta = w.temperature;
  r.tol = tol;
  for (std::size_t v = 0; v < g.num_vars(); ++v) {
    const double d = std::abs(tf.beliefs[v].value() - bp.beliefs[v].value());
    r.deviations.push_back(d);
    r.max_abs_deviation = std::max(r.max_abs_deviation, d);
  }
  r.passed = r.max_abs_deviation <= tol;
  return r;
}

TreeExactnessReport check_tree_exactness(const FactorGraph& tree, std::size_t passes) {
  if (!is_tree(tree)) throw std::invalid_argument("tree exactness needs a tree");
  TreeExactnessReport r;
  r.diameter = diameter(tree);
  if (passes < r.diameter) {
    throw std::invalid_argument("need at least diameter (" + std::to_string(r.diameter) +
                                ") passes, got " + std::to_string(passes));
  }
  r.exact = exact_marginals(tree).marginals;

  const ConvergenceOptions opts;
  MessageSet m = MessageSet::uniform(tree);
  for (std::size_t i = 0; i < passes; ++i) sumproduct_sweep(tree, m, opts);
  r.sumproduct = values_of(sumproduct_marginals(tree, m));

  BeliefState s = BeliefState::fresh(tree.num_vars());
  for (std::size_t i = 0; i < passes; ++i) s = qbbn_round(tree, s);
  r.qbbn = values_of(s.beliefs);

  r.sumproduct_deviation = max_abs_error(r.sumproduct, r.exact);
  r.qbbn_deviation = max_abs_error(r.qbbn, r.exact);

  const BpResult run = sumproduct_run(tree, opts);
  r.converged = run.converged;
  r.sweeps_to_converge = run.iterations;
  return r;
}

ImplicitGraph extract_implicit_graph(const TransformerWeights& w, const TokenMatrix& x) {
  const auto& L = x.layout;
  const Eigen::Index n = x.values.rows();
  ImplicitGraph ig;
  for (std::size_t h = 0; h < 2; ++h) {
    const HeadWeights& head = w.heads[h];
    const auto slot = static_cast<Eigen::Index>(L.scratch(h));
    const auto belief = static_cast<Eigen::Index>(TokenLayout::belief);
    Eigen::RowVectorXd reads = head.wv.row(slot);
    const double scale = reads(belief);
    reads(belief) = 0.0;
    if (!reads.isZero(0.0)) {
      throw std::invalid_argument("head " + std::to_string(h) +
                                  " fills its scratch slot from more than the belief dimension");
    }
    ig.attention[h] = attention_weights(x, head, w.mode, w.temperature);
    ig.gain[h] = Eigen::VectorXd::Constant(n, scale);
    if (head.gate) ig.gain[h] = ig.gain[h].cwiseProduct(x.values * head.gate->transpose());
    ig.offset[h] = x.values.col(slot);
  }
  ig.params.assign(static_cast<std::size_t>(n), w.ffn);
  return ig;
}

std::vector<Probability> implicit_round(const ImplicitGraph& ig, std::span<const Probability> beliefs) {
  const std::size_t n = ig.size();
  if (beliefs.size() != n) throw std::invalid_argument("beliefs not sized to the implicit graph");
  std::vector<Probability> next;
  next.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::array<Probability, 2> slots;
    for (std::size_t h = 0; h < 2; ++h) {
      double mixed = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        mixed += ig.attention[h](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
                 beliefs[k].value();
      }
      const auto jj = static_cast<Eigen::Index>(j);
      const double v = ig.offset[h](jj) + ig.gain[h](jj) * mixed;
      slots[h] = v == 0.0 ? Probability(0.5) : Probability(v);
    }
    next.push_back(weighted_update(slots[0], slots[1], ig.params[j]));
  }
  return next;
}

std::vector<std::pair<std::size_t, std::size_t>> implicit_edges(const ImplicitGraph& ig) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const auto n = static_cast<Eigen::Index>(ig.size());
  for (std::size_t h = 0; h < 2; ++h) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (ig.gain[h](j) == 0.0) continue;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (ig.attention[h](j, k) >= 0.5) {
          edges.emplace_back(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
        }
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

double implicit_roundtrip_deviation(const TransformerWeights& w, const TokenMatrix& x) {
  const ImplicitGraph ig = extract_implicit_graph(w, x);
  const BeliefState before = decode_tf_state(x);
  const BeliefState after = decode_tf_state(forward_pass(x, w));
  const std::vector<Probability> predicted = implicit_round(ig, before.beliefs);
  double worst = 0.0;
  for (std::size_t v = 0; v < predicted.size(); ++v) {
    worst = std::max(worst, std::abs(predicted[v].value() - after.beliefs[v].value()));
  }
  return worst;
}

TransformerWeights random_weights(std::size_t n, Rng& rng, double beta) {
  const TokenLayout L{n};
  const auto d = static_cast<Eigen::Index>(L.d_model());
  auto dense = [&] {
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = uniform_real(rng, -1.0, 1.0);
    }
    return m;
  };
  TransformerWeights w;
  for (std::size_t h = 0; h < 2; ++h) {
    w.heads[h].wq = dense();
    w.heads[h].wk = dense();
    w.heads[h].wv = cross_project(TokenLayout::belief, L.scratch(h), L.d_model());
  }
  w.ffn.w0 = uniform_real(rng, 0.5, 1.5);
  w.ffn.w1 = uniform_real(rng, 0.5, 1.5);
  w.ffn.b = uniform_real(rng, -0.5, 0.5);
  w.mode = AttentionMode::kSoft;
  w.temperature = beta;
  return w;
}

std::vector<FfnParams> default_uniqueness_grid() {
  std::vector<FfnParams> grid;
  for (double w0 : {0.9, 1.0, 1.1}) {
    for (double w1 : {0.9, 1.0, 1.1}) {
      for (double b : {-0.1, 0.0, 0.1}) grid.push_back({w0, w1, b});
    }
  }
  return grid;
}

UniquenessReport uniqueness_probe(std::span<const FfnParams> grid, std::size_t samples, Rng& rng) {
  if (std::find(grid.begin(), grid.end(), FfnParams::exact_bp()) == grid.end()) {
    throw std::invalid_argument("probe grid must contain (1, 1, 0)");
  }
  std::vector<std::array<Probability, 2>> pairs;
  pairs.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = uniform_real(rng, 0.001, 0.999);
    const double b = uniform_real(rng, 0.001, 0.999);
    pairs.push_back({Probability(a), Probability(b)});
  }

  UniquenessReport r;
  r.samples = samples;
  for (const FfnParams& p : grid) {
    UniquenessPoint point{p, 0.0};
    for (const auto& [m0, m1] : pairs) {
      const double d = std::abs(weighted_update(m0, m1, p).value() - update_belief(m0, m1).value());
      point.max_deviation = std::max(point.max_deviation, d);
    }
    r.points.push_back(point);
  }
  return r;
}

}  // namespace bplab
