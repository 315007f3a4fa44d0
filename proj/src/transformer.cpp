#include "bplab/transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bplab {

namespace {

void check_dim(std::size_t d, std::size_t width) {
  if (d >= width) {
    throw std::out_of_range("dimension " + std::to_string(d) + " outside model width " +
                            std::to_string(width));
  }
}

void check_shapes(const TokenMatrix& x, const HeadWeights& h) {
  const auto d = static_cast<Eigen::Index>(x.layout.d_model());
  if (x.values.cols() != d) throw std::invalid_argument("token width does not match its layout");
  for (const Eigen::MatrixXd* m : {&h.wq, &h.wk, &h.wv}) {
    if (m->rows() != d || m->cols() != d) {
      throw std::invalid_argument("head weights do not match the model width");
    }
  }
  if (h.gate && h.gate->size() != d) throw std::invalid_argument("gate does not match the model width");
}

Probability slot_value(double v) { return v == 0.0 ? Probability(0.5) : Probability(v); }

}  // namespace

Eigen::MatrixXd project_dim(std::size_t d, std::size_t width) { return cross_project(d, d, width); }

Eigen::MatrixXd cross_project(std::size_t s, std::size_t d, std::size_t width) {
  check_dim(s, width);
  check_dim(d, width);
  const auto w = static_cast<Eigen::Index>(width);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w, w);
  m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s)) = 1.0;
  return m;
}

TokenMatrix encode_bp_state(const FactorGraph& g, const BeliefState& s) {
  const std::size_t n = g.num_vars();
  if (s.size() != n) throw std::invalid_argument("belief state is not sized to the graph");
  TokenMatrix x{TokenLayout{n}, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(TokenLayout{n}.d_model()))};
  const TokenLayout& L = x.layout;
  const double scale = n > 1 ? 1.0 / static_cast<double>(n - 1) : 0.0;

  for (std::size_t v = 0; v < n; ++v) {
    auto row = x.values.row(static_cast<Eigen::Index>(v));
    row(L.belief) = s.beliefs[v].value();
    row(L.node_type) = 0.0;
    row(L.own_index) = static_cast<double>(v) * scale;
    row(static_cast<Eigen::Index>(L.own_block() + v)) = 1.0;

    const auto nbrs = g.neighbors(v);
    FactorTable table;
    if (!nbrs.empty()) {
      const Factor& f = g.factors()[nbrs[0].factor];
      table = f.a == v ? f.table : f.table.transposed();
      row(L.nbr_index) = static_cast<double>(nbrs[0].var) * scale;
    }
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        row(static_cast<Eigen::Index>(TokenLayout::table(i, j))) =
            table(static_cast<int>(i), static_cast<int>(j));
      }
    }
    for (std::size_t h = 0; h < 2 && h < nbrs.size(); ++h) {
      row(static_cast<Eigen::Index>(L.nbr_block(h) + nbrs[h].var)) = 1.0;
    }
  }
  return x;
}

BeliefState decode_tf_state(const TokenMatrix& x) {
  const auto& L = x.layout;
  BeliefState s = BeliefState::fresh(static_cast<std::size_t>(x.values.rows()));
  for (std::size_t v = 0; v < s.size(); ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    s.beliefs[v] = Probability(x.values(i, L.belief));
    for (std::size_t h = 0; h < 2; ++h) {
      s.scratch[v][h] = slot_value(x.values(i, static_cast<Eigen::Index>(L.scratch(h))));
    }
  }
  return s;
}

Eigen::MatrixXd attention_weights(const TokenMatrix& x, const HeadWeights& h, AttentionMode mode,
                                  double beta) {
  check_shapes(x, h);
  if (!(beta > 0.0)) throw std::invalid_argument("temperature must be positive");
  const Eigen::MatrixXd q = x.values * h.wq.transpose();
  const Eigen::MatrixXd k = x.values * h.wk.transpose();
  const Eigen::MatrixXd scores = q * k.transpose();

  const Eigen::Index n = scores.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < n; ++c) {
      if (scores(j, c) > scores(j, best)) best = c;
    }
    if (mode == AttentionMode::kHard) {
      a(j, best) = 1.0;
      continue;
    }
    // Shifted by the row max so exp never overflows.
    double total = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      a(j, c) = std::exp(beta * (scores(j, c) - scores(j, best)));
      total += a(j, c);
    }
    a.row(j) /= total;
  }
  return a;
}

Eigen::MatrixXd attention_head(const TokenMatrix& x, const HeadWeights& h, AttentionMode mode,
                               double beta) {
  const Eigen::MatrixXd a = attention_weights(x, h, mode, beta);
  const Eigen::MatrixXd v = x.values * h.wv.transpose();
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    if (mode == AttentionMode::kHard) {
      Eigen::Index src = 0;
      a.row(j).maxCoeff(&src);
      out.row(j) = v.row(src);
    } else {
      out.row(j) = a.row(j) * v;
    }
    if (h.gate) out.row(j) *= h.gate->dot(x.values.row(j));
  }
  return out;
}

TokenMatrix apply_head(const TokenMatrix& x, const HeadWeights& h, AttentionMode mode, double beta) {
  TokenMatrix out = x;
  out.values += attention_head(x, h, mode, beta);
  return out;
}

TokenMatrix ffn_update(const TokenMatrix& x, const FfnParams& params) {
  TokenMatrix out = x;
  const auto& L = x.layout;
  const auto s0 = static_cast<Eigen::Index>(L.scratch(0));
  const auto s1 = static_cast<Eigen::Index>(L.scratch(1));
  for (Eigen::Index v = 0; v < out.values.rows(); ++v) {
    const Probability m0 = slot_value(out.values(v, s0));
    const Probability m1 = slot_value(out.values(v, s1));
    out.values(v, L.belief) = weighted_update(m0, m1, params).value();
    out.values(v, s0) = 0.0;
    out.values(v, s1) = 0.0;
  }
  return out;
}

ForwardTrace forward_trace(const TokenMatrix& x, const TransformerWeights& w) {
  TokenMatrix mid = x;
  for (const HeadWeights& h : w.heads) mid.values += attention_head(x, h, w.mode, w.temperature);
  TokenMatrix out = ffn_update(mid, w.ffn);
  return {std::move(mid), std::move(out)};
}

TokenMatrix forward_pass(const TokenMatrix& x, const TransformerWeights& w) {
  return forward_trace(x, w).output;
}

TransformerWeights build_bp_weights(std::size_t n) {
  if (n == 0) throw std::invalid_argument("need at least one variable");
  const TokenLayout L{n};
  const std::size_t d = L.d_model();
  const auto dd = static_cast<Eigen::Index>(d);

  TransformerWeights w;
  w.ffn = FfnParams::exact_bp();
  w.mode = AttentionMode::kHard;
  for (std::size_t h = 0; h < 2; ++h) {
    HeadWeights& head = w.heads[h];
    head.wq = Eigen::MatrixXd::Zero(dd, dd);
    head.wk = Eigen::MatrixXd::Zero(dd, dd);
    Eigen::RowVectorXd gate = Eigen::RowVectorXd::Zero(dd);
    for (std::size_t i = 0; i < n; ++i) {
      head.wq += cross_project(L.nbr_block(h) + i, L.own_block() + i, d);
      head.wk += project_dim(L.own_block() + i, d);
      gate(static_cast<Eigen::Index>(L.nbr_block(h) + i)) = 1.0;
    }
    head.wv = cross_project(L.belief, L.scratch(h), d);
    head.gate = std::move(gate);
  }
  return w;
}

}  // namespace bplab
