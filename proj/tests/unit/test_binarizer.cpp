#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bplab/binarizer.hpp"

using namespace bplab;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(BPLAB_TESTDATA) + "/" + name);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Probability kLo = Probability::clamped(0.0);
const Probability kHi = Probability::clamped(1.0);

}  // namespace

TEST_SUITE("binarizer") {
  TEST_CASE("ceil_log2") {
    CHECK(ceil_log2(1) == 0);
    CHECK(ceil_log2(2) == 1);
    CHECK(ceil_log2(3) == 2);
    CHECK(ceil_log2(4) == 2);
    CHECK(ceil_log2(5) == 3);
    CHECK(ceil_log2(8) == 3);
    CHECK_THROWS_AS(ceil_log2(0), std::invalid_argument);
  }

  TEST_CASE("plans") {
    for (std::size_t k = 1; k <= 8; ++k) {
      const BinarizedPlan b = balanced_plan(k);
      CHECK(b.steps.size() == k - 1);
      CHECK(b.depth == ceil_log2(k));
      const BinarizedPlan f = left_fold_plan(k);
      CHECK(f.steps.size() == k - 1);
      CHECK(f.depth == k - 1);
    }
    const BinarizedPlan p3 = balanced_plan(3);
    CHECK(p3.steps[0].left == 0);
    CHECK(p3.steps[0].right == 1);
    CHECK(p3.steps[1].left == 3);
    CHECK(p3.steps[1].right == 2);
    CHECK(p3.result == 4);
    CHECK(balanced_plan(1).result == 0);
  }

  TEST_CASE("OR of three") {
    const std::vector<Probability> in{Probability(0.8), Probability(0.6), Probability(0.7)};
    const CombinedResult r = binarize_or(in);
    CHECK(r.combined.value() == doctest::Approx(14.0 / 15.0).epsilon(1e-14));
    CHECK(r.plan.depth == 2);
  }

  TEST_CASE("OR is order and shape independent") {
    Rng rng(31);
    for (std::size_t k = 1; k <= 8; ++k) {
      std::vector<Probability> in;
      double logit_sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        in.emplace_back(uniform_real(rng, 0.01, 0.99));
        logit_sum += logit(in.back()).value;
      }
      const double direct = sigmoid(LogOdds{logit_sum}).value();
      CHECK(std::abs(binarize_or(in).combined.value() - direct) <= 1e-10);
      CHECK(std::abs(evaluate_plan(left_fold_plan(k), in, update_belief).value() - direct) <= 1e-10);
    }
  }

  TEST_CASE("AND at the limits") {
    const std::vector<Probability> all_hi{kHi, kHi, kHi};
    const std::vector<Probability> one_lo{kHi, kLo, kHi};
    CHECK(binarize_and(all_hi).combined == kHi);
    CHECK(binarize_and(one_lo).combined == kLo);
    const std::vector<Probability> soft{kHi, Probability(0.7)};
    CHECK_THROWS_AS(binarize_and(soft), DomainError);
    CHECK_THROWS_AS(limit_conjunction(Probability(0.5), kHi), DomainError);
    CHECK_THROWS_AS(binarize_or(std::vector<Probability>{}), std::invalid_argument);
  }

  TEST_CASE("intermediate counts") {
    CHECK(intermediate_count(1) == 0);
    CHECK(intermediate_count(2) == 0);
    CHECK(intermediate_count(3) == 2);
    CHECK(intermediate_count(4) == 2);
    CHECK(intermediate_count(5) == 5);
    CHECK(intermediate_count(8) == 6);
  }

  TEST_CASE("OR graph rewrite preserves marginals") {
    const AnnotatedGraph a = parse_annotated_graph(slurp("or4.agraph"));
    const std::vector<double> expected{0.46388443017656517, 0.4911717495987161, 0.5248796147672553,
                                       0.5257551437326718,  0.5257551437326721, 0.46859371476327566};
    CHECK(max_abs_error(annotated_marginals(a).marginals, expected) <= 1e-12);

    const BinarizedGraph b = binarize_graph(a);
    CHECK(b.graph.num_vars() == 6 + intermediate_count(4));
    CHECK(b.intermediates.size() == 2);
    CHECK(b.depths == std::vector<std::size_t>{2});
    auto m = binarized_marginals(b).marginals;
    m.resize(6);
    CHECK(max_abs_error(m, expected) <= 1e-12);
    // two pairwise factors, four leaf links, two equality ties
    CHECK(b.graph.factors().size() == 8);
  }

  TEST_CASE("AND graph rewrite preserves marginals") {
    const AnnotatedGraph a = parse_annotated_graph(slurp("and3.agraph"));
    const std::vector<double> expected{0.10330578512396695, 0.46280991735537197, 0.5, 0.5, 0.4545454545454546};
    CHECK(max_abs_error(annotated_marginals(a).marginals, expected) <= 1e-12);
    const BinarizedGraph b = binarize_graph(a);
    CHECK(b.graph.num_vars() == 5 + intermediate_count(3));
    CHECK(b.and_gates.size() == 3);
    for (const Gate& gate : b.and_gates) CHECK(gate.inputs.size() <= 2);
    auto m = binarized_marginals(b).marginals;
    m.resize(5);
    CHECK(max_abs_error(m, expected) <= 1e-12);
  }

  TEST_CASE("every input sits depth hops below the output") {
    for (std::size_t k = 1; k <= kMaxArity; ++k) {
      AnnotatedGraph a;
      a.num_vars = k + 1;
      KaryFactor kf;
      kf.output = 0;
      for (std::size_t i = 1; i <= k; ++i) kf.inputs.push_back(i);
      a.kfactors.push_back(kf);
      const BinarizedGraph b = binarize_graph(a);
      CHECK(b.graph.num_vars() == k + 1 + intermediate_count(k));
      CHECK(is_tree(b.graph));
      // distance from the output to each input
      std::vector<std::size_t> dist(b.graph.num_vars(), 0);
      std::vector<bool> seen(b.graph.num_vars(), false);
      std::vector<std::size_t> frontier{0};
      seen[0] = true;
      while (!frontier.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t v : frontier) {
          for (const Neighbor& nb : b.graph.neighbors(v)) {
            if (seen[nb.var]) continue;
            seen[nb.var] = true;
            dist[nb.var] = dist[v] + 1;
            next.push_back(nb.var);
          }
        }
        frontier = std::move(next);
      }
      for (std::size_t i = 1; i <= k; ++i) CHECK(dist[i] == std::max<std::size_t>(1, ceil_log2(k)));
    }
  }

  TEST_CASE("validation") {
    AnnotatedGraph a;
    a.num_vars = 10;
    KaryFactor kf;
    kf.output = 0;
    CHECK_THROWS_AS(binarize_graph({10, {}, {kf}}), std::invalid_argument);
    for (std::size_t i = 1; i <= 9; ++i) kf.inputs.push_back(i);
    CHECK_THROWS_AS(binarize_graph({10, {}, {kf}}), std::invalid_argument);
    kf.inputs = {1, 1};
    CHECK_THROWS_AS(binarize_graph({10, {}, {kf}}), std::invalid_argument);
    kf.inputs = {0, 1};
    CHECK_THROWS_AS(binarize_graph({10, {}, {kf}}), std::invalid_argument);
    kf.inputs = {1, 2};
    CHECK_THROWS_AS(binarize_graph({10, {{0, 1, {}}}, {kf}}), GraphError);
  }

  TEST_CASE("annotated text round trip") {
    const AnnotatedGraph a = parse_annotated_graph(slurp("or4.agraph"));
    const std::string text = serialize(a);
    const AnnotatedGraph b = parse_annotated_graph(text);
    CHECK(serialize(b) == text);
    CHECK(b.kfactors[0].link == FactorTable({0.8, 0.3, 0.2, 0.9}));
    const AnnotatedGraph c = parse_annotated_graph(slurp("and3.agraph"));
    CHECK(parse_annotated_graph(serialize(c)).kfactors[0].kind == GateKind::kAnd);
  }

  TEST_CASE("annotated parse errors") {
    CHECK_THROWS_AS(parse_annotated_graph("vars 3\nkfactor 0 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_annotated_graph("vars 3\nkfactor 0 1 2 kind=xor\n"), ParseError);
    CHECK_THROWS_AS(parse_annotated_graph("vars 3\nkfactor 0 1 2 kind=or link=1,2,3\n"), ParseError);
    CHECK_THROWS_AS(parse_annotated_graph("vars 3\nkfactor 0 1 2 kind=or link=1,2,3,-4\n"), ParseError);
    CHECK_THROWS_AS(parse_annotated_graph("vars 3\nwidget 0 1\n"), ParseError);
  }
}
