#include <doctest.h>

#include <cmath>

#include "bplab/exact_oracle.hpp"

using namespace bplab;

TEST_SUITE("exact_oracle") {
  TEST_CASE("two-variable table") {
    const FactorGraph g = FactorGraph::build(2, {{0, 1, FactorTable({1, 2, 3, 4})}});
    const ExactMarginals m = exact_marginals(g);
    CHECK(m.partition_z == 10.0);
    CHECK(m.marginals[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(m.marginals[1] == doctest::Approx(0.6).epsilon(1e-15));
  }

  TEST_CASE("uniform tables give one half") {
    Rng rng(2);
    const FactorGraph shape = generate_random_graph(6, 3, rng, 0.1, 1.0);
    std::vector<Factor> flat;
    for (const Factor& f : shape.factors()) flat.push_back({f.a, f.b, FactorTable::uniform()});
    const ExactMarginals m = exact_marginals(FactorGraph::build(6, flat));
    for (double p : m.marginals) CHECK(p == 0.5);
    CHECK(m.partition_z == 64.0);
  }

  TEST_CASE("isolated variables and empty graphs") {
    const ExactMarginals m = exact_marginals(FactorGraph::build(3, {}));
    CHECK(m.partition_z == 8.0);
    CHECK(m.marginals == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(exact_marginals(FactorGraph::build(0, {})).marginals.empty());
  }

  TEST_CASE("filters restrict the enumeration") {
    const FactorGraph g = FactorGraph::build(2, {{0, 1, FactorTable({1, 2, 3, 4})}});
    const ExactMarginals m = exact_marginals(g, [](std::uint64_t x) { return (x & 1U) == 1U; });
    CHECK(m.partition_z == 7.0);
    CHECK(m.marginals[0] == 1.0);
    CHECK(m.marginals[1] == doctest::Approx(4.0 / 7.0));
  }

  TEST_CASE("zero partition function") {
    const FactorGraph g = FactorGraph::build(2, {{0, 1, FactorTable({0, 1, 0, 0})}});
    CHECK_THROWS_AS(exact_marginals(g, [](std::uint64_t x) { return x != 2U; }), DomainError);
  }

  TEST_CASE("size limit") {
    CHECK_THROWS_AS(exact_marginals(FactorGraph::build(kMaxOracleVars + 1, {})), OracleLimitError);
  }

  TEST_CASE("divergences") {
    const std::vector<double> p{0.7};
    const std::vector<double> q{0.6};
    CHECK(std::abs(kl_divergence(p, q) - 0.021600854143546594) <= 1e-15);
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(kl_divergence(p, std::vector<double>{1.0}), DomainError);
    CHECK_THROWS_AS(kl_divergence(p, std::vector<double>{0.5, 0.5}), std::invalid_argument);
    CHECK(mean_abs_error(std::vector<double>{0.1, 0.5}, std::vector<double>{0.2, 0.2}) == doctest::Approx(0.2));
    CHECK(max_abs_error(std::vector<double>{0.1, 0.5}, std::vector<double>{0.2, 0.2}) == doctest::Approx(0.3));
    CHECK(mean_abs_error(std::vector<double>{}, std::vector<double>{}) == 0.0);
  }

  TEST_CASE("error metrics on a rounded posterior pair") {
    // four-decimal inputs, so the max error lands on 0.0020
    const std::vector<double> transformer{0.7349, 0.4366};
    const std::vector<double> exact{0.7338, 0.4346};
    CHECK(max_abs_error(transformer, exact) == doctest::Approx(0.0020).epsilon(1e-9));
    CHECK(mean_abs_error(transformer, exact) == doctest::Approx(0.00155).epsilon(1e-9));
  }
}
