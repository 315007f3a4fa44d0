// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "bplab/binarizer.hpp"
#include "bplab/concept_space.hpp"
#include "bplab/equivalence.hpp"
#include "bplab/experiments.hpp"

using namespace bplab;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s  %-20s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

int main() {
  criterion("loopy-suite", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteSummary s = run_loopy_suite(100, kSeed, {}, 1);
    const double secs = elapsed_since(t0);
    bool ok = secs < 60.0;
    double worst_kl = 0.0;
    double worst_mae = 0.0;
    std::size_t worst_conv = 100;
    for (const StructureSummary& row : s.rows) {
      ok = ok && row.trials == 100 && row.converged * 100 >= row.trials * 99 && row.avg_kl <= 5e-4 &&
           row.avg_mae <= 1e-2;
      worst_kl = std::max(worst_kl, row.avg_kl);
      worst_mae = std::max(worst_mae, row.avg_mae);
      worst_conv = std::min(worst_conv, row.converged);
    }
    ok = ok && s.rows.size() == 5;
    return Outcome{ok, "5x100 trials, min converged " + std::to_string(worst_conv) +
                           "/100, worst avg KL " + sci(worst_kl) + " (<= 5e-4), worst avg MAE " +
                           sci(worst_mae) + " (<= 1e-2)"};
  });

  criterion("round-equivalence", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto hard = run_equivalence_corpus(1000, kSeed, AttentionMode::kHard, 64.0);
    const auto soft = run_equivalence_corpus(1000, kSeed, AttentionMode::kSoft, 64.0);
    const double secs = elapsed_since(t0);
    const bool ok = hard.passed[0] == 1000 && soft.passed[1] == 1000 && secs < 30.0;
    return Outcome{ok, "1000 graphs n in [2,8]: hard max " + sci(hard.max_deviation) +
                           " (<= 1e-12), soft beta=64 max " + sci(soft.max_deviation) + " (<= 1e-9)"};
  });

  criterion("tree-exactness", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto records = run_tree_suite(200, kSeed, 10);
    const double secs = elapsed_since(t0);
    double worst = 0.0;
    std::size_t late = 0;
    for (const TreeRecord& r : records) {
      worst = std::max(worst, r.sumproduct_deviation);
      if (!r.converged || r.sweeps > r.diameter + 1) ++late;
    }
    const bool ok = worst <= 1e-9 && late == 0 && secs < 10.0;
    return Outcome{ok, "200 trees n <= 10: max deviation " + sci(worst) + " (<= 1e-9), " +
                           std::to_string(late) + " needing more than diameter+1 sweeps"};
  });

  criterion("algebra-laws", [] {
    Rng rng(derive_seed(kSeed, 1, 0));
    double comm = 0.0;
    double ident = 0.0;
    double inv = 0.0;
    double assoc = 0.0;
    auto draw = [&] { return Probability(uniform_real(rng, 1e-6, 1.0 - 1e-6)); };
    for (int i = 0; i < 10000; ++i) {
      const Probability a = draw();
      const Probability b = draw();
      comm = std::max(comm, std::abs(update_belief(a, b).value() - update_belief(b, a).value()));
    }
    for (int i = 0; i < 10000; ++i) {
      const Probability a = draw();
      ident = std::max(ident, std::abs(update_belief(a, Probability(0.5)).value() - a.value()));
    }
    for (int i = 0; i < 10000; ++i) {
      const Probability a = draw();
      inv = std::max(inv, std::abs(update_belief(a, Probability(1.0 - a.value())).value() - 0.5));
    }
    for (int i = 0; i < 10000; ++i) {
      const Probability a = draw();
      const Probability b = draw();
      const Probability c = draw();
      assoc = std::max(assoc, std::abs(update_belief(update_belief(a, b), c).value() -
                                       update_belief(a, update_belief(b, c)).value()));
    }
    const bool ok = comm <= 1e-12 && ident <= 1e-12 && inv <= 1e-12 && assoc <= 1e-10;
    return Outcome{ok, "10^4 samples each: commutativity " + sci(comm) + ", identity " + sci(ident) +
                           ", inverse " + sci(inv) + " (<= 1e-12), associativity " + sci(assoc) +
                           " (<= 1e-10)"};
  });

  criterion("binarization", [] {
    Rng rng(derive_seed(kSeed, 2, 0));
    double worst_or = 0.0;
    bool depth_ok = true;
    std::size_t and_mismatch = 0;
    for (std::size_t k = 1; k <= 6; ++k) {
      depth_ok = depth_ok && balanced_plan(k).depth == ceil_log2(k);
      for (int t = 0; t < 1000; ++t) {
        std::vector<Probability> in;
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          in.emplace_back(uniform_real(rng, 0.001, 0.999));
          sum += logit(in.back()).value;
        }
        const CombinedResult r = binarize_or(in);
        depth_ok = depth_ok && r.plan.depth == ceil_log2(k);
        worst_or = std::max(worst_or, std::abs(r.combined.value() - sigmoid(LogOdds{sum}).value()));
      }
      for (std::uint32_t mask = 0; mask < (1U << k); ++mask) {
        std::vector<Probability> in;
        for (std::size_t i = 0; i < k; ++i) in.push_back(Probability::clamped((mask >> i) & 1U ? 1.0 : 0.0));
        const bool all = mask == (1U << k) - 1;
        if (binarize_and(in).combined != Probability::clamped(all ? 1.0 : 0.0)) ++and_mismatch;
      }
    }
    const bool ok = worst_or <= 1e-10 && depth_ok && and_mismatch == 0;
    return Outcome{ok, "OR k<=6 x 10^3 tuples max " + sci(worst_or) + " (<= 1e-10), depth law " +
                           (depth_ok ? "holds" : "violated") + ", AND mismatches over all 2^k inputs " +
                           std::to_string(and_mismatch)};
  });

  criterion("uniqueness-probe", [] {
    Rng rng(derive_seed(kSeed, 3, 0));
    const auto grid = default_uniqueness_grid();
    const UniquenessReport r = uniqueness_probe(grid, 1000, rng);
    double at_bp = 1.0;
    double min_other = 1.0;
    for (const UniquenessPoint& p : r.points) {
      if (p.params == FfnParams::exact_bp()) {
        at_bp = p.max_deviation;
      } else {
        min_other = std::min(min_other, p.max_deviation);
      }
    }
    const bool ok = at_bp <= 1e-15 && min_other > 1e-4;
    return Outcome{ok, "27-point grid: deviation at (1,1,0) " + sci(at_bp) +
                           " (<= 1e-15), smallest elsewhere " + sci(min_other) + " (> 1e-4)"};
  });

  criterion("concept-counts", [] {
    bool keys_ok = true;
    for (std::size_t n = 1; n <= 16; ++n) {
      keys_ok = keys_ok && enumerate_routing_keys(n).size() == routing_key_count(n) &&
                routing_key_count(n) == 2 * n * n;
    }
    Rng rng(derive_seed(kSeed, 4, 0));
    std::size_t checked = 0;
    std::size_t over = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
      for (std::size_t symbols : {1U, 10U, 100U, 1000U, 10000U}) {
        for (int rep = 0; rep < 3; ++rep) {
          const FsmSpec spec = random_fsm(n, symbols, rng);
          if (fsm_behavior_classes(spec) > fsm_class_bound(n)) ++over;
          ++checked;
        }
      }
    }
    const bool ok = keys_ok && over == 0;
    return Outcome{ok, std::string("routing keys n=1..16 ") + (keys_ok ? "match 2n^2" : "MISMATCH") +
                           ", " + std::to_string(checked) + " random automata n<=4, " +
                           std::to_string(over) + " above n^n"};
  });

  criterion("concentration", [] {
    const auto corpus = make_corpus(1000, kSeed);
    const auto curve = run_concentration_curve(default_betas(), corpus);
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      monotone = monotone && curve[i].max_error <= curve[i - 1].max_error;
    }
    const bool ok = monotone && curve.back().beta == 64.0 && curve.back().max_error < 1e-9;
    return Outcome{ok, std::string("beta 1..64 ") + (monotone ? "nonincreasing" : "NOT monotone") +
                           ", error at beta=1 " + sci(curve.front().max_error) + ", at beta=64 " +
                           sci(curve.back().max_error) + " (< 1e-9)"};
  });

  criterion("determinism", [] {
    const std::size_t jobs = std::max(2U, std::thread::hardware_concurrency());
    const bool loopy = loopy_csv(run_loopy_suite(20, kSeed, {}, 1)) == loopy_csv(run_loopy_suite(20, kSeed, {}, jobs));
    const bool tree = tree_csv(run_tree_suite(50, kSeed)) == tree_csv(run_tree_suite(50, kSeed, 10, jobs));
    const bool equiv = equivalence_csv(run_equivalence_corpus(100, kSeed, AttentionMode::kSoft, 8.0)) ==
                       equivalence_csv(run_equivalence_corpus(100, kSeed, AttentionMode::kSoft, 8.0, jobs));
    const bool oracle = oracle_batch_csv(oracle_batch(100, kSeed, 0.05, 1.0)) ==
                        oracle_batch_csv(oracle_batch(100, kSeed, 0.05, 1.0));
    const bool ok = loopy && tree && equiv && oracle;
    return Outcome{ok, std::string("rerun CSV byte-identical (1 vs ") + std::to_string(jobs) +
                           " workers): loopy " + (loopy ? "yes" : "no") + ", tree " + (tree ? "yes" : "no") +
                           ", equiv " + (equiv ? "yes" : "no") + ", oracle batch " + (oracle ? "yes" : "no")};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
