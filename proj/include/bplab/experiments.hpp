#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bplab/bp_engine.hpp"
#include "bplab/factor_graph.hpp"
#include "bplab/transformer.hpp"

namespace bplab {

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

inline constexpr double kTableLow = 0.1;
inline constexpr double kTableHigh = 1.0;

struct TrialRecord {
  Structure structure = Structure::kTriangle;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  std::size_t iterations = 0;
  double kl = 0.0;  // KL(exact || bp), mean over variables
  double mae = 0.0;
};

struct StructureSummary {
  Structure structure = Structure::kTriangle;
  std::size_t vars = 0;
  std::size_t loops = 0;
  std::size_t trials = 0;
  std::size_t converged = 0;
  double avg_kl = 0.0;   // over converged trials
  double avg_mae = 0.0;  // over converged trials
};

struct SuiteSummary {
  std::uint64_t master_seed = 0;
  std::vector<StructureSummary> rows;
  std::vector<TrialRecord> records;  // structure order, then trial index
};

/// Trial seed for structure slot s and trial t.
std::uint64_t trial_seed(std::uint64_t master, std::size_t structure_slot, std::size_t trial);

TrialRecord run_loopy_trial(Structure structure, std::size_t trial, std::uint64_t seed,
                            const ConvergenceOptions& opts);

SuiteSummary run_loopy_suite(std::size_t trials_per_structure, std::uint64_t seed,
                             const ConvergenceOptions& opts = {}, std::size_t jobs = 1,
                             std::span<const Structure> structures = kLoopyStructures);

/// Means over converged records, recomputed from scratch.
StructureSummary summarize(Structure structure, std::span<const TrialRecord> records);

/// `structure,seed,converged,iterations,kl,mae`
std::string loopy_csv(const SuiteSummary& s);
/// `| Experiment | Vars | Loops | Converged | Avg KL | Avg MAE |`
std::string loopy_markdown(const SuiteSummary& s);

struct TreeRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t vars = 0;
  std::size_t diameter = 0;
  std::size_t sweeps = 0;
  bool converged = false;
  double sumproduct_deviation = 0.0;
  double qbbn_deviation = 0.0;
};

/// Random trees with n uniform in [1, max_vars], tables U[0.1, 1].
std::vector<TreeRecord> run_tree_suite(std::size_t count, std::uint64_t seed, std::size_t max_vars = 10,
                                       std::size_t jobs = 1);

/// `index,seed,vars,diameter,sweeps,converged,sumproduct_dev,qbbn_dev`
std::string tree_csv(std::span<const TreeRecord> records);

struct CorpusInstance {
  std::uint64_t seed = 0;
  FactorGraph graph;
  BeliefState state;
};

/// Connected graph on n in [min_vars, max_vars] variables (a random tree
/// plus up to n chords), tables U[0.1, 1], beliefs U[0.001, 0.999].
CorpusInstance corpus_instance(std::uint64_t seed, std::size_t min_vars = 2, std::size_t max_vars = 8);
std::vector<CorpusInstance> make_corpus(std::size_t count, std::uint64_t seed, std::size_t min_vars = 2,
                                        std::size_t max_vars = 8);

inline constexpr std::array<double, 3> kEquivalenceTiers{1e-12, 1e-9, 1e-6};

struct EquivalenceCorpusReport {
  AttentionMode mode = AttentionMode::kHard;
  double beta = 0.0;
  std::vector<double> deviations;  // per instance
  std::vector<std::size_t> vars;
  double max_deviation = 0.0;
  std::array<std::size_t, 3> passed{};  // per tier
};

EquivalenceCorpusReport run_equivalence_corpus(std::size_t count, std::uint64_t seed, AttentionMode mode,
                                               double beta, std::size_t jobs = 1);

/// `instance,vars,deviation,pass_1e-12,pass_1e-9,pass_1e-6`
std::string equivalence_csv(const EquivalenceCorpusReport& r);

struct ConcentrationPoint {
  double beta = 0.0;
  double max_error = 0.0;  // max |soft head output - hard head output|
};

/// Betas must be positive and strictly ascending.
std::vector<ConcentrationPoint> run_concentration_curve(std::span<const double> betas,
                                                        std::span<const CorpusInstance> corpus);

/// 1, 2, 4, ..., 64.
std::vector<double> default_betas();

/// Two-variable graph with a random table and its exact posteriors.
struct OracleSample {
  std::array<double, 4> table{};
  double posterior0 = 0.0;
  double posterior1 = 0.0;
};

std::vector<OracleSample> oracle_batch(std::size_t count, std::uint64_t seed, double low, double high);

/// `table4,posterior0,posterior1`; table4 is f00;f01;f10;f11.
std::string oracle_batch_csv(std::span<const OracleSample> samples);

}  // namespace bplab
