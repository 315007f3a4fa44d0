#include "bplab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bplab/equivalence.hpp"
#include "bplab/exact_oracle.hpp"
#include "bplab/random.hpp"

namespace bplab {

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::size_t structure_slot(Structure s) { return static_cast<std::size_t>(s); }

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, std::size_t structure_slot, std::size_t trial) {
  return derive_seed(master, structure_slot, trial);
}

TrialRecord run_loopy_trial(Structure structure, std::size_t trial, std::uint64_t seed,
                            const ConvergenceOptions& opts) {
  Rng rng(seed);
  const FactorGraph g = generate({structure, 0}, rng, kTableLow, kTableHigh);
  const BpResult bp = sumproduct_run(g, opts);
  const std::vector<double> exact = exact_marginals(g).marginals;
  const std::vector<double> approx = values_of(bp.marginals);

  TrialRecord r;
  r.structure = structure;
  r.trial = trial;
  r.seed = seed;
  r.converged = bp.converged;
  r.iterations = bp.iterations;
  r.kl = kl_divergence(exact, approx);
  r.mae = mean_abs_error(exact, approx);
  return r;
}

StructureSummary summarize(Structure structure, std::span<const TrialRecord> records) {
  StructureSummary s;
  s.structure = structure;
  Rng probe(0);
  const FactorGraph shape = generate({structure, 0}, probe, kTableLow, kTableHigh);
  s.vars = shape.num_vars();
  s.loops = loop_count(shape);
  double kl = 0.0;
  double mae = 0.0;
  for (const TrialRecord& r : records) {
    if (r.structure != structure) continue;
    ++s.trials;
    if (!r.converged) continue;
    ++s.converged;
    kl += r.kl;
    mae += r.mae;
  }
  if (s.converged > 0) {
    s.avg_kl = kl / static_cast<double>(s.converged);
    s.avg_mae = mae / static_cast<double>(s.converged);
  }
  return s;
}

SuiteSummary run_loopy_suite(std::size_t trials_per_structure, std::uint64_t seed,
                             const ConvergenceOptions& opts, std::size_t jobs,
                             std::span<const Structure> structures) {
  SuiteSummary out;
  out.master_seed = seed;
  const std::size_t total = trials_per_structure * structures.size();
  out.records.resize(total);
  parallel_for(total, jobs, [&](std::size_t i) {
    const Structure s = structures[i / trials_per_structure];
    const std::size_t t = i % trials_per_structure;
    out.records[i] = run_loopy_trial(s, t, trial_seed(seed, structure_slot(s), t), opts);
  });
  if (trials_per_structure == 0) return out;
  for (Structure s : structures) out.rows.push_back(summarize(s, out.records));
  return out;
}

std::string loopy_csv(const SuiteSummary& s) {
  std::string out = "structure,seed,converged,iterations,kl,mae\n";
  for (const TrialRecord& r : s.records) {
    out += std::string(structure_name(r.structure)) + "," + std::to_string(r.seed) + "," +
           (r.converged ? "1" : "0") + "," + std::to_string(r.iterations) + "," +
           format_real(r.kl) + "," + format_real(r.mae) + "\n";
  }
  return out;
}

std::string loopy_markdown(const SuiteSummary& s) {
  std::string out = "| Experiment | Vars | Loops | Converged | Avg KL | Avg MAE |\n";
  out += "|---|---|---|---|---|---|\n";
  for (const StructureSummary& row : s.rows) {
    out += "| " + std::string(structure_name(row.structure)) + " | " + std::to_string(row.vars) +
           " | " + std::to_string(row.loops) + " | " + std::to_string(row.converged) + "/" +
           std::to_string(row.trials) + " | " + fixed6(row.avg_kl) + " | " + fixed6(row.avg_mae) +
           " |\n";
  }
  return out;
}

std::vector<TreeRecord> run_tree_suite(std::size_t count, std::uint64_t seed, std::size_t max_vars,
                                       std::size_t jobs) {
  if (max_vars == 0) throw std::invalid_argument("trees need at least one variable");
  std::vector<TreeRecord> records(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    TreeRecord& r = records[i];
    r.index = i;
    r.seed = derive_seed(seed, 0x7265, i);
    Rng rng(r.seed);
    const std::size_t n = 1 + uniform_index(rng, max_vars);
    const FactorGraph tree = generate_random_tree(n, rng, kTableLow, kTableHigh);
    const TreeExactnessReport rep = check_tree_exactness(tree, diameter(tree));
    r.vars = n;
    r.diameter = rep.diameter;
    r.sweeps = rep.sweeps_to_converge;
    r.converged = rep.converged;
    r.sumproduct_deviation = rep.sumproduct_deviation;
    r.qbbn_deviation = rep.qbbn_deviation;
  });
  return records;
}

std::string tree_csv(std::span<const TreeRecord> records) {
  std::string out = "index,seed,vars,diameter,sweeps,converged,sumproduct_dev,qbbn_dev\n";
  for (const TreeRecord& r : records) {
    out += std::to_string(r.index) + "," + std::to_string(r.seed) + "," + std::to_string(r.vars) +
           "," + std::to_string(r.diameter) + "," + std::to_string(r.sweeps) + "," +
           (r.converged ? "1" : "0") + "," + format_real(r.sumproduct_deviation) + "," +
           format_real(r.qbbn_deviation) + "\n";
  }
  return out;
}

CorpusInstance corpus_instance(std::uint64_t seed, std::size_t min_vars, std::size_t max_vars) {
  if (min_vars == 0 || min_vars > max_vars) throw std::invalid_argument("bad variable range");
  Rng rng(seed);
  const std::size_t n = min_vars + uniform_index(rng, max_vars - min_vars + 1);
  const std::size_t chords = uniform_index(rng, n + 1);
  CorpusInstance inst;
  inst.seed = seed;
  inst.graph = generate_random_graph(n, chords, rng, kTableLow, kTableHigh);
  std::vector<Probability> beliefs;
  for (std::size_t v = 0; v < n; ++v) beliefs.emplace_back(uniform_real(rng, 0.001, 0.999));
  inst.state = BeliefState::from_beliefs(std::move(beliefs));
  return inst;
}

std::vector<CorpusInstance> make_corpus(std::size_t count, std::uint64_t seed, std::size_t min_vars,
                                        std::size_t max_vars) {
  std::vector<CorpusInstance> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    corpus.push_back(corpus_instance(derive_seed(seed, 0x6571, i), min_vars, max_vars));
  }
  return corpus;
}

EquivalenceCorpusReport run_equivalence_corpus(std::size_t count, std::uint64_t seed, AttentionMode mode,
                                               double beta, std::size_t jobs) {
  const std::vector<CorpusInstance> corpus = make_corpus(count, seed);
  EquivalenceCorpusReport r;
  r.mode = mode;
  r.beta = beta;
  r.deviations.resize(count);
  r.vars.resize(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    const CorpusInstance& inst = corpus[i];
    TransformerWeights w = build_bp_weights(inst.graph.num_vars());
    w.mode = mode;
    w.temperature = beta;
    r.deviations[i] = check_round(inst.graph, inst.state, w, 0.0).max_abs_deviation;
    r.vars[i] = inst.graph.num_vars();
  });
  for (double d : r.deviations) {
    r.max_deviation = std::max(r.max_deviation, d);
    for (std::size_t t = 0; t < kEquivalenceTiers.size(); ++t) {
      if (d <= kEquivalenceTiers[t]) ++r.passed[t];
    }
  }
  return r;
}

std::string equivalence_csv(const EquivalenceCorpusReport& r) {
  std::string out = "instance,vars,deviation,pass_1e-12,pass_1e-9,pass_1e-6\n";
  for (std::size_t i = 0; i < r.deviations.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(r.vars[i]) + "," + format_real(r.deviations[i]);
    for (double tier : kEquivalenceTiers) out += r.deviations[i] <= tier ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

std::vector<ConcentrationPoint> run_concentration_curve(std::span<const double> betas,
                                                        std::span<const CorpusInstance> corpus) {
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw std::invalid_argument("temperatures must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1])) throw std::invalid_argument("temperatures must ascend");
  }
  std::vector<ConcentrationPoint> curve;
  for (double beta : betas) {
    ConcentrationPoint p{beta, 0.0};
    for (const CorpusInstance& inst : corpus) {
      const TransformerWeights w = build_bp_weights(inst.graph.num_vars());
      const TokenMatrix x = encode_bp_state(inst.graph, inst.state);
      for (const HeadWeights& h : w.heads) {
        const Eigen::MatrixXd soft = attention_head(x, h, AttentionMode::kSoft, beta);
        const Eigen::MatrixXd hard = attention_head(x, h, AttentionMode::kHard, beta);
        if (soft.size() > 0) p.max_error = std::max(p.max_error, (soft - hard).cwiseAbs().maxCoeff());
      }
    }
    curve.push_back(p);
  }
  return curve;
}

std::vector<double> default_betas() { return {1, 2, 4, 8, 16, 32, 64}; }

std::vector<OracleSample> oracle_batch(std::size_t count, std::uint64_t seed, double low, double high) {
  if (!(low >= 0.0 && high >= low && std::isfinite(high))) {
    throw std::invalid_argument("table range must satisfy 0 <= low <= high");
  }
  std::vector<OracleSample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0x6f72, i));
    const FactorGraph g = generate({Structure::kChain2, 0}, rng, low, high);
    const ExactMarginals exact = exact_marginals(g);
    samples.push_back({g.factors()[0].table.entries(), exact.marginals[0], exact.marginals[1]});
  }
  return samples;
}

std::string oracle_batch_csv(std::span<const OracleSample> samples) {
  std::string out = "table4,posterior0,posterior1\n";
  for (const OracleSample& s : samples) {
    out += format_real(s.table[0]) + ";" + format_real(s.table[1]) + ";" + format_real(s.table[2]) +
           ";" + format_real(s.table[3]) + "," + format_real(s.posterior0) + "," +
           format_real(s.posterior1) + "\n";
  }
  return out;
}

}  // namespace bplab
