// bplab: command-line driver for the BP / transformer experiments.
//
// Exit codes: 0 success, 1 a checked criterion failed, 2 usage or input error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bplab/binarizer.hpp"
#include "bplab/concept_space.hpp"
#include "bplab/equivalence.hpp"
#include "bplab/exact_oracle.hpp"
#include "bplab/experiments.hpp"
#include "bplab/factor_graph.hpp"

using namespace bplab;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BPLAB_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError("BPLAB_SEED is not an unsigned integer: '" + std::string(env) + "'");
  }
  return 42;
}

struct Common {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output;
  std::string format = "csv";
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--seed", c.seed, "Master seed (default: $BPLAB_SEED, else 42)")
      ->each([&c](const std::string&) { c.seed_given = true; });
  cmd->add_option("--output,-o", c.output, "Write the report here instead of stdout");
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"csv", "md"}))
      ->capture_default_str();
  cmd->add_option("--jobs,-j", c.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

std::uint64_t seed_of(const Common& c) { return c.seed_given ? c.seed : default_seed(); }

void emit(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw InputError("cannot open '" + c.output + "' for writing");
  out << text;
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief propagation and transformer equivalence experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // loopy
  Common loopy_c;
  std::size_t loopy_trials = 100;
  ConvergenceOptions loopy_opts;
  auto* loopy = app.add_subcommand("loopy", "Sum-product BP on the five loopy structures vs exact marginals");
  add_common(loopy, loopy_c, "md");
  loopy->add_option("--trials", loopy_trials, "Trials per structure")->capture_default_str();
  loopy->add_option("--max-iters", loopy_opts.max_iters, "Sweep cap")->capture_default_str();
  loopy->add_option("--tol", loopy_opts.tol, "Convergence threshold on message change")->capture_default_str();
  loopy->add_option("--damping", loopy_opts.damping, "Message damping in [0,1)")->capture_default_str();

  // tree
  Common tree_c;
  std::size_t tree_count = 200;
  std::size_t tree_max_vars = 10;
  double tree_tol = 1e-9;
  auto* tree = app.add_subcommand("tree", "Sum-product exactness on random trees");
  add_common(tree, tree_c, "csv");
  tree->add_option("--count", tree_count, "Number of trees")->capture_default_str();
  tree->add_option("--max-vars", tree_max_vars, "Largest tree")->check(CLI::Range(1, 24))->capture_default_str();
  tree->add_option("--tol", tree_tol, "Allowed deviation from the exact marginals")->capture_default_str();

  // equiv
  Common equiv_c;
  std::size_t equiv_count = 1000;
  std::string equiv_mode = "hard";
  double equiv_beta = 64.0;
  double equiv_tol = 1e-12;
  auto* equiv = app.add_subcommand("equiv", "Transformer forward pass vs one BP round on a random corpus");
  add_common(equiv, equiv_c, "md");
  equiv->add_option("--count", equiv_count, "Corpus size")->capture_default_str();
  equiv->add_option("--mode", equiv_mode, "Attention mode")
      ->check(CLI::IsMember({"hard", "soft"}))
      ->capture_default_str();
  equiv->add_option("--beta", equiv_beta, "Softmax temperature (soft mode)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  equiv->add_option("--tol", equiv_tol, "Pass threshold per instance")->capture_default_str();

  // concentrate
  Common conc_c;
  std::size_t conc_count = 200;
  std::vector<double> conc_betas = default_betas();
  double conc_tol = 1e-9;
  auto* conc = app.add_subcommand("concentrate", "Soft vs hard routing error as the temperature grows");
  add_common(conc, conc_c, "csv");
  conc->add_option("--count", conc_count, "Corpus size")->capture_default_str();
  conc->add_option("--betas", conc_betas, "Ascending temperatures")->capture_default_str();
  conc->add_option("--tol", conc_tol, "Required error at the largest temperature")->capture_default_str();

  // uniqueness
  Common uniq_c;
  std::size_t uniq_samples = 1000;
  auto* uniq = app.add_subcommand("uniqueness", "Probe FFN parameters around (1, 1, 0)");
  add_common(uniq, uniq_c, "csv");
  uniq->add_option("--samples", uniq_samples, "Message pairs per grid point")->capture_default_str();

  // concepts
  std::size_t concepts_n = 3;
  bool concepts_list = false;
  auto* concepts = app.add_subcommand("concepts", "Count routing keys for n variables");
  concepts->add_option("--n", concepts_n, "Variable count")->check(CLI::PositiveNumber)->capture_default_str();
  concepts->add_flag("--list", concepts_list, "Print every key");

  // fsm
  std::string fsm_input;
  auto* fsm = app.add_subcommand("fsm", "Count behavior classes of a finite-state machine");
  fsm->add_option("--input,-i", fsm_input, "Spec file (default: stdin)");

  // binarize
  std::string bin_input;
  std::string bin_output;
  bool bin_check = false;
  auto* bin = app.add_subcommand("binarize", "Rewrite k-ary OR/AND nodes into pairwise factors");
  bin->add_option("--input,-i", bin_input, "Annotated graph (default: stdin)");
  bin->add_option("--output,-o", bin_output, "Write the binarized graph here");
  bin->add_flag("--check", bin_check, "Compare exact marginals before and after (tolerance 1e-10)");

  // oracle
  Common oracle_c;
  std::string oracle_input;
  std::size_t oracle_batch_n = 0;
  double oracle_low = 0.05;
  double oracle_high = 1.0;
  auto* oracle = app.add_subcommand("oracle", "Exact marginals by enumeration");
  add_common(oracle, oracle_c, "csv");
  oracle->add_option("--input,-i", oracle_input, "Graph file (default: stdin)");
  oracle->add_option("--batch", oracle_batch_n,
                     "Instead of reading a graph, emit N random two-variable tables with posteriors");
  oracle->add_option("--low", oracle_low, "Smallest table entry for --batch")->capture_default_str();
  oracle->add_option("--high", oracle_high, "Largest table entry for --batch")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*loopy) {
      const SuiteSummary s = run_loopy_suite(loopy_trials, seed_of(loopy_c), loopy_opts, loopy_c.jobs);
      emit(loopy_c, loopy_c.format == "md" ? loopy_markdown(s) : loopy_csv(s));
      bool ok = true;
      for (const StructureSummary& row : s.rows) {
        ok = ok && row.converged * 100 >= row.trials * 99 && row.avg_kl <= 5e-4 && row.avg_mae <= 1e-2;
      }
      return ok ? kOk : kCheckFailed;
    }

    if (*tree) {
      const auto records = run_tree_suite(tree_count, seed_of(tree_c), tree_max_vars, tree_c.jobs);
      bool ok = true;
      double worst = 0.0;
      for (const TreeRecord& r : records) {
        ok = ok && r.converged && r.sweeps <= r.diameter + 1 && r.sumproduct_deviation <= tree_tol;
        worst = std::max(worst, r.sumproduct_deviation);
      }
      if (tree_c.format == "md") {
        emit(tree_c, "| Trees | Max deviation | Within tolerance |\n|---|---|---|\n| " +
                         std::to_string(records.size()) + " | " + sci(worst) + " | " +
                         (ok ? "yes" : "no") + " |\n");
      } else {
        emit(tree_c, tree_csv(records));
      }
      return ok ? kOk : kCheckFailed;
    }

    if (*equiv) {
      const AttentionMode mode = equiv_mode == "hard" ? AttentionMode::kHard : AttentionMode::kSoft;
      const auto r = run_equivalence_corpus(equiv_count, seed_of(equiv_c), mode, equiv_beta, equiv_c.jobs);
      std::size_t passed = 0;
      for (double d : r.deviations) passed += d <= equiv_tol ? 1 : 0;
      if (equiv_c.format == "md") {
        std::string t = "| Mode | Beta | Instances | Max deviation | <= 1e-12 | <= 1e-9 | <= 1e-6 | <= tol |\n";
        t += "|---|---|---|---|---|---|---|---|\n";
        t += "| " + equiv_mode + " | " + format_real(equiv_beta) + " | " + std::to_string(equiv_count) +
             " | " + sci(r.max_deviation) + " | " + std::to_string(r.passed[0]) + " | " +
             std::to_string(r.passed[1]) + " | " + std::to_string(r.passed[2]) + " | " +
             std::to_string(passed) + " |\n";
        emit(equiv_c, t);
      } else {
        emit(equiv_c, equivalence_csv(r));
      }
      return passed == equiv_count ? kOk : kCheckFailed;
    }

    if (*conc) {
      const auto corpus = make_corpus(conc_count, seed_of(conc_c));
      const auto curve = run_concentration_curve(conc_betas, corpus);
      std::string out = conc_c.format == "md" ? "| Beta | Max routing error |\n|---|---|\n" : "beta,max_error\n";
      bool ok = true;
      for (std::size_t i = 0; i < curve.size(); ++i) {
        out += conc_c.format == "md"
                   ? "| " + format_real(curve[i].beta) + " | " + sci(curve[i].max_error) + " |\n"
                   : format_real(curve[i].beta) + "," + format_real(curve[i].max_error) + "\n";
        if (i > 0 && curve[i].max_error > curve[i - 1].max_error) ok = false;
      }
      if (!curve.empty() && !(curve.back().max_error < conc_tol)) ok = false;
      emit(conc_c, out);
      return ok ? kOk : kCheckFailed;
    }

    if (*uniq) {
      Rng rng(seed_of(uniq_c));
      const auto grid = default_uniqueness_grid();
      const UniquenessReport r = uniqueness_probe(grid, uniq_samples, rng);
      std::string out = uniq_c.format == "md" ? "| w0 | w1 | b | Max deviation |\n|---|---|---|---|\n"
                                              : "w0,w1,b,max_deviation\n";
      bool ok = true;
      for (const UniquenessPoint& p : r.points) {
        const std::string w0 = format_real(p.params.w0);
        const std::string w1 = format_real(p.params.w1);
        const std::string b = format_real(p.params.b);
        out += uniq_c.format == "md"
                   ? "| " + w0 + " | " + w1 + " | " + b + " | " + sci(p.max_deviation) + " |\n"
                   : w0 + "," + w1 + "," + b + "," + format_real(p.max_deviation) + "\n";
        ok = ok && (p.params == FfnParams::exact_bp() ? p.max_deviation <= 1e-15 : p.max_deviation > 1e-4);
      }
      emit(uniq_c, out);
      return ok ? kOk : kCheckFailed;
    }

    if (*concepts) {
      if (concepts_list) {
        for (const RoutingKey& k : enumerate_routing_keys(concepts_n)) {
          std::cout << (k.node_type == NodeType::kVariable ? "variable" : "factor") << ","
                    << k.own_index << "," << k.nbr_index << "\n";
        }
      }
      std::cout << routing_key_count(concepts_n) << "\n";
      return kOk;
    }

    if (*fsm) {
      const FsmSpec spec = parse_fsm(read_input(fsm_input));
      const std::size_t classes = fsm_behavior_classes(spec);
      const std::uint64_t bound = fsm_class_bound(spec.n_states);
      std::cout << "states " << spec.n_states << "\nsymbols " << spec.symbols.size() << "\nclasses "
                << classes << "\nbound " << bound << "\n";
      return classes <= bound ? kOk : kCheckFailed;
    }

    if (*bin) {
      const AnnotatedGraph annotated = parse_annotated_graph(read_input(bin_input));
      const BinarizedGraph b = binarize_graph(annotated);
      std::string out = serialize(b.graph);
      for (const Gate& g : b.and_gates) {
        out += "# and " + std::to_string(g.output);
        for (std::size_t in : g.inputs) out += " " + std::to_string(in);
        out += "\n";
      }
      Common sink;
      sink.output = bin_output;
      emit(sink, out);
      if (bin_check) {
        const auto before = annotated_marginals(annotated).marginals;
        auto after = binarized_marginals(b).marginals;
        after.resize(b.num_original);
        const double dev = max_abs_error(before, after);
        std::cerr << "max marginal deviation " << sci(dev) << "\n";
        return dev <= 1e-10 ? kOk : kCheckFailed;
      }
      return kOk;
    }

    if (*oracle) {
      if (oracle_batch_n > 0) {
        emit(oracle_c, oracle_batch_csv(oracle_batch(oracle_batch_n, seed_of(oracle_c), oracle_low, oracle_high)));
        return kOk;
      }
      const FactorGraph g = parse_graph(read_input(oracle_input));
      const ExactMarginals m = exact_marginals(g);
      std::string out;
      if (oracle_c.format == "md") {
        out = "| Var | P(x=1) |\n|---|---|\n";
        for (std::size_t v = 0; v < m.marginals.size(); ++v) {
          out += "| " + std::to_string(v) + " | " + format_real(m.marginals[v]) + " |\n";
        }
      } else {
        out = "var,marginal\n";
        for (std::size_t v = 0; v < m.marginals.size(); ++v) {
          out += std::to_string(v) + "," + format_real(m.marginals[v]) + "\n";
        }
      }
      emit(oracle_c, out);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
