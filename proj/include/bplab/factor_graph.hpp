#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bplab/core_math.hpp"
#include "bplab/random.hpp"

namespace bplab {

enum class GraphErrorKind {
  kSelfLoop,
  kIndexOutOfRange,
  kDuplicateEdge,
  kNegativeWeight,
  kAllZeroTable,
  kNonFiniteWeight,
  kDisconnected,
};

class GraphError : public std::invalid_argument {
 public:
  GraphError(GraphErrorKind kind, const std::string& what)
      : std::invalid_argument(what), kind_(kind) {}
  [[nodiscard]] GraphErrorKind kind() const noexcept { return kind_; }

 private:
  GraphErrorKind kind_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t field, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::size_t field_;
};

/// Pairwise factor over (a, b). entries = [f00, f01, f10, f11] where fij is
/// the weight for a = i, b = j.
class FactorTable {
 public:
  FactorTable() = default;
  explicit FactorTable(std::array<double, 4> entries);

  static FactorTable uniform() { return FactorTable({1.0, 1.0, 1.0, 1.0}); }
  static FactorTable equality() { return FactorTable({1.0, 0.0, 0.0, 1.0}); }

  [[nodiscard]] double operator()(int a, int b) const { return entries_[2 * a + b]; }
  [[nodiscard]] const std::array<double, 4>& entries() const noexcept { return entries_; }
  [[nodiscard]] FactorTable transposed() const;

  friend bool operator==(const FactorTable&, const FactorTable&) = default;

 private:
  std::array<double, 4> entries_{1.0, 1.0, 1.0, 1.0};
};

struct Factor {
  std::size_t a = 0;
  std::size_t b = 0;
  FactorTable table;

  friend bool operator==(const Factor&, const Factor&) = default;
};

struct Neighbor {
  std::size_t var = 0;
  std::size_t factor = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Immutable pairwise factor graph over binary variables. At most one factor
/// per unordered variable pair. Each variable's neighbor list is sorted by
/// partner index, which is the canonical order used by the two-slot gather.
class FactorGraph {
 public:
  FactorGraph() = default;

  /// Validates and indexes. Throws GraphError (self-loop, index out of range,
  /// duplicate edge).
  static FactorGraph build(std::size_t num_vars, std::vector<Factor> factors);

  [[nodiscard]] std::size_t num_vars() const noexcept { return num_vars_; }
  [[nodiscard]] std::span<const Factor> factors() const noexcept { return factors_; }
  [[nodiscard]] std::span<const Neighbor> neighbors(std::size_t var) const {
    return adjacency_.at(var);
  }

  friend bool operator==(const FactorGraph& x, const FactorGraph& y) {
    return x.num_vars_ == y.num_vars_ && x.factors_ == y.factors_;
  }

 private:
  std::size_t num_vars_ = 0;
  std::vector<Factor> factors_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

enum class Structure { kTriangle, kSquare, kDating, kTwoLoops, kQbbnChain, kChain2, kRandomTree };

struct StructureKind {
  Structure structure = Structure::kTriangle;
  std::size_t tree_vars = 0;  // RandomTree only

  static StructureKind random_tree(std::size_t n) { return {Structure::kRandomTree, n}; }
};

/// The five loopy structures of the loopy-BP suite, in table order.
inline constexpr std::array<Structure, 5> kLoopyStructures{
    Structure::kTriangle, Structure::kSquare, Structure::kDating, Structure::kTwoLoops,
    Structure::kQbbnChain};

std::string_view structure_name(Structure s);

/// Topology fixed by kind; table entries i.i.d. uniform on [low, high].
FactorGraph generate(StructureKind kind, Rng& rng, double low, double high);

/// Uniformly attached random labelled tree on n variables.
FactorGraph generate_random_tree(std::size_t n, Rng& rng, double low, double high);

/// Random connected graph: a random tree plus up to `extra_edges` chords.
FactorGraph generate_random_graph(std::size_t n, std::size_t extra_edges, Rng& rng, double low,
                                  double high);

[[nodiscard]] bool is_connected(const FactorGraph& g);
[[nodiscard]] bool is_tree(const FactorGraph& g);

/// Longest shortest path in variable hops. Throws GraphError(kDisconnected).
std::size_t diameter(const FactorGraph& g);

/// Independent cycles: |factors| - |vars| + |components|.
std::size_t loop_count(const FactorGraph& g);

/// Text format: `vars N`, then `factor A B f00 f01 f10 f11` lines. `#` starts
/// a comment. Reals use shortest round-trip representation.
std::string serialize(const FactorGraph& g);
FactorGraph parse_graph(std::string_view text);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double x);

/// Helpers shared by the text parsers.
namespace text {
std::vector<std::string_view> split_fields(std::string_view line);
std::string_view strip_comment(std::string_view line);
std::size_t parse_count(std::string_view token, std::size_t line, std::size_t field);
double parse_real(std::string_view token, std::size_t line, std::size_t field);
/// `factor A B f00 f01 f10 f11` without the duplicate-edge check.
Factor parse_factor_record(std::span<const std::string_view> fields, std::size_t line,
                           std::size_t index, std::size_t num_vars);
}  // namespace text

}  // namespace bplab
