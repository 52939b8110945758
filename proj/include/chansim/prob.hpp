#pragma once

// Exact finite-alphabet probability engine: dense joint pmfs, channels,
// marginalization/conditioning, entropic functionals (bits), Markov tests,
// total variation, and i.i.d. extension. All operations are pure; values are
// immutable after construction and safe to share across threads.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace chansim {

/// Thrown when an enumeration would exceed the configured cell budget.
/// Callers (notably the CLI) map this onto its own exit status.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default enumeration budget: 2^24 cells.
inline constexpr std::size_t kDefaultCellBudget = std::size_t{1} << 24;

/// A named finite alphabet. Symbol labels are ordered and distinct.
struct Alphabet {
  std::string name;
  std::vector<std::string> symbols;

  std::size_t size() const { return symbols.size(); }
  bool operator==(const Alphabet&) const = default;
};

using VarList = std::vector<std::string>;

/// Dense joint pmf over an ordered list of variables. The table is row-major
/// in the order of `vars`, last variable fastest; this ordering is normative
/// for JSON round trips. Cells are nonnegative and sum to 1 within 1e-12
/// (inputs with drift up to 1e-9 are renormalized, anything worse rejected).
class JointPmf {
 public:
  /// The empty pmf: zero variables, a single cell of mass 1.
  JointPmf();
  JointPmf(std::vector<Alphabet> vars, std::vector<double> table);

  static JointPmf from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;

  const std::vector<Alphabet>& vars() const { return vars_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t cell_count() const { return table_.size(); }

  bool has_var(const std::string& name) const;
  std::size_t var_index(const std::string& name) const;  // throws if unknown

  /// Distance between consecutive values of variable vi in the flat table.
  std::size_t stride(std::size_t vi) const { return strides_[vi]; }

  /// Decompose a flat cell index into per-variable symbol indices.
  void decode_cell(std::size_t cell, std::vector<std::size_t>& out) const;
  /// Inverse of decode_cell.
  std::size_t encode_cell(const std::vector<std::size_t>& sym) const;

 private:
  std::vector<Alphabet> vars_;
  std::vector<double> table_;
  std::vector<std::size_t> strides_;
};

/// Conditional pmf kernel: one row (a pmf over the output cells) per input
/// cell. Rows are row-major over inputs (last input fastest), and each row is
/// row-major over outputs.
struct Channel {
  std::vector<Alphabet> inputs;
  std::vector<Alphabet> outputs;
  std::vector<double> rows;  // size = (Π input sizes) · (Π output sizes)

  std::size_t input_cells() const;
  std::size_t output_cells() const;

  static Channel from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

// ---------------- core operations ----------------

/// Sum out everything not in `keep`; result keeps p's variable order.
JointPmf marginalize(const JointPmf& p, const VarList& keep);

/// Extend p by the channel outputs: cell mass p(cell)·ch(outs|ins).
/// Channel inputs must name variables of p with identical alphabets, and the
/// outputs must be fresh names.
JointPmf compose(const JointPmf& p, const Channel& ch,
                 std::size_t budget = kDefaultCellBudget);

/// Extract the conditional kernel p(outs|given) as a Channel. Rows whose
/// conditioning cell has zero mass are filled uniformly.
Channel condition(const JointPmf& p, const VarList& outs, const VarList& given);

/// H(A|C) in bits; 0·log 0 = 0, zero-mass conditioning cells contribute 0.
double entropy(const JointPmf& p, const VarList& a, const VarList& c = {});

/// I(A;B|C) = H(A|C) − H(A|BC) in bits. May be as low as −1e-12 numerically.
double mutual_info(const JointPmf& p, const VarList& a, const VarList& b,
                   const VarList& c = {});

/// ½ Σ|p−q| over identical variable sets (q's axes are aligned by name).
double total_variation(const JointPmf& p, const JointPmf& q);

struct MarkovResult {
  bool holds;
  double witness;  // I(A;C|B) in bits
};

/// Test the chain A − B − C at tolerance `tol` bits.
MarkovResult is_markov(const JointPmf& p, const VarList& a, const VarList& b,
                       const VarList& c, double tol);

/// Product pmf over n replicas; replica t of variable "V" is named "V#t"
/// (t = 1..n), replicas blocked together in order.
JointPmf iid_extend(const JointPmf& p, int n,
                    std::size_t budget = kDefaultCellBudget);

// ---------------- small helpers shared across modules ----------------

/// Binary entropy h(p) in bits.
double binary_entropy(double p);

/// Format a double with round-trip precision ("%.17g"), locale-independent.
std::string format_double(double v);

}  // namespace chansim
