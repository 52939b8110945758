#pragma once

// Systems of linear inequalities over named variables with exact rational
// coefficients and floating-point constants, plus Fourier–Motzkin
// elimination, projection, redundancy removal, feasibility with witness
// extraction, and polyhedral equivalence at a tolerance.

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json_fwd.hpp>

#include "chansim/prob.hpp"  // BudgetError

namespace chansim {

using Rat = boost::rational<long long>;

enum class RowOp { Ge, Gt };  // coeffs·x >= const, coeffs·x > const

struct LinRow {
  std::string label;
  std::vector<Rat> coeffs;  // aligned with LinearSystem::vars()
  RowOp op = RowOp::Ge;
  double constant = 0.0;
};

struct FeasibilityResult {
  bool feasible = false;
  /// Satisfying assignment when feasible (midpoint back-substitution).
  std::map<std::string, double> witness;
  /// Largest violation among derived constant rows (positive means a
  /// contradiction was found; values near zero mean a knife-edge verdict).
  double margin = -std::numeric_limits<double>::infinity();
  /// Witness construction ran along a direction with no finite bound.
  bool unbounded = false;
};

struct ImplicationResult {
  bool implied = false;
  /// Margin by which the implication holds beyond the requested tolerance
  /// (meaningful when implied); below 1e-7 the verdict is numerically thin.
  double margin = 0.0;
  bool degenerate = false;
  /// When not implied: a point satisfying the system but violating the row.
  std::map<std::string, double> witness;
  bool witness_unbounded = false;
};

struct EquivalenceResult {
  bool equivalent = false;
  /// When not equivalent: which side owns the unimplied row ("left"/"right"),
  /// its label, and a separating point.
  std::string missing_from;
  std::string failing_label;
  std::map<std::string, double> witness;
  /// The separating point lay along an unbounded direction.
  bool degenerate = false;
};

inline constexpr std::size_t kDefaultRowCap = 100000;

class LinearSystem {
 public:
  LinearSystem() = default;
  explicit LinearSystem(std::vector<std::string> vars);

  const std::vector<std::string>& vars() const { return vars_; }
  const std::vector<LinRow>& rows() const { return rows_; }
  /// Set when an all-zero-coefficient row with an unsatisfiable constant was
  /// inserted or derived; such rows are flagged, never silently kept.
  bool contradictory() const { return contradictory_; }

  bool has_var(const std::string& name) const;
  std::size_t var_index(const std::string& name) const;  // throws if unknown

  /// Insert a row given sparse coefficients (unknown names throw). The row is
  /// normalized; vacuously true constant rows are dropped.
  void add(const std::string& label, const std::map<std::string, Rat>& coeffs,
           RowOp op, double constant);
  /// Insert a pre-aligned row (same normalization and dropping rules).
  void add_row(LinRow row);

  /// One Fourier–Motzkin step: pair every lower bound on `var` with every
  /// upper bound, copy uninvolved rows, and drop `var` from the variable
  /// list. Throws BudgetError past `row_cap` rows.
  void eliminate(const std::string& var, std::size_t row_cap = kDefaultRowCap);

  /// Eliminate everything outside `keep` (fewest bound pairings first),
  /// deduplicate between steps, and prune redundant rows from the result.
  /// Result variables follow `keep`'s order; rows end in canonical order.
  LinearSystem project(const std::vector<std::string>& keep,
                       std::size_t row_cap = kDefaultRowCap) const;

  /// Full elimination; returns verdict, margin, and a witness when feasible.
  FeasibilityResult feasible(std::size_t row_cap = kDefaultRowCap) const;

  /// Does every point of the system satisfy coeffs·x op const? Decided by
  /// testing the tol-shifted negation for feasibility (closure semantics:
  /// the shift subsumes the strict/non-strict distinction).
  ImplicationResult implies(const std::map<std::string, Rat>& coeffs, RowOp op,
                            double constant, double tol = 1e-9,
                            std::size_t row_cap = kDefaultRowCap) const;

  /// Drop every row implied by the others (tolerance as in implies());
  /// returns the dropped labels. removal_degenerate() reports whether any
  /// drop rested on an implication margin below 1e-7.
  std::vector<std::string> remove_redundant(double tol = 1e-9,
                                            std::size_t row_cap = kDefaultRowCap);
  bool removal_degenerate() const { return removal_degenerate_; }

  /// Evaluate all rows at a point; strict ops honored exactly, non-strict
  /// ones at slack >= -tol. Missing point entries default to 0.
  bool satisfied_by(const std::map<std::string, double>& point,
                    double tol = 1e-9) const;

  /// Same solution sets up to closure (strictness ignored) at tolerance.
  /// Both systems must carry identical variable sets (any order).
  static EquivalenceResult equivalent(const LinearSystem& left,
                                      const LinearSystem& right,
                                      double tol = 1e-9,
                                      std::size_t row_cap = kDefaultRowCap);

  static LinearSystem from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;

 private:
  void insert_normalized(LinRow row);

  std::vector<std::string> vars_;
  std::vector<LinRow> rows_;
  bool contradictory_ = false;
  bool removal_degenerate_ = false;
  /// Worst constant-row violation seen (margin bookkeeping).
  double worst_violation_ = -std::numeric_limits<double>::infinity();
  std::size_t next_derived_ = 0;

  friend struct FmRunner;
};

/// Render a rational as "p" or "p/q".
std::string rat_to_string(const Rat& r);
/// Parse "p" or "p/q".
Rat rat_from_string(const std::string& s);

}  // namespace chansim
