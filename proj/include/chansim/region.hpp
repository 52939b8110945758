#pragma once

// Rate-region machinery for two-terminal interactive channel simulation with
// shared randomness, secrecy against an eavesdropper, and simultaneous
// secret-key extraction: auxiliary-scheme validation, membership checks with
// per-inequality slack reports, secret-key bounds, named special cases, and
// construction of the raw per-round binning constraint systems together with
// the closed-form region systems they project onto.

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chansim/linsys.hpp"
#include "chansim/prob.hpp"

namespace chansim {

enum class Mode { Thm1, Thm2, Thm3 };

std::string mode_name(Mode m);
Mode mode_from_string(const std::string& s);

/// An r-round auxiliary scheme: a joint pmf over the sources X1, X2, the
/// simulated outputs Y1, Y2 (either may be absent), the eavesdropper side
/// information Z and the protected variable S (absent means constant), and
/// the per-round auxiliaries F1..Fr. Fixed variable names are normative.
struct AuxScheme {
  int r = 0;
  JointPmf joint;
  double markov_tol = 1e-9;

  bool has(const std::string& name) const { return joint.has_var(name); }
  /// {"F1",...,"Fk"} for k <= r (k <= 0 gives the empty list).
  VarList f_prefix(int k) const;
  /// The subset of `names` present in the joint.
  VarList present(const VarList& names) const;
};

/// Nonnegative target rates in bits per source symbol. R12/R21 may carry the
/// infinity sentinel for the uncharged-communication special cases.
struct RatePoint {
  double R0 = 0.0;
  double R12 = 0.0;
  double R21 = 0.0;
  double RSK = 0.0;
};

/// Per-round message and binning rates (R_i, Rt_i), bits per symbol.
struct InternalRates {
  std::vector<double> R;
  std::vector<double> Rt;
};

struct SlackEntry {
  std::string label;
  double slack;  // satisfaction margin in bits (>= -tol passes; strict rows
                 // need >= +tol)
  bool strict;
};

struct RegionVerdict {
  bool member = false;
  std::vector<SlackEntry> slacks;
  std::vector<std::string> binding;  // labels with |slack| <= tol
  /// Which operational meaning R0 carried: "shared-randomness" for plain
  /// simulation, "preshared-key" for the secrecy modes.
  std::string r0_semantics;

  nlohmann::ordered_json to_json() const;
};

/// Terminal owning round i: 1 for odd i, 2 for even i.
int parity(int i);

/// Check the scheme's Markov chains for the chosen mode; slack entries carry
/// markov_tol minus the conditional-MI witness per chain.
RegionVerdict validate_aux(const AuxScheme& a, Mode mode);

/// Membership in the plain simulation region (four rate inequalities).
RegionVerdict theorem1_check(const RatePoint& rates, const AuxScheme& a,
                             double tol = 1e-9);

/// Membership with secrecy: the four rate inequalities plus the per-prefix
/// key-budget conditions (strict).
RegionVerdict theorem2_check(const RatePoint& rates, const AuxScheme& a,
                             double tol = 1e-9);

/// Membership with secrecy and a simultaneously extracted key of rate RSK.
RegionVerdict theorem3_check(const RatePoint& rates, const AuxScheme& a,
                             double tol = 1e-9);

/// Dispatch on mode.
RegionVerdict region_check(const RatePoint& rates, const AuxScheme& a,
                           Mode mode, double tol = 1e-9);

struct SecretKeyBound {
  double raw = 0.0;      // R0 + I(X1;X2) - I(X1;X2|F_[1:r]) - I(F_[1:r];ZS)
  double clipped = 0.0;  // max(raw, 0)
  /// Residual budget after each prefix a' in [1:r]:
  /// R0 + sum_{i<=a'} (I(F_i;X_other(i)|F_[1:i-1]) - I(F_i;ZS|F_[1:i-1])).
  std::vector<double> residuals;
  std::vector<bool> residual_ok;  // residual > 0 strictly (at tol)
};

/// Largest simultaneously extractable key rate for the scheme, with the
/// per-prefix residual conditions. The round-sum and closed forms of the
/// bound are cross-checked internally at 1e-9.
SecretKeyBound theorem3_max_sk(const AuxScheme& a, double R0,
                               double tol = 1e-9);

/// Key rate achievable when extraction starts at round `start` (Z only, no
/// S): sum over i in [start:r] of I(F_i;X_other(i)|F_[1:i-1]) minus
/// I(F_i;Z|F_[1:i-1]). Asserts agreement with the closed form
/// I(X1;X2|F_[1:start-1]) - I(X1;X2|F_[1:r]) - I(F_[1:r];Z|F_[1:start-1])
/// within 1e-9. Requires the chains F_i - F_[1:i-1]X_own(i) - Z X_other(i).
double sk_lower_bound(const AuxScheme& a, int start, double tol = 1e-9);

/// For each prefix a' in [1:r], whether starting at round 1 beats every
/// deferred start: the prefix sums stay strictly positive.
std::vector<bool> check_ll1(const AuxScheme& a, double tol = 1e-9);

enum class SpecialCase { CommonFunction, OneTerminal, FunctionOfFunction };

std::string special_case_name(SpecialCase c);
SpecialCase special_case_from_string(const std::string& s);

struct SpecialCaseReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool feasible = false;
  /// Secondary form of the same condition (entropy form for the
  /// function-of-a-function case; zero otherwise).
  double alt_lhs = 0.0;
  double alt_rhs = 0.0;
  bool has_alt = false;

  nlohmann::ordered_json to_json() const;
};

/// Evaluate one of the named reduced feasibility conditions directly from a
/// source pmf. Structural preconditions (determinism of the computed
/// function) are verified and violations throw.
SpecialCaseReport special_case(const JointPmf& p, SpecialCase which, double R0,
                               double tol = 1e-9);

/// One-shot key rate I(U;Y) - I(U;Z) for a pmf over U,X,Y and optional Z;
/// requires U - X - (Y,Z). May be negative (caller clips).
double wiretap_rate(const JointPmf& p, double tol = 1e-9);

/// The per-round binning constraint lists, verbatim: reliability rows,
/// independence rows (strict), prefix secrecy rows in the secrecy modes, the
/// key row in key mode, and nonnegativity of the binning rates Rt_i.
/// Variables are {R1..Rr, Rt1..Rtr}; R0 (and RSK in key mode) appear as
/// system variables when `symbolic_rates`, otherwise fold into constants.
LinearSystem raw_constraints(const AuxScheme& a, Mode mode, double R0,
                             double RSK, bool symbolic_rates);

/// The raw lists prepared for projection onto the wire rates: the consumed
/// randomness becomes a budget variable w with 0 <= w <= R0 (spending less
/// than the available randomness is always allowed), total-rate budget rows
/// R12 >= sum of odd-round rates and R21 >= sum of even-round rates link the
/// wire rates, and every rate variable gets a nonnegativity row. Projecting
/// onto {R0,R12,R21} yields the closed-form region. The key rate is a fixed
/// target, folded into the key row's constant: the raw lists cap any
/// symbolic key rate by the transcript entropy given (S,Z), so the key
/// claim is parametric in RSK rather than a region over it.
LinearSystem certification_system(const AuxScheme& a, Mode mode,
                                  double RSK = 0.0);

/// The closed-form region system over {R0,R12,R21} with per-inequality
/// labels, including nonnegativity rows. In key mode the key row reads
/// R0 > RSK + I(X1;X2|F_[1:r]) + I(F_[1:r];ZS) - I(X1;X2) for the given
/// key-rate target.
LinearSystem theorem_system(const AuxScheme& a, Mode mode, double RSK = 0.0);

/// The variables kept by the certification projection: {"R0","R12","R21"}.
std::vector<std::string> kept_rate_vars(Mode mode);

}  // namespace chansim
