#include "chansim/region.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace chansim {

using njson = nlohmann::ordered_json;

namespace {

constexpr double kIdentityTol = 1e-9;  // internal algebraic cross-checks

VarList cat(VarList a, const VarList& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string xvar(int terminal) { return terminal == 1 ? "X1" : "X2"; }

/// X variable of the terminal that OWNS round i (the sender).
std::string x_own(int i) { return xvar(parity(i)); }
/// X variable of the terminal the round-i message is sent TO.
std::string x_other(int i) { return xvar(parity(i + 1)); }

void require_core_vars(const AuxScheme& a) {
  if (!a.has("X1") || !a.has("X2"))
    throw std::invalid_argument("scheme must contain X1 and X2");
  for (int i = 1; i <= a.r; ++i)
    if (!a.has("F" + std::to_string(i)))
      throw std::invalid_argument("scheme with r=" + std::to_string(a.r) +
                                  " must contain F" + std::to_string(i));
}

/// Key extraction hashes the full transcript; with no rounds there is no
/// transcript to hash, so key mode needs at least one round.
void require_key_rounds(const AuxScheme& a) {
  if (a.r < 1)
    throw std::invalid_argument("key mode requires at least one round");
}

/// Wire/output variables present, in canonical order.
VarList y_present(const AuxScheme& a) { return a.present({"Y1", "Y2"}); }
VarList sz_present(const AuxScheme& a) { return a.present({"S", "Z"}); }
VarList z_present(const AuxScheme& a) { return a.present({"Z"}); }

struct VerdictBuilder {
  double tol;
  RegionVerdict v;

  void row(const std::string& label, double slack, bool strict) {
    v.slacks.push_back({label, slack, strict});
    bool pass = strict ? slack >= tol : slack >= -tol;
    if (!pass) v.member = false;
    if (std::isfinite(slack) && std::abs(slack) <= tol)
      v.binding.push_back(label);
  }
};

/// The four rate inequalities common to all modes. `f1term` is the
/// first-round auxiliary alone — the asymmetric third inequality charges only
/// the opening round against the shared budget, reflecting that terminal 1
/// starts the conversation.
void rate_rows(VerdictBuilder& b, const RatePoint& rates, const AuxScheme& a) {
  VarList f_all = a.f_prefix(a.r);
  VarList f1 = a.f_prefix(std::min(a.r, 1));
  VarList ys = y_present(a);
  const JointPmf& p = a.joint;

  double i1 = mutual_info(p, {"X1"}, f_all, {"X2"});
  double i2 = mutual_info(p, {"X2"}, f_all, {"X1"});
  double open_y = mutual_info(p, f1, ys, {"X1", "X2"});
  double all_y = mutual_info(p, f_all, ys, {"X1", "X2"});

  b.row("eqT1", rates.R12 - i1, false);
  b.row("eqT2", rates.R21 - i2, false);
  b.row("eqT3", rates.R0 + rates.R12 - (i1 + open_y), false);
  b.row("eqT4", rates.R0 + rates.R12 + rates.R21 - (i1 + i2 + all_y), false);
}

/// Key-budget rows: for every communication prefix, what the transcript
/// reveals (plus the correlation still unexploited) must stay below the
/// preshared budget plus the source correlation.
void secrecy_rows(VerdictBuilder& b, const RatePoint& rates,
                  const AuxScheme& a) {
  const JointPmf& p = a.joint;
  VarList sz = sz_present(a);
  double ix = mutual_info(p, {"X1"}, {"X2"});
  for (int i = 1; i <= a.r; ++i) {
    VarList fpre = a.f_prefix(i);
    double lhs = mutual_info(p, fpre, sz) + mutual_info(p, {"X1"}, {"X2"}, fpre);
    b.row("eqSE1[" + std::to_string(i) + "]", rates.R0 + ix - lhs, true);
  }
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Thm1: return "thm1";
    case Mode::Thm2: return "thm2";
    case Mode::Thm3: return "thm3";
  }
  throw std::logic_error("unreachable");
}

Mode mode_from_string(const std::string& s) {
  if (s == "thm1") return Mode::Thm1;
  if (s == "thm2") return Mode::Thm2;
  if (s == "thm3") return Mode::Thm3;
  throw std::invalid_argument("unknown mode: " + s);
}

VarList AuxScheme::f_prefix(int k) const {
  VarList f;
  for (int i = 1; i <= k; ++i) f.push_back("F" + std::to_string(i));
  return f;
}

VarList AuxScheme::present(const VarList& names) const {
  VarList out;
  for (const auto& n : names)
    if (joint.has_var(n)) out.push_back(n);
  return out;
}

int parity(int i) {
  if (i < 1) throw std::invalid_argument("round index must be >= 1");
  return i % 2 == 1 ? 1 : 2;
}

njson RegionVerdict::to_json() const {
  njson j;
  j["member"] = member;
  j["r0_semantics"] = r0_semantics;
  njson rows = njson::array();
  for (const auto& s : slacks) {
    njson rj;
    rj["label"] = s.label;
    rj["slack"] = s.slack;
    rj["strict"] = s.strict;
    rows.push_back(std::move(rj));
  }
  j["slacks"] = std::move(rows);
  j["binding"] = binding;
  return j;
}

RegionVerdict validate_aux(const AuxScheme& a, Mode mode) {
  require_core_vars(a);
  const JointPmf& p = a.joint;
  bool with_z = mode != Mode::Thm1;

  RegionVerdict v;
  v.member = true;
  v.r0_semantics = mode == Mode::Thm1 ? "shared-randomness" : "preshared-key";
  auto chain = [&](const std::string& label, const VarList& left,
                   const VarList& mid, const VarList& right) {
    MarkovResult m = is_markov(p, left, mid, right, a.markov_tol);
    v.slacks.push_back({label, a.markov_tol - m.witness, false});
    if (!m.holds) v.member = false;
  };

  for (int i = 1; i <= a.r; ++i) {
    std::string fi = "F" + std::to_string(i);
    VarList mid = cat(a.f_prefix(i - 1), {x_own(i)});
    VarList right{x_other(i)};
    if (with_z) right = cat(right, z_present(a));
    chain("markov[" + fi + "]", {fi}, mid, right);
  }
  VarList f_all = a.f_prefix(a.r);
  if (a.has("Y1")) {
    VarList right = a.present({"X2", "Y2"});
    if (with_z) right = cat(right, z_present(a));
    chain("markov[Y1]", {"Y1"}, cat(f_all, {"X1"}), right);
  }
  if (a.has("Y2")) {
    VarList right = a.present({"X1", "Y1"});
    if (with_z) right = cat(right, z_present(a));
    chain("markov[Y2]", {"Y2"}, cat(f_all, {"X2"}), right);
  }
  if (with_z && a.has("S"))
    chain("markov[S]", {"S"}, a.present({"X1", "X2", "Y1", "Y2", "Z"}), f_all);
  return v;
}

namespace {

void require_valid(const AuxScheme& a, Mode chain_mode) {
  RegionVerdict v = validate_aux(a, chain_mode);
  if (!v.member) {
    std::string bad;
    for (const auto& s : v.slacks)
      if (s.slack < 0) bad += (bad.empty() ? "" : ", ") + s.label;
    throw std::invalid_argument("scheme violates Markov chains: " + bad);
  }
}

}  // namespace

RegionVerdict theorem1_check(const RatePoint& rates, const AuxScheme& a,
                             double tol) {
  require_valid(a, Mode::Thm1);
  VerdictBuilder b{tol, {}};
  b.v.member = true;
  b.v.r0_semantics = "shared-randomness";
  rate_rows(b, rates, a);
  return b.v;
}

RegionVerdict theorem2_check(const RatePoint& rates, const AuxScheme& a,
                             double tol) {
  require_valid(a, Mode::Thm2);
  VerdictBuilder b{tol, {}};
  b.v.member = true;
  b.v.r0_semantics = "preshared-key";
  rate_rows(b, rates, a);
  secrecy_rows(b, rates, a);
  return b.v;
}

RegionVerdict theorem3_check(const RatePoint& rates, const AuxScheme& a,
                             double tol) {
  require_key_rounds(a);
  require_valid(a, Mode::Thm2);
  VerdictBuilder b{tol, {}};
  b.v.member = true;
  b.v.r0_semantics = "preshared-key";
  rate_rows(b, rates, a);
  secrecy_rows(b, rates, a);
  SecretKeyBound sk = theorem3_max_sk(a, rates.R0, tol);
  b.row("SK1", sk.raw - rates.RSK, true);
  return b.v;
}

RegionVerdict region_check(const RatePoint& rates, const AuxScheme& a,
                           Mode mode, double tol) {
  switch (mode) {
    case Mode::Thm1: return theorem1_check(rates, a, tol);
    case Mode::Thm2: return theorem2_check(rates, a, tol);
    case Mode::Thm3: return theorem3_check(rates, a, tol);
  }
  throw std::logic_error("unreachable");
}

SecretKeyBound theorem3_max_sk(const AuxScheme& a, double R0, double tol) {
  require_key_rounds(a);
  require_valid(a, Mode::Thm2);
  const JointPmf& p = a.joint;
  VarList sz = sz_present(a);
  VarList f_all = a.f_prefix(a.r);

  SecretKeyBound out;
  double ix = mutual_info(p, {"X1"}, {"X2"});
  out.raw = R0 + ix - mutual_info(p, {"X1"}, {"X2"}, f_all) -
            mutual_info(p, f_all, sz);
  out.clipped = std::max(out.raw, 0.0);

  // Round-sum form of the same bound; the agreement of the two forms is an
  // algebraic consequence of the chains and doubles as a self-check.
  double run = R0;
  for (int i = 1; i <= a.r; ++i) {
    VarList fpre = a.f_prefix(i - 1);
    std::string fi = "F" + std::to_string(i);
    run += mutual_info(p, {fi}, {x_other(i)}, fpre) -
           mutual_info(p, {fi}, sz, fpre);
    out.residuals.push_back(run);
    out.residual_ok.push_back(run > tol);

    double closed = R0 + ix - mutual_info(p, {"X1"}, {"X2"}, a.f_prefix(i)) -
                    mutual_info(p, a.f_prefix(i), sz);
    if (std::abs(run - closed) > kIdentityTol)
      throw std::logic_error("prefix key-budget identity violated: " +
                             format_double(std::abs(run - closed)));
  }
  if (std::abs(run - out.raw) > kIdentityTol)
    throw std::logic_error("key bound identity violated: " +
                           format_double(std::abs(run - out.raw)));
  return out;
}

namespace {

/// Chains required by the deferred-start key bound: each round's auxiliary
/// hangs off the sender's source and history, independent of the receiver
/// side and the eavesdropper.
void require_sk_chains(const AuxScheme& a) {
  require_core_vars(a);
  const JointPmf& p = a.joint;
  for (int i = 1; i <= a.r; ++i) {
    std::string fi = "F" + std::to_string(i);
    VarList mid = cat(a.f_prefix(i - 1), {x_own(i)});
    VarList right = cat(VarList{x_other(i)}, z_present(a));
    MarkovResult m = is_markov(p, {fi}, mid, right, a.markov_tol);
    if (!m.holds)
      throw std::invalid_argument("chain violation at " + fi +
                                  ": witness " + format_double(m.witness));
  }
}

double start_sum(const AuxScheme& a, int start) {
  const JointPmf& p = a.joint;
  VarList z = z_present(a);
  double sum = 0.0;
  for (int i = start; i <= a.r; ++i) {
    VarList fpre = a.f_prefix(i - 1);
    std::string fi = "F" + std::to_string(i);
    sum += mutual_info(p, {fi}, {x_other(i)}, fpre) -
           mutual_info(p, {fi}, z, fpre);
  }
  return sum;
}

}  // namespace

double sk_lower_bound(const AuxScheme& a, int start, double) {
  if (start < 1 || start > a.r + 1)
    throw std::invalid_argument("start must lie in [1, r+1]");
  require_sk_chains(a);
  if (start == a.r + 1) return 0.0;  // empty sum; closed form collapses too
  const JointPmf& p = a.joint;
  VarList z = z_present(a);
  double sum = start_sum(a, start);

  // I(F_[1:r];Z|F_[1:start-1]) with the conditioned prefix removed from the
  // first argument (it contributes nothing).
  VarList f_rest;
  for (int i = start; i <= a.r; ++i) f_rest.push_back("F" + std::to_string(i));
  double closed = mutual_info(p, {"X1"}, {"X2"}, a.f_prefix(start - 1)) -
                  mutual_info(p, {"X1"}, {"X2"}, a.f_prefix(a.r)) -
                  mutual_info(p, f_rest, z, a.f_prefix(start - 1));
  if (std::abs(sum - closed) > kIdentityTol)
    throw std::logic_error("deferred-start key identity violated: " +
                           format_double(std::abs(sum - closed)));
  return sum;
}

std::vector<bool> check_ll1(const AuxScheme& a, double tol) {
  require_sk_chains(a);
  const JointPmf& p = a.joint;
  VarList z = z_present(a);
  std::vector<bool> ok;
  double run = 0.0;
  for (int i = 1; i <= a.r; ++i) {
    VarList fpre = a.f_prefix(i - 1);
    std::string fi = "F" + std::to_string(i);
    run += mutual_info(p, {fi}, {x_other(i)}, fpre) -
           mutual_info(p, {fi}, z, fpre);
    ok.push_back(run > tol);
  }
  return ok;
}

std::string special_case_name(SpecialCase c) {
  switch (c) {
    case SpecialCase::CommonFunction: return "common-function";
    case SpecialCase::OneTerminal: return "one-terminal";
    case SpecialCase::FunctionOfFunction: return "function-of-function";
  }
  throw std::logic_error("unreachable");
}

SpecialCase special_case_from_string(const std::string& s) {
  if (s == "common-function") return SpecialCase::CommonFunction;
  if (s == "one-terminal") return SpecialCase::OneTerminal;
  if (s == "function-of-function") return SpecialCase::FunctionOfFunction;
  throw std::invalid_argument("unknown special case: " + s);
}

njson SpecialCaseReport::to_json() const {
  njson j;
  j["case"] = name;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["feasible"] = feasible;
  if (has_alt) {
    j["alt_lhs"] = alt_lhs;
    j["alt_rhs"] = alt_rhs;
  }
  return j;
}

SpecialCaseReport special_case(const JointPmf& p, SpecialCase which, double R0,
                               double tol) {
  SpecialCaseReport rep;
  rep.name = special_case_name(which);
  auto require_deterministic = [&](const std::string& out, const VarList& in) {
    double h = entropy(p, {out}, in);
    if (h > tol)
      throw std::invalid_argument(out + " is not a function of its inputs (H=" +
                                  format_double(h) + ")");
  };
  switch (which) {
    case SpecialCase::CommonFunction:
      // Both terminals compute Y = g(X1,X2); feasible iff the function's
      // entropy stays under the correlation plus the preshared budget.
      require_deterministic("Y", {"X1", "X2"});
      rep.lhs = entropy(p, {"Y"});
      rep.rhs = mutual_info(p, {"X1"}, {"X2"}) + R0;
      rep.feasible = rep.lhs <= rep.rhs - tol;
      break;
    case SpecialCase::OneTerminal:
      // Only terminal 1 computes Y1 = g(X1,X2).
      require_deterministic("Y1", {"X1", "X2"});
      rep.lhs = mutual_info(p, {"X2"}, {"Y1"});
      rep.rhs = mutual_info(p, {"X2"}, {"X1"}) + R0;
      rep.feasible = rep.lhs <= rep.rhs - tol;
      break;
    case SpecialCase::FunctionOfFunction:
      // Terminal 2's output is a function of terminal 1's; protecting Y1
      // itself. Two equivalent forms of the same condition are reported.
      require_deterministic("Y1", {"X1", "X2"});
      require_deterministic("Y2", {"Y1"});
      rep.lhs = mutual_info(p, {"X1"}, {"X2"});
      rep.rhs = mutual_info(p, {"X2", "Y2"}, {"Y1"});
      rep.feasible = rep.rhs <= rep.lhs - tol;
      rep.alt_lhs = entropy(p, {"X1", "X2"}, {"Y1"});
      rep.alt_rhs = entropy(p, {"X2"}, {"X1"}) + entropy(p, {"Y2"}, {"X2"}) +
                    entropy(p, {"X1"}, {"Y1", "X2"});
      rep.has_alt = true;
      break;
  }
  return rep;
}

double wiretap_rate(const JointPmf& p, double tol) {
  for (const char* v : {"U", "X", "Y"})
    if (!p.has_var(v))
      throw std::invalid_argument(std::string("wiretap pmf must contain ") + v);
  VarList yz{"Y"};
  if (p.has_var("Z")) yz.push_back("Z");
  MarkovResult m = is_markov(p, {"U"}, {"X"}, yz, tol);
  if (!m.holds)
    throw std::invalid_argument("chain violation: witness " +
                                format_double(m.witness));
  double rate = mutual_info(p, {"U"}, {"Y"});
  if (p.has_var("Z")) rate -= mutual_info(p, {"U"}, {"Z"});
  return rate;
}

namespace {

struct ConstraintTerms {
  std::vector<double> h_rel;     // per round: decoder-side conditional entropy
  std::vector<double> h_ind;     // per round: sender-side conditional entropy
  std::vector<double> h_indsum;  // per prefix: entropy given sources+outputs
  std::vector<double> h_sec;     // per prefix: entropy given S,Z
};

ConstraintTerms constraint_terms(const AuxScheme& a) {
  const JointPmf& p = a.joint;
  ConstraintTerms t;
  VarList srcs = cat(VarList{"X1", "X2"}, y_present(a));
  VarList sz = sz_present(a);
  for (int i = 1; i <= a.r; ++i) {
    std::string fi = "F" + std::to_string(i);
    VarList fpre = a.f_prefix(i - 1);
    t.h_rel.push_back(entropy(p, {fi}, cat(VarList{x_other(i)}, fpre)));
    t.h_ind.push_back(entropy(p, {fi}, cat(VarList{x_own(i)}, fpre)));
    t.h_indsum.push_back(entropy(p, a.f_prefix(i), srcs));
    t.h_sec.push_back(entropy(p, a.f_prefix(i), sz));
  }
  return t;
}

std::string rvar(int i) { return "R" + std::to_string(i); }
std::string rtvar(int i) { return "Rt" + std::to_string(i); }

}  // namespace

LinearSystem raw_constraints(const AuxScheme& a, Mode mode, double R0,
                             double RSK, bool symbolic_rates) {
  require_core_vars(a);
  if (mode == Mode::Thm3) require_key_rounds(a);
  ConstraintTerms t = constraint_terms(a);

  std::vector<std::string> vars;
  if (symbolic_rates) {
    vars.push_back("R0");
    if (mode == Mode::Thm3) vars.push_back("RSK");
  }
  for (int i = 1; i <= a.r; ++i) vars.push_back(rvar(i));
  for (int i = 1; i <= a.r; ++i) vars.push_back(rtvar(i));
  LinearSystem sys(vars);

  for (int i = 1; i <= a.r; ++i) {
    std::map<std::string, Rat> c{{rvar(i), Rat(1)}, {rtvar(i), Rat(1)}};
    double rhs = t.h_rel[i - 1];
    if (i == 1) {
      if (symbolic_rates)
        c["R0"] = Rat(1);
      else
        rhs -= R0;
    }
    sys.add("rel[" + std::to_string(i) + "]", c, RowOp::Ge, rhs);
  }
  for (int i = 1; i <= a.r; ++i) {
    std::map<std::string, Rat> c{{rtvar(i), Rat(-1)}};
    double rhs = -t.h_ind[i - 1];
    if (i == 1) {
      if (symbolic_rates)
        c["R0"] = Rat(-1);
      else
        rhs += R0;
    }
    sys.add("ind[" + std::to_string(i) + "]", c, RowOp::Gt, rhs);
  }
  for (int i = 1; i <= a.r; ++i) {
    std::map<std::string, Rat> c;
    for (int u = 1; u <= i; ++u) c[rtvar(u)] = Rat(-1);
    sys.add("indsum[" + std::to_string(i) + "]", c, RowOp::Gt,
            -t.h_indsum[i - 1]);
  }
  if (mode != Mode::Thm1) {
    for (int i = 1; i <= a.r; ++i) {
      std::map<std::string, Rat> c;
      for (int u = 1; u <= i; ++u) {
        c[rvar(u)] = Rat(-1);
        c[rtvar(u)] = Rat(-1);
      }
      sys.add("sec[" + std::to_string(i) + "]", c, RowOp::Gt, -t.h_sec[i - 1]);
    }
  }
  if (mode == Mode::Thm3 && a.r >= 1) {
    std::map<std::string, Rat> c;
    for (int u = 1; u <= a.r; ++u) {
      c[rvar(u)] = Rat(-1);
      c[rtvar(u)] = Rat(-1);
    }
    double rhs = -t.h_sec[a.r - 1];
    if (symbolic_rates)
      c["RSK"] = Rat(-1);
    else
      rhs += RSK;
    sys.add("SK1", c, RowOp::Gt, rhs);
  }
  for (int i = 1; i <= a.r; ++i)
    sys.add("nonneg[" + rtvar(i) + "]", {{rtvar(i), Rat(1)}}, RowOp::Ge, 0.0);
  return sys;
}

LinearSystem certification_system(const AuxScheme& a, Mode mode, double RSK) {
  require_core_vars(a);
  if (mode == Mode::Thm3) require_key_rounds(a);
  ConstraintTerms t = constraint_terms(a);

  std::vector<std::string> vars = kept_rate_vars(mode);
  for (int i = 1; i <= a.r; ++i) vars.push_back(rvar(i));
  for (int i = 1; i <= a.r; ++i) vars.push_back(rtvar(i));
  vars.push_back("w");
  LinearSystem sys(vars);

  for (int i = 1; i <= a.r; ++i) {
    std::map<std::string, Rat> c{{rvar(i), Rat(1)}, {rtvar(i), Rat(1)}};
    if (i == 1) c["w"] = Rat(1);
    sys.add("rel[" + std::to_string(i) + "]", c, RowOp::Ge, t.h_rel[i - 1]);
  }
  for (int i = 1; i <= a.r; ++i) {
    std::map<std::string, Rat> c{{rtvar(i), Rat(-1)}};
    if (i == 1) c["w"] = Rat(-1);
    sys.add("ind[" + std::to_string(i) + "]", c, RowOp::Gt, -t.h_ind[i - 1]);
  }
  for (int i = 1; i <= a.r; ++i) {
    std::map<std::string, Rat> c;
    for (int u = 1; u <= i; ++u) c[rtvar(u)] = Rat(-1);
    sys.add("indsum[" + std::to_string(i) + "]", c, RowOp::Gt,
            -t.h_indsum[i - 1]);
  }
  if (mode != Mode::Thm1) {
    for (int i = 1; i <= a.r; ++i) {
      std::map<std::string, Rat> c;
      for (int u = 1; u <= i; ++u) {
        c[rvar(u)] = Rat(-1);
        c[rtvar(u)] = Rat(-1);
      }
      sys.add("sec[" + std::to_string(i) + "]", c, RowOp::Gt, -t.h_sec[i - 1]);
    }
  }
  if (mode == Mode::Thm3) {
    std::map<std::string, Rat> c;
    for (int u = 1; u <= a.r; ++u) {
      c[rvar(u)] = Rat(-1);
      c[rtvar(u)] = Rat(-1);
    }
    sys.add("SK1", c, RowOp::Gt, RSK - t.h_sec[a.r - 1]);
  }

  // Wire budgets: each direction's total must cover its rounds' messages.
  std::map<std::string, Rat> c12{{"R12", Rat(1)}}, c21{{"R21", Rat(1)}};
  for (int i = 1; i <= a.r; ++i)
    (parity(i) == 1 ? c12 : c21)[rvar(i)] = Rat(-1);
  sys.add("budget[R12]", c12, RowOp::Ge, 0.0);
  sys.add("budget[R21]", c21, RowOp::Ge, 0.0);

  // Consumed randomness w: nonnegative, within the available budget.
  sys.add("nonneg[w]", {{"w", Rat(1)}}, RowOp::Ge, 0.0);
  sys.add("wcap", {{"R0", Rat(1)}, {"w", Rat(-1)}}, RowOp::Ge, 0.0);

  for (int i = 1; i <= a.r; ++i) {
    sys.add("nonneg[" + rvar(i) + "]", {{rvar(i), Rat(1)}}, RowOp::Ge, 0.0);
    sys.add("nonneg[" + rtvar(i) + "]", {{rtvar(i), Rat(1)}}, RowOp::Ge, 0.0);
  }
  for (const auto& v : kept_rate_vars(mode))
    sys.add("nonneg[" + v + "]", {{v, Rat(1)}}, RowOp::Ge, 0.0);
  return sys;
}

LinearSystem theorem_system(const AuxScheme& a, Mode mode, double RSK) {
  require_core_vars(a);
  if (mode == Mode::Thm3) require_key_rounds(a);
  const JointPmf& p = a.joint;
  VarList f_all = a.f_prefix(a.r);
  VarList f1 = a.f_prefix(std::min(a.r, 1));
  VarList ys = y_present(a);
  VarList sz = sz_present(a);

  double i1 = mutual_info(p, {"X1"}, f_all, {"X2"});
  double i2 = mutual_info(p, {"X2"}, f_all, {"X1"});
  double open_y = mutual_info(p, f1, ys, {"X1", "X2"});
  double all_y = mutual_info(p, f_all, ys, {"X1", "X2"});
  double ix = mutual_info(p, {"X1"}, {"X2"});

  LinearSystem sys(kept_rate_vars(mode));
  sys.add("eqT1", {{"R12", Rat(1)}}, RowOp::Ge, i1);
  sys.add("eqT2", {{"R21", Rat(1)}}, RowOp::Ge, i2);
  sys.add("eqT3", {{"R0", Rat(1)}, {"R12", Rat(1)}}, RowOp::Ge, i1 + open_y);
  sys.add("eqT4", {{"R0", Rat(1)}, {"R12", Rat(1)}, {"R21", Rat(1)}},
          RowOp::Ge, i1 + i2 + all_y);
  if (mode != Mode::Thm1) {
    for (int i = 1; i <= a.r; ++i) {
      VarList fpre = a.f_prefix(i);
      double lhs =
          mutual_info(p, fpre, sz) + mutual_info(p, {"X1"}, {"X2"}, fpre);
      sys.add("eqSE1[" + std::to_string(i) + "]", {{"R0", Rat(1)}}, RowOp::Gt,
              lhs - ix);
    }
  }
  if (mode == Mode::Thm3) {
    double deficit = mutual_info(p, {"X1"}, {"X2"}, f_all) +
                     mutual_info(p, f_all, sz) - ix;
    sys.add("SK1", {{"R0", Rat(1)}}, RowOp::Gt, RSK + deficit);
  }
  for (const auto& v : kept_rate_vars(mode))
    sys.add("nonneg[" + v + "]", {{v, Rat(1)}}, RowOp::Ge, 0.0);
  return sys;
}

std::vector<std::string> kept_rate_vars(Mode) {
  return {"R0", "R12", "R21"};
}

}  // namespace chansim
