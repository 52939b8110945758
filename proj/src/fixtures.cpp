#include "chansim/fixtures.hpp"

#include <functional>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "chansim/prob.hpp"
#include "chansim/protocol.hpp"
#include "chansim/region.hpp"

namespace chansim {

using njson = nlohmann::ordered_json;

namespace {

Alphabet alpha(const std::string& name, std::size_t k) {
  Alphabet a;
  a.name = name;
  for (std::size_t i = 0; i < k; ++i) a.symbols.push_back(std::to_string(i));
  return a;
}

/// X1 uniform bit, X2 equal to X1 flipped with probability `flip`.
JointPmf binary_pair(double flip, const std::string& n1 = "X1",
                     const std::string& n2 = "X2") {
  double d = 0.5 * (1.0 - flip), o = 0.5 * flip;
  return JointPmf({alpha(n1, 2), alpha(n2, 2)}, {d, o, o, d});
}

/// Append a deterministic variable computed from the existing symbols.
JointPmf with_function(
    const JointPmf& p, const std::string& name, std::size_t k,
    const std::function<std::size_t(const std::vector<std::size_t>&)>& fn) {
  std::vector<Alphabet> vars = p.vars();
  vars.push_back(alpha(name, k));
  std::vector<double> table(p.cell_count() * k, 0.0);
  std::vector<std::size_t> sym;
  for (std::size_t cell = 0; cell < p.cell_count(); ++cell) {
    p.decode_cell(cell, sym);
    table[cell * k + fn(sym)] = p.table()[cell];
  }
  return JointPmf(std::move(vars), std::move(table));
}

Channel binary_channel(double flip, const std::string& in,
                       const std::string& out) {
  Channel ch;
  ch.inputs = {alpha(in, 2)};
  ch.outputs = {alpha(out, 2)};
  ch.rows = {1.0 - flip, flip, flip, 1.0 - flip};
  return ch;
}

Fixture make_dsbs_thm1() {
  Fixture f;
  f.scenario.name = "dsbs-thm1";
  f.scenario.kind = ScenarioKind::Theorem;
  f.scenario.mode = Mode::Thm1;
  f.scenario.aux.r = 1;
  f.scenario.aux.joint = with_function(
      binary_pair(0.1), "F1", 2,
      [](const std::vector<std::size_t>& s) { return s[0]; });
  f.scenario.rates.R12 = 0.8;
  f.scenario.seed = 5;
  f.summary =
      "doubly symmetric binary source (flip 0.1), one round revealing X1; "
      "inside the simulation region at R12 = 0.8";
  f.exact_n = {2, 3, 4};
  f.mc_n = 3;
  f.mc_trials = 1000000;
  return f;
}

Fixture make_dsbs_key() {
  Fixture f;
  f.scenario.name = "dsbs-key";
  f.scenario.kind = ScenarioKind::Theorem;
  f.scenario.mode = Mode::Thm3;
  f.scenario.aux.r = 1;
  f.scenario.aux.joint = with_function(
      binary_pair(0.1), "F1", 2,
      [](const std::vector<std::size_t>& s) { return s[0]; });
  f.scenario.rates.R12 = 0.8;
  f.scenario.rates.RSK = 0.15;
  f.scenario.seed = 38;
  f.summary =
      "secret-key agreement from a doubly symmetric binary source "
      "(flip 0.1): one round, key rate 0.15, no eavesdropper side "
      "information";
  f.exact_n = {2, 3, 4, 5, 6};
  f.mc_n = 4;
  f.mc_trials = 1000000;
  return f;
}

Fixture make_wiretap_bsc() {
  Fixture f;
  f.scenario.name = "wiretap-bsc";
  f.scenario.kind = ScenarioKind::Wiretap;
  JointPmf p = binary_pair(0.0, "U", "X");  // U = X, uniform
  p = compose(p, binary_channel(0.1, "X", "Y"));
  p = compose(p, binary_channel(0.3, "X", "Z"));
  f.scenario.pmf = std::move(p);
  f.summary =
      "binary wiretap channel: uniform input, main crossover 0.1, "
      "eavesdropper crossover 0.3; secrecy rate h(0.3) - h(0.1)";
  return f;
}

Fixture make_xor_infeasible() {
  Fixture f;
  f.scenario.name = "xor-infeasible";
  f.scenario.kind = ScenarioKind::SpecialCase;
  f.scenario.which = SpecialCase::CommonFunction;
  f.scenario.pmf = with_function(
      binary_pair(0.5), "Y", 2,
      [](const std::vector<std::size_t>& s) { return s[0] ^ s[1]; });
  f.summary =
      "common function: XOR of independent uniform bits with no preshared "
      "randomness; infeasible since H(Y) = 1 exceeds I(X1;X2) = 0";
  return f;
}

Fixture make_equal_bits() {
  Fixture f;
  f.scenario.name = "equal-bits";
  f.scenario.kind = ScenarioKind::SpecialCase;
  f.scenario.which = SpecialCase::CommonFunction;
  f.scenario.pmf = with_function(
      binary_pair(0.0), "Y", 2,
      [](const std::vector<std::size_t>& s) { return s[0]; });
  f.scenario.rates.R0 = 0.5;
  f.summary =
      "common function: identical uniform bits, computing the bit itself "
      "with preshared rate 0.5; feasible since 1 < 1.5";
  return f;
}

Fixture make_one_terminal_and() {
  Fixture f;
  f.scenario.name = "one-terminal-and";
  f.scenario.kind = ScenarioKind::SpecialCase;
  f.scenario.which = SpecialCase::OneTerminal;
  f.scenario.pmf = with_function(
      binary_pair(0.5), "Y1", 2,
      [](const std::vector<std::size_t>& s) { return s[0] & s[1]; });
  f.scenario.rates.R0 = 0.4;
  f.summary =
      "one-terminal computation: AND of independent uniform bits at "
      "terminal 1 with preshared rate 0.4; feasible since "
      "I(X2;Y1) = h(1/4) - 1/2 < 0.4";
  return f;
}

Fixture make_function_of_function() {
  Fixture f;
  f.scenario.name = "function-of-function";
  f.scenario.kind = ScenarioKind::SpecialCase;
  f.scenario.which = SpecialCase::FunctionOfFunction;
  // X1 = (A,B) two uniform bits, X2 = A, Y1 = A AND B, Y2 = Y1.
  JointPmf p({alpha("X1", 4)}, {0.25, 0.25, 0.25, 0.25});
  p = with_function(p, "X2", 2,
                    [](const std::vector<std::size_t>& s) { return s[0] >> 1; });
  p = with_function(p, "Y1", 2, [](const std::vector<std::size_t>& s) {
    return (s[0] >> 1) & (s[0] & 1);
  });
  p = with_function(p, "Y2", 2,
                    [](const std::vector<std::size_t>& s) { return s[2]; });
  f.scenario.pmf = std::move(p);
  f.summary =
      "terminal 2 computes a function of terminal 1's output: X1 two "
      "uniform bits, X2 their first bit, Y1 their AND, Y2 = Y1; feasible "
      "since I(X2 Y2;Y1) = h(1/4) < I(X1;X2) = 1";
  return f;
}

Fixture make_sk_residual() {
  Fixture f;
  f.scenario.name = "sk-residual";
  f.scenario.kind = ScenarioKind::Theorem;
  f.scenario.mode = Mode::Thm3;
  f.scenario.aux.r = 2;
  JointPmf p = binary_pair(0.05);
  p = with_function(p, "F1", 2,
                    [](const std::vector<std::size_t>& s) { return s[0]; });
  p = with_function(p, "F2", 2,
                    [](const std::vector<std::size_t>& s) { return s[1]; });
  auto eq = [](const std::vector<std::size_t>& s) {
    return std::size_t{s[0] == s[1] ? 1u : 0u};
  };
  p = with_function(p, "Y1", 2, eq);
  p = with_function(p, "Y2", 2, eq);
  p = with_function(p, "S", 2, eq);
  f.scenario.aux.joint = std::move(p);
  f.scenario.rates.R12 = 0.5;
  f.scenario.rates.R21 = 0.5;
  f.scenario.rates.RSK = 0.2;
  f.scenario.seed = 11;
  f.summary =
      "residual key under a protected function: both terminals exchange "
      "their bits (flip 0.05) and compute the equality indicator, which the "
      "key must stay independent of; key rate 0.2 against a maximum of "
      "1 - 2 h(0.05)";
  f.exact_n = {2, 3, 4};
  f.mc_n = 4;
  f.mc_trials = 1000000;
  return f;
}

Fixture make_channel_sim() {
  Fixture f;
  f.scenario.name = "channel-sim";
  f.scenario.kind = ScenarioKind::Theorem;
  f.scenario.mode = Mode::Thm1;
  // Terminal 2 has a constant source and must reproduce a noisy observation
  // of X1: F1 = X1 crosses the link, Y2 flips it with probability 0.18.
  JointPmf p({alpha("X1", 2), alpha("X2", 1)}, {0.5, 0.5});
  p = with_function(p, "F1", 2,
                    [](const std::vector<std::size_t>& s) { return s[0]; });
  p = compose(p, binary_channel(0.18, "F1", "Y2"));
  f.scenario.aux.joint = std::move(p);
  f.scenario.aux.r = 1;
  f.scenario.rates.R12 = 1.1;
  f.scenario.seed = 3;
  f.summary =
      "channel simulation: terminal 2 (constant source) outputs X1 through "
      "a crossover-0.18 flip, described at rate 1.1 bits";
  f.exact_n = {2, 3};
  f.mc_n = 3;
  f.mc_trials = 1000000;
  return f;
}

std::vector<Fixture> make_all() {
  std::vector<Fixture> v;
  v.push_back(make_dsbs_thm1());
  v.push_back(make_dsbs_key());
  v.push_back(make_wiretap_bsc());
  v.push_back(make_xor_infeasible());
  v.push_back(make_equal_bits());
  v.push_back(make_one_terminal_and());
  v.push_back(make_function_of_function());
  v.push_back(make_sk_residual());
  v.push_back(make_channel_sim());
  return v;
}

}  // namespace

const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> all = make_all();
  return all;
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const auto& f : fixtures()) names.push_back(f.scenario.name);
  return names;
}

const Fixture& fixture(const std::string& name) {
  for (const auto& f : fixtures())
    if (f.scenario.name == name) return f;
  throw std::invalid_argument("unknown fixture: " + name);
}

njson run_fixture(const Fixture& f, const FixtureOverrides& o) {
  const Scenario& s = f.scenario;
  njson out;
  out["name"] = s.name;
  out["summary"] = f.summary;
  switch (s.kind) {
    case ScenarioKind::Theorem:
      out["region"] = region_check(s.rates, s.aux, s.mode, s.tol).to_json();
      break;
    case ScenarioKind::Wiretap:
      out["wiretap_rate"] = wiretap_rate(s.pmf, s.tol);
      break;
    case ScenarioKind::SpecialCase:
      out["special_case"] =
          special_case(s.pmf, s.which, s.rates.R0, s.tol).to_json();
      break;
  }

  std::vector<std::pair<int, bool>> runs;  // (n, monte-carlo?)
  if (o.n > 0) {
    if (s.kind != ScenarioKind::Theorem)
      throw std::invalid_argument("fixture " + s.name +
                                  " has no protocol to simulate");
    if (!o.mode.empty() && o.mode != "exact" && o.mode != "mc")
      throw std::invalid_argument("unknown run mode: " + o.mode);
    runs.emplace_back(o.n, o.mode == "mc");
  } else {
    for (int n : f.exact_n) runs.emplace_back(n, false);
    if (f.mc_n > 0) runs.emplace_back(f.mc_n, true);
  }
  if (s.kind != ScenarioKind::Theorem || runs.empty()) return out;

  njson arr = njson::array();
  for (const auto& [n, mc] : runs) {
    ProtocolInstance inst =
        build(s.aux, n, s.protocol_rates(), s.seed, s.mode, s.budget_cells);
    SimulationReport rep =
        mc ? run_monte_carlo(inst, o.trials > 0 ? o.trials : f.mc_trials)
           : measure(inst, run_exact(inst));
    arr.push_back(rep.to_json());
  }
  out["runs"] = std::move(arr);
  return out;
}

}  // namespace chansim
