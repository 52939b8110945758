#include "chansim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace chansim {

using njson = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& msg) {
  throw std::invalid_argument("scenario: " + msg);
}

/// Rate fields accept numbers or the string "inf" (R12/R21 only).
double parse_rate(const njson& v, const std::string& field, bool allow_inf) {
  if (v.is_string()) {
    if (allow_inf && v.get<std::string>() == "inf")
      return std::numeric_limits<double>::infinity();
    bad(field + " must be a nonnegative number" +
        (allow_inf ? " or \"inf\"" : ""));
  }
  if (!v.is_number()) bad(field + " must be a number");
  double x = v.get<double>();
  if (std::isnan(x) || x < 0.0) bad(field + " must be nonnegative");
  if (!allow_inf && !std::isfinite(x)) bad(field + " must be finite");
  return x;
}

void check_keys(const njson& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      bad("unknown field \"" + item.key() + "\" in " + where);
}

/// Every variable of `p` must be one of `allowed`, and every `required`
/// variable must be present.
void check_vars(const JointPmf& p, const std::set<std::string>& allowed,
                const VarList& required, const std::string& what) {
  for (const auto& a : p.vars())
    if (!allowed.count(a.name))
      bad("variable \"" + a.name + "\" does not belong in a " + what +
          " scenario");
  for (const auto& v : required)
    if (!p.has_var(v)) bad(what + " scenario requires variable " + v);
}

}  // namespace

std::string scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Theorem: return "theorem";
    case ScenarioKind::Wiretap: return "wiretap";
    case ScenarioKind::SpecialCase: return "special-case";
  }
  throw std::logic_error("unreachable");
}

Scenario Scenario::from_json(const njson& j) {
  Scenario s;
  try {
    if (!j.is_object()) bad("top level must be a JSON object");
    check_keys(j,
               {"name", "mode", "case", "r", "joint", "rates", "internal",
                "markov_tol", "tol", "budget_cells", "row_cap", "seed"},
               "scenario");
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    if (!j.contains("mode")) bad("missing \"mode\"");
    const std::string mode_str = j.at("mode").get<std::string>();
    if (mode_str == "wiretap") {
      s.kind = ScenarioKind::Wiretap;
    } else if (mode_str == "special-case") {
      s.kind = ScenarioKind::SpecialCase;
    } else {
      s.kind = ScenarioKind::Theorem;
      s.mode = mode_from_string(mode_str);  // throws on unknown strings
    }

    if (s.kind == ScenarioKind::SpecialCase) {
      if (!j.contains("case")) bad("special-case scenarios need \"case\"");
      s.which = special_case_from_string(j.at("case").get<std::string>());
    } else if (j.contains("case")) {
      bad("\"case\" only belongs in special-case scenarios");
    }

    if (!j.contains("joint")) bad("missing \"joint\"");
    JointPmf joint = JointPmf::from_json(j.at("joint"));

    if (j.contains("rates")) {
      const njson& r = j.at("rates");
      if (!r.is_object()) bad("\"rates\" must be an object");
      check_keys(r, {"R0", "R12", "R21", "RSK"}, "rates");
      if (r.contains("R0")) s.rates.R0 = parse_rate(r.at("R0"), "R0", false);
      if (r.contains("R12")) s.rates.R12 = parse_rate(r.at("R12"), "R12", true);
      if (r.contains("R21")) s.rates.R21 = parse_rate(r.at("R21"), "R21", true);
      if (r.contains("RSK")) s.rates.RSK = parse_rate(r.at("RSK"), "RSK", false);
    }

    if (j.contains("tol")) {
      s.tol = j.at("tol").get<double>();
      if (!(s.tol > 0.0) || !std::isfinite(s.tol)) bad("tol must be positive");
    }
    if (j.contains("budget_cells")) {
      s.budget_cells = j.at("budget_cells").get<std::size_t>();
      if (s.budget_cells == 0) bad("budget_cells must be positive");
    }
    if (j.contains("row_cap")) {
      s.row_cap = j.at("row_cap").get<std::size_t>();
      if (s.row_cap == 0) bad("row_cap must be positive");
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();

    if (s.kind == ScenarioKind::Theorem) {
      if (!j.contains("r")) bad("theorem scenarios need \"r\"");
      const int r = j.at("r").get<int>();
      if (r < 1) bad("r must be at least 1");
      s.aux.r = r;
      s.aux.joint = std::move(joint);
      if (j.contains("markov_tol")) {
        s.aux.markov_tol = j.at("markov_tol").get<double>();
        if (!(s.aux.markov_tol > 0.0)) bad("markov_tol must be positive");
      }
      std::set<std::string> allowed{"X1", "X2", "Z", "S", "Y1", "Y2"};
      VarList required{"X1", "X2"};
      for (int i = 1; i <= r; ++i) {
        allowed.insert("F" + std::to_string(i));
        required.push_back("F" + std::to_string(i));
      }
      check_vars(s.aux.joint, allowed, required, mode_str);
      RegionVerdict chains = validate_aux(s.aux, s.mode);
      if (!chains.member) {
        std::ostringstream os;
        os << "scheme violates chain";
        for (const auto& label : chains.binding) os << " " << label;
        for (const auto& e : chains.slacks)
          if (!chains.binding.empty() && e.label == chains.binding.front())
            os << " (slack " << e.slack << ")";
        bad(os.str());
      }
      if (j.contains("internal")) {
        const njson& in = j.at("internal");
        if (!in.is_object()) bad("\"internal\" must be an object");
        check_keys(in, {"R", "Rt"}, "internal");
        if (!in.contains("R")) bad("internal rates need \"R\"");
        for (const auto& v : in.at("R"))
          s.internal.R.push_back(parse_rate(v, "internal R", false));
        if (in.contains("Rt"))
          for (const auto& v : in.at("Rt"))
            s.internal.Rt.push_back(parse_rate(v, "internal Rt", false));
        else
          s.internal.Rt.assign(static_cast<std::size_t>(r), 0.0);
        if (s.internal.R.size() != static_cast<std::size_t>(r) ||
            s.internal.Rt.size() != static_cast<std::size_t>(r))
          bad("internal rate vectors must have length r");
      }
    } else {
      if (j.contains("r")) bad("\"r\" only belongs in theorem scenarios");
      if (j.contains("internal"))
        bad("\"internal\" only belongs in theorem scenarios");
      if (j.contains("markov_tol"))
        bad("\"markov_tol\" only belongs in theorem scenarios");
      if (s.kind == ScenarioKind::Wiretap) {
        check_vars(joint, {"U", "X", "Y", "Z"}, {"U", "X", "Y"}, "wiretap");
      } else {
        switch (s.which) {
          case SpecialCase::CommonFunction:
            check_vars(joint, {"X1", "X2", "Y"}, {"X1", "X2", "Y"},
                       "common-function");
            break;
          case SpecialCase::OneTerminal:
            check_vars(joint, {"X1", "X2", "Y1"}, {"X1", "X2", "Y1"},
                       "one-terminal");
            break;
          case SpecialCase::FunctionOfFunction:
            check_vars(joint, {"X1", "X2", "Y1", "Y2"},
                       {"X1", "X2", "Y1", "Y2"}, "function-of-function");
            break;
        }
      }
      s.pmf = std::move(joint);
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open file: " + path);
  njson j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad(path + ": " + e.what());
  }
  return from_json(j);
}

njson Scenario::to_json() const {
  njson j;
  if (!name.empty()) j["name"] = name;
  if (kind == ScenarioKind::Theorem)
    j["mode"] = mode_name(mode);
  else
    j["mode"] = kind == ScenarioKind::Wiretap ? "wiretap" : "special-case";
  if (kind == ScenarioKind::SpecialCase) j["case"] = special_case_name(which);
  if (kind == ScenarioKind::Theorem) {
    j["r"] = aux.r;
    j["joint"] = aux.joint.to_json();
    j["markov_tol"] = aux.markov_tol;
  } else {
    j["joint"] = pmf.to_json();
  }
  njson r;
  auto rate_out = [](double x) -> njson {
    if (std::isinf(x)) return "inf";
    return x;
  };
  r["R0"] = rates.R0;
  r["R12"] = rate_out(rates.R12);
  r["R21"] = rate_out(rates.R21);
  r["RSK"] = rates.RSK;
  j["rates"] = std::move(r);
  if (!internal.R.empty()) {
    njson in;
    in["R"] = internal.R;
    in["Rt"] = internal.Rt;
    j["internal"] = std::move(in);
  }
  j["tol"] = tol;
  j["budget_cells"] = budget_cells;
  j["row_cap"] = row_cap;
  j["seed"] = seed;
  return j;
}

ProtocolRates Scenario::protocol_rates() const {
  if (kind != ScenarioKind::Theorem)
    throw std::invalid_argument(
        "scenario: only theorem scenarios can be simulated");
  ProtocolRates pr;
  pr.R0 = rates.R0;
  pr.RSK = rates.RSK;
  if (!internal.R.empty()) {
    pr.R = internal.R;
    pr.Rt = internal.Rt;
    return pr;
  }
  const std::size_t r = static_cast<std::size_t>(aux.r);
  pr.R.assign(r, 0.0);
  pr.Rt.assign(r, 0.0);
  int fwd = 0, bwd = 0;
  for (int i = 1; i <= aux.r; ++i) (parity(i) == 1 ? fwd : bwd) += 1;
  for (int i = 1; i <= aux.r; ++i)
    pr.R[static_cast<std::size_t>(i - 1)] =
        parity(i) == 1 ? rates.R12 / fwd : rates.R21 / bwd;
  return pr;
}

}  // namespace chansim
