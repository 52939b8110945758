// chansim: region membership, constraint-system projection, and protocol
// simulation for two-terminal interactive source schemes, driven by JSON
// scenario files. Exit codes: 0 success, 1 failed assertion or internal
// error, 2 resource budget exceeded, 3 invalid input.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chansim/fixtures.hpp"
#include "chansim/linsys.hpp"
#include "chansim/prob.hpp"
#include "chansim/protocol.hpp"
#include "chansim/region.hpp"
#include "chansim/scenario.hpp"

using namespace chansim;
using njson = nlohmann::ordered_json;

namespace {

struct Globals {
  double tol = 0.0;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  bool tol_set = false, budget_set = false, seed_set = false;
  std::string out;
  std::string format;  // empty: per-command default
};

void apply_overrides(Scenario& s, const Globals& g) {
  if (g.tol_set) s.tol = g.tol;
  if (g.budget_set) s.budget_cells = g.budget;
  if (g.seed_set) s.seed = g.seed;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write output file: " + path);
  f << text;
}

std::string dump(const njson& j) { return j.dump(2) + "\n"; }

int cmd_region(const std::string& path, bool assert_member, const Globals& g) {
  Scenario s = Scenario::load(path);
  apply_overrides(s, g);
  njson doc;
  if (!s.name.empty()) doc["name"] = s.name;
  bool member = false;
  switch (s.kind) {
    case ScenarioKind::Theorem: {
      RegionVerdict v = region_check(s.rates, s.aux, s.mode, s.tol);
      doc["mode"] = mode_name(s.mode);
      doc["verdict"] = v.to_json();
      member = v.member;
      break;
    }
    case ScenarioKind::Wiretap: {
      double rate = wiretap_rate(s.pmf, s.tol);
      doc["mode"] = "wiretap";
      njson v;
      v["rate"] = rate;
      v["positive"] = rate > s.tol;
      doc["verdict"] = std::move(v);
      member = rate > s.tol;
      break;
    }
    case ScenarioKind::SpecialCase: {
      SpecialCaseReport r = special_case(s.pmf, s.which, s.rates.R0, s.tol);
      doc["mode"] = "special-case";
      doc["verdict"] = r.to_json();
      member = r.feasible;
      break;
    }
  }
  emit(dump(doc), g.out);
  return (assert_member && !member) ? 1 : 0;
}

int cmd_fm(const std::string& path, const std::vector<std::string>& keep_arg,
           const Globals& g) {
  Scenario s = Scenario::load(path);
  apply_overrides(s, g);
  if (s.kind != ScenarioKind::Theorem)
    throw std::invalid_argument(
        "fm needs a theorem scenario (mode thm1/thm2/thm3)");
  LinearSystem raw = certification_system(s.aux, s.mode, s.rates.RSK);
  const std::vector<std::string> canonical = kept_rate_vars(s.mode);
  const std::vector<std::string>& keep = keep_arg.empty() ? canonical : keep_arg;
  for (const auto& v : keep)
    if (!raw.has_var(v))
      throw std::invalid_argument("unknown variable to keep: " + v);

  njson doc;
  if (!s.name.empty()) doc["name"] = s.name;
  doc["mode"] = mode_name(s.mode);
  doc["keep"] = keep;
  doc["raw"] = raw.to_json();
  FeasibilityResult fr = raw.feasible(s.row_cap);
  njson feas;
  feas["feasible"] = fr.feasible;
  if (fr.feasible) {
    feas["margin"] = fr.margin;
    feas["witness"] = fr.witness;
  }
  doc["raw_feasibility"] = std::move(feas);
  LinearSystem proj = raw.project(keep, s.row_cap);
  doc["projected"] = proj.to_json();
  if (keep == canonical) {
    LinearSystem thm = theorem_system(s.aux, s.mode, s.rates.RSK);
    doc["theorem"] = thm.to_json();
    EquivalenceResult eq =
        LinearSystem::equivalent(proj, thm, s.tol, s.row_cap);
    njson e;
    e["equivalent"] = eq.equivalent;
    if (!eq.equivalent) {
      e["missing_from"] = eq.missing_from;
      e["failing_label"] = eq.failing_label;
      e["witness"] = eq.witness;
      e["degenerate"] = eq.degenerate;
    }
    doc["equivalence"] = std::move(e);
  }
  emit(dump(doc), g.out);
  return 0;
}

int cmd_simulate(const std::string& path, int n, const std::string& mode,
                 std::uint64_t trials, std::uint64_t stream,
                 const Globals& g) {
  Scenario s = Scenario::load(path);
  apply_overrides(s, g);
  ProtocolInstance inst =
      build(s.aux, n, s.protocol_rates(), s.seed, s.mode, s.budget_cells);
  SimulationReport rep = mode == "mc" ? run_monte_carlo(inst, trials, stream)
                                      : measure(inst, run_exact(inst));
  if (g.format == "json") {
    emit(dump(rep.to_json()), g.out);
  } else {
    emit(SimulationReport::csv_header(s.aux.r) + "\n" + rep.csv_row() + "\n",
         g.out);
  }
  return 0;
}

/// Strictly-decreasing verdicts down the blocklength column, per seed.
std::string trend_summary(const std::vector<SimulationReport>& reps) {
  std::ostringstream os;
  std::vector<std::uint64_t> seeds;
  for (const auto& r : reps) {
    bool known = false;
    for (auto v : seeds) known = known || v == r.seed;
    if (!known) seeds.push_back(r.seed);
  }
  auto column = [&](const SimulationReport& r, std::size_t c) {
    if (c == 0) return r.tv_error;
    if (c <= r.sw_error.size()) return r.sw_error[c - 1];
    return r.n > 0 ? r.key_leak / r.n : r.key_leak;
  };
  const std::size_t ncols = reps.empty() ? 0 : reps.front().sw_error.size() + 2;
  for (auto seed : seeds) {
    for (std::size_t c = 0; c < ncols; ++c) {
      std::string label = c == 0 ? "tv_error"
                          : c <= ncols - 2
                              ? "sw_error_" + std::to_string(c)
                              : "key_leak_per_symbol";
      bool dec = true;
      const SimulationReport* prev = nullptr;
      for (const auto& r : reps) {
        if (r.seed != seed) continue;
        if (prev) dec = dec && column(r, c) < column(*prev, c);
        prev = &r;
      }
      os << "seed " << seed << ": " << label
         << (dec ? " strictly decreasing" : " not strictly decreasing")
         << " in n\n";
    }
  }
  return os.str();
}

int cmd_sweep(const std::string& path, const std::vector<int>& ns,
              std::vector<std::uint64_t> seeds, const std::string& mode,
              std::uint64_t trials, std::uint64_t stream, bool summary,
              const Globals& g) {
  Scenario s = Scenario::load(path);
  apply_overrides(s, g);
  if (ns.empty()) throw std::invalid_argument("sweep needs --n values");
  if (seeds.empty()) seeds.push_back(s.seed);
  std::vector<SimulationReport> reps =
      sweep(s.aux, s.protocol_rates(), s.mode, ns, seeds, mode != "mc",
            trials, stream, s.budget_cells);
  if (g.format == "json") {
    njson arr = njson::array();
    for (const auto& r : reps) arr.push_back(r.to_json());
    emit(dump(arr), g.out);
  } else {
    emit(sweep_csv(reps), g.out);
  }
  if (summary) std::cout << trend_summary(reps);
  return 0;
}

int cmd_fixtures_run(const std::string& name, bool all,
                     const FixtureOverrides& o, const Globals& g) {
  if (all == !name.empty())
    throw std::invalid_argument("fixtures run takes a name or --all");
  if (all) {
    njson arr = njson::array();
    for (const auto& f : fixtures()) arr.push_back(run_fixture(f, o));
    emit(dump(arr), g.out);
  } else {
    emit(dump(run_fixture(fixture(name), o)), g.out);
  }
  return 0;
}

int cmd_fixtures_list(const Globals& g) {
  std::ostringstream os;
  for (const auto& f : fixtures())
    os << f.scenario.name << " - " << f.summary << "\n";
  emit(os.str(), g.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "two-terminal secure source simulation: region verdicts, "
      "constraint projection, and protocol runs from JSON scenarios"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* tol_opt =
      app.add_option("--tol", g.tol, "override the scenario tolerance")
          ->check(CLI::PositiveNumber);
  auto* budget_opt = app.add_option("--budget-cells", g.budget,
                                    "override the enumeration cell budget")
                         ->check(CLI::PositiveNumber);
  auto* seed_opt =
      app.add_option("--seed", g.seed, "override the scenario seed");
  app.add_option("--out", g.out, "write the result to this file");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string scen_path;
  bool assert_member = false;
  auto* reg = app.add_subcommand("region", "rate-region membership verdict");
  reg->add_option("--scenario", scen_path, "scenario file")->required();
  reg->add_flag("--assert-member", assert_member,
                "exit nonzero when the point is outside the region");

  std::string fm_path;
  std::vector<std::string> fm_keep;
  auto* fm = app.add_subcommand(
      "fm", "project the binning constraints onto the wire rates");
  fm->add_option("--scenario", fm_path, "scenario file")->required();
  fm->add_option("--keep", fm_keep,
                 "variables to keep (default: the wire rates)")
      ->delimiter(',');

  std::string sim_path, sim_mode = "exact";
  int sim_n = 0;
  std::uint64_t sim_trials = 100000, sim_stream = 1;
  auto* sim = app.add_subcommand("simulate", "run the protocol at one n");
  sim->add_option("--scenario", sim_path, "scenario file")->required();
  sim->add_option("--n", sim_n, "blocklength")->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--mode", sim_mode, "exact enumeration or sampling")
      ->check(CLI::IsMember({"exact", "mc"}));
  sim->add_option("--trials", sim_trials, "Monte-Carlo trials");
  sim->add_option("--stream", sim_stream, "Monte-Carlo stream index");

  std::string sw_path, sw_mode = "exact";
  std::vector<int> sw_ns;
  std::vector<std::uint64_t> sw_seeds;
  std::uint64_t sw_trials = 100000, sw_stream = 1;
  bool sw_summary = false;
  auto* sw = app.add_subcommand("sweep", "run a blocklength/seed grid");
  sw->add_option("--scenario", sw_path, "scenario file")->required();
  sw->add_option("--n", sw_ns, "blocklengths")->required()->delimiter(',');
  sw->add_option("--seeds", sw_seeds, "seeds (default: the scenario seed)")
      ->delimiter(',');
  sw->add_option("--mode", sw_mode, "exact enumeration or sampling")
      ->check(CLI::IsMember({"exact", "mc"}));
  sw->add_option("--trials", sw_trials, "Monte-Carlo trials");
  sw->add_option("--stream", sw_stream, "Monte-Carlo stream index");
  sw->add_flag("--summary", sw_summary,
               "also print strict-decrease trend verdicts");

  auto* fx = app.add_subcommand("fixtures", "bundled scenario corpus");
  fx->require_subcommand(1);
  auto* fxl = fx->add_subcommand("list", "name and describe every fixture");
  (void)fxl;
  std::string fx_name, fx_mode;
  bool fx_all = false;
  FixtureOverrides fx_over;
  auto* fxr = fx->add_subcommand("run", "evaluate fixtures");
  fxr->add_option("name", fx_name, "fixture name");
  fxr->add_flag("--all", fx_all, "run the whole corpus");
  fxr->add_option("--n", fx_over.n, "run only this blocklength")
      ->check(CLI::PositiveNumber);
  fxr->add_option("--mode", fx_mode, "exact or mc (with --n)")
      ->check(CLI::IsMember({"exact", "mc"}));
  fxr->add_option("--trials", fx_over.trials, "Monte-Carlo trial override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  g.tol_set = tol_opt->count() > 0;
  g.budget_set = budget_opt->count() > 0;
  g.seed_set = seed_opt->count() > 0;
  fx_over.mode = fx_mode;

  try {
    if (app.got_subcommand(reg)) return cmd_region(scen_path, assert_member, g);
    if (app.got_subcommand(fm)) return cmd_fm(fm_path, fm_keep, g);
    if (app.got_subcommand(sim))
      return cmd_simulate(sim_path, sim_n, sim_mode, sim_trials, sim_stream, g);
    if (app.got_subcommand(sw))
      return cmd_sweep(sw_path, sw_ns, sw_seeds, sw_mode, sw_trials, sw_stream,
                       sw_summary, g);
    if (app.got_subcommand(fx)) {
      if (fx->got_subcommand("run")) return cmd_fixtures_run(fx_name, fx_all, fx_over, g);
      return cmd_fixtures_list(g);
    }
    throw std::logic_error("no subcommand dispatched");
  } catch (const BudgetError& e) {
    std::cerr << "resource budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
