#include "chansim/fixtures.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "chansim/protocol.hpp"
#include "chansim/region.hpp"
#include "chansim/scenario.hpp"

using namespace chansim;
using njson = nlohmann::ordered_json;

namespace {

// Frozen reference constants (17 significant digits).
constexpr double kWiretapGap = 0.4122953056414115;  // h(0.3) - h(0.1)
constexpr double kQuarterGap = 0.3112781244591328;  // h(1/4) - 1/2

}  // namespace

TEST_CASE("fixtures: corpus names and lookup") {
  std::vector<std::string> expected{
      "dsbs-thm1",        "dsbs-key",    "wiretap-bsc",
      "xor-infeasible",   "equal-bits",  "one-terminal-and",
      "function-of-function", "sk-residual", "channel-sim"};
  CHECK(fixture_names() == expected);
  CHECK(fixture("dsbs-key").scenario.mode == Mode::Thm3);
  CHECK_THROWS_AS(fixture("no-such"), std::invalid_argument);
}

TEST_CASE("fixtures: every scenario is a valid document that round-trips") {
  for (const auto& f : fixtures()) {
    CAPTURE(f.scenario.name);
    njson j = f.scenario.to_json();
    Scenario back = Scenario::from_json(j);  // re-validates everything
    CHECK(back.to_json().dump() == j.dump());
  }
}

TEST_CASE("fixtures: verdicts carry the expected closed-form values") {
  njson w = run_fixture(fixture("wiretap-bsc"));
  CHECK(std::abs(w.at("wiretap_rate").get<double>() - kWiretapGap) <= 1e-12);

  njson x = run_fixture(fixture("xor-infeasible"));
  CHECK(x.at("special_case").at("feasible").get<bool>() == false);
  CHECK(std::abs(x.at("special_case").at("lhs").get<double>() - 1.0) <= 1e-12);
  CHECK(std::abs(x.at("special_case").at("rhs").get<double>()) <= 1e-12);

  njson e = run_fixture(fixture("equal-bits"));
  CHECK(e.at("special_case").at("feasible").get<bool>() == true);
  CHECK(std::abs(e.at("special_case").at("rhs").get<double>() - 1.5) <= 1e-12);

  njson o = run_fixture(fixture("one-terminal-and"));
  CHECK(o.at("special_case").at("feasible").get<bool>() == true);
  CHECK(std::abs(o.at("special_case").at("lhs").get<double>() - kQuarterGap) <=
        1e-12);

  njson g = run_fixture(fixture("function-of-function"));
  CHECK(g.at("special_case").at("feasible").get<bool>() == true);
  CHECK(std::abs(g.at("special_case").at("rhs").get<double>() -
                 (kQuarterGap + 0.5)) <= 1e-12);
  // The two reported forms of the condition have identical gaps.
  const njson& sc = g.at("special_case");
  CHECK(std::abs((sc.at("lhs").get<double>() - sc.at("rhs").get<double>()) -
                 (sc.at("alt_lhs").get<double>() -
                  sc.at("alt_rhs").get<double>())) <= 1e-9);
}

TEST_CASE("fixtures: theorem fixtures sit inside their regions") {
  for (const char* name : {"dsbs-thm1", "dsbs-key", "sk-residual",
                           "channel-sim"}) {
    CAPTURE(name);
    const Scenario& s = fixture(name).scenario;
    RegionVerdict v = region_check(s.rates, s.aux, s.mode, s.tol);
    CHECK(v.member);
  }
}

TEST_CASE("fixtures: run_fixture honors overrides and rejects misuse") {
  const Fixture& f = fixture("dsbs-thm1");
  FixtureOverrides o;
  o.n = 2;
  njson out = run_fixture(f, o);
  REQUIRE(out.at("runs").size() == 1);
  CHECK(out.at("runs")[0].at("n").get<int>() == 2);
  CHECK(out.at("runs")[0].at("estimator").get<std::string>() == "exact");

  o.mode = "mc";
  o.trials = 5000;
  out = run_fixture(f, o);
  REQUIRE(out.at("runs").size() == 1);
  CHECK(out.at("runs")[0].at("trials").get<std::uint64_t>() == 5000);

  o.mode = "sideways";
  CHECK_THROWS_AS(run_fixture(f, o), std::invalid_argument);

  FixtureOverrides bad;
  bad.n = 2;
  CHECK_THROWS_AS(run_fixture(fixture("wiretap-bsc"), bad),
                  std::invalid_argument);
}

TEST_CASE("fixtures: frozen key-agreement trend values") {
  const Scenario& s = fixture("dsbs-key").scenario;
  ProtocolInstance inst = build(s.aux, 2, s.protocol_rates(), s.seed, s.mode,
                                s.budget_cells);
  SimulationReport rep = measure(inst, run_exact(inst));
  CHECK(std::abs(rep.tv_error - 0.25) <= 1e-9);
  CHECK(std::abs(rep.sw_error[0] - 0.12) <= 1e-9);
}
