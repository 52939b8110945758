#include "chansim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "chansim/prob.hpp"
#include "chansim/region.hpp"
#include "support/generators.hpp"

using namespace chansim;
namespace tg = chansim::testgen;
using njson = nlohmann::ordered_json;

namespace {

njson dsbs_thm1_doc() {
  AuxScheme a = tg::dsbs_identity_scheme(0.1, false);
  njson j;
  j["name"] = "example";
  j["mode"] = "thm1";
  j["r"] = 1;
  j["joint"] = a.joint.to_json();
  j["rates"] = njson{{"R12", 0.8}};
  return j;
}

}  // namespace

TEST_CASE("scenario: theorem document parses with defaults") {
  Scenario s = Scenario::from_json(dsbs_thm1_doc());
  CHECK(s.kind == ScenarioKind::Theorem);
  CHECK(s.mode == Mode::Thm1);
  CHECK(s.name == "example");
  CHECK(s.aux.r == 1);
  CHECK(s.aux.joint.has_var("F1"));
  CHECK(s.rates.R0 == 0.0);
  CHECK(s.rates.R12 == 0.8);
  CHECK(s.rates.RSK == 0.0);
  CHECK(s.tol == 1e-9);
  CHECK(s.budget_cells == kDefaultCellBudget);
  CHECK(s.row_cap == kDefaultRowCap);
  CHECK(s.seed == 1);
  CHECK(s.internal.R.empty());
  CHECK(s.joint().has_var("X2"));
}

TEST_CASE("scenario: JSON round trip is exact") {
  njson j = dsbs_thm1_doc();
  j["rates"] = njson{{"R0", 0.25}, {"R12", "inf"}, {"R21", 0.5}, {"RSK", 0.1}};
  j["internal"] = njson{{"R", {0.9}}, {"Rt", {0.05}}};
  j["tol"] = 1e-8;
  j["budget_cells"] = 1000;
  j["row_cap"] = 500;
  j["seed"] = 42;
  Scenario s = Scenario::from_json(j);
  CHECK(std::isinf(s.rates.R12));
  CHECK(s.rates.R21 == 0.5);
  CHECK(s.internal.R == std::vector<double>{0.9});
  CHECK(s.internal.Rt == std::vector<double>{0.05});
  CHECK(s.seed == 42);
  Scenario s2 = Scenario::from_json(s.to_json());
  CHECK(s.to_json().dump() == s2.to_json().dump());
}

TEST_CASE("scenario: default internal split divides R12 and R21 per sender") {
  std::mt19937_64 rng(7);
  tg::SchemeSpec spec;
  spec.r = 3;
  AuxScheme a = tg::random_scheme(rng, spec);
  njson j;
  j["mode"] = "thm1";
  j["r"] = 3;
  j["joint"] = a.joint.to_json();
  j["rates"] = njson{{"R12", 0.6}, {"R21", 0.4}};
  Scenario s = Scenario::from_json(j);
  ProtocolRates pr = s.protocol_rates();
  REQUIRE(pr.R.size() == 3);
  // Rounds 1 and 3 are terminal 1's, round 2 terminal 2's.
  CHECK(std::abs(pr.R[0] - 0.3) <= 1e-15);
  CHECK(std::abs(pr.R[1] - 0.4) <= 1e-15);
  CHECK(std::abs(pr.R[2] - 0.3) <= 1e-15);
  CHECK(pr.Rt == std::vector<double>(3, 0.0));
  CHECK(pr.R0 == 0.0);

  j["internal"] = njson{{"R", {0.5, 0.6, 0.7}}};
  Scenario s2 = Scenario::from_json(j);
  ProtocolRates pr2 = s2.protocol_rates();
  CHECK(pr2.R == std::vector<double>{0.5, 0.6, 0.7});
  CHECK(pr2.Rt == std::vector<double>(3, 0.0));
}

TEST_CASE("scenario: secrecy modes accept schemes without Z or S") {
  AuxScheme a = tg::dsbs_identity_scheme(0.1, false);
  njson j;
  j["mode"] = "thm3";
  j["r"] = 1;
  j["joint"] = a.joint.to_json();
  j["rates"] = njson{{"R12", 0.8}, {"RSK", 0.15}};
  Scenario s = Scenario::from_json(j);
  CHECK(s.mode == Mode::Thm3);
  CHECK(!s.aux.has("Z"));
  CHECK(!s.aux.has("S"));
}

TEST_CASE("scenario: wiretap and special-case documents") {
  JointPmf u = tg::dsbs(0.0, "U", "X");  // U = X uniform bit
  u = tg::add_function_var(u, tg::make_alphabet("Y", 2),
                           [](const std::vector<std::size_t>& sym) {
                             return sym[1];
                           });
  njson j;
  j["mode"] = "wiretap";
  j["joint"] = u.to_json();
  Scenario w = Scenario::from_json(j);
  CHECK(w.kind == ScenarioKind::Wiretap);
  CHECK(w.pmf.has_var("U"));
  CHECK_THROWS_AS(w.protocol_rates(), std::invalid_argument);

  JointPmf xy = tg::dsbs(0.25);
  xy = tg::add_function_var(xy, tg::make_alphabet("Y", 2),
                            [](const std::vector<std::size_t>& sym) {
                              return sym[0] ^ sym[1];
                            });
  njson c;
  c["mode"] = "special-case";
  c["case"] = "common-function";
  c["joint"] = xy.to_json();
  c["rates"] = njson{{"R0", 0.5}};
  Scenario sc = Scenario::from_json(c);
  CHECK(sc.kind == ScenarioKind::SpecialCase);
  CHECK(sc.which == SpecialCase::CommonFunction);
  CHECK(sc.rates.R0 == 0.5);
  Scenario sc2 = Scenario::from_json(sc.to_json());
  CHECK(sc.to_json().dump() == sc2.to_json().dump());
}

TEST_CASE("scenario: schema violations throw invalid_argument") {
  auto reject = [](njson j) {
    CHECK_THROWS_AS(Scenario::from_json(j), std::invalid_argument);
  };
  njson ok = dsbs_thm1_doc();
  CHECK_NOTHROW(Scenario::from_json(ok));

  njson j = ok;
  j["bogus"] = 1;
  reject(j);

  j = ok;
  j.erase("mode");
  reject(j);

  j = ok;
  j["mode"] = "thm9";
  reject(j);

  j = ok;
  j.erase("r");
  reject(j);

  j = ok;
  j["r"] = 0;
  reject(j);

  j = ok;
  j.erase("joint");
  reject(j);

  j = ok;
  j["case"] = "common-function";  // case outside special-case mode
  reject(j);

  j = ok;
  j["rates"] = njson{{"R12", -0.1}};
  reject(j);

  j = ok;
  j["rates"] = njson{{"R0", "inf"}};  // only R12/R21 may be infinite
  reject(j);

  j = ok;
  j["rates"] = njson{{"R13", 0.2}};
  reject(j);

  j = ok;
  j["internal"] = njson{{"R", {0.5, 0.5}}};  // r = 1
  reject(j);

  j = ok;
  j["internal"] = njson{{"Rt", {0.5}}};  // missing R
  reject(j);

  j = ok;
  j["tol"] = 0.0;
  reject(j);

  j = ok;
  j["r"] = "one";
  reject(j);
}

TEST_CASE("scenario: variable checks per kind") {
  auto reject = [](njson j) {
    CHECK_THROWS_AS(Scenario::from_json(j), std::invalid_argument);
  };
  // Theorem: r = 2 requires F2; stray variables are refused.
  AuxScheme a = tg::dsbs_identity_scheme(0.1, false);
  njson j;
  j["mode"] = "thm1";
  j["r"] = 2;
  j["joint"] = a.joint.to_json();
  reject(j);

  JointPmf stray = tg::add_function_var(
      a.joint, tg::make_alphabet("W", 2),
      [](const std::vector<std::size_t>& sym) { return sym[0]; });
  j["r"] = 1;
  j["joint"] = stray.to_json();
  reject(j);

  // Wiretap needs U, X, Y.
  njson w;
  w["mode"] = "wiretap";
  w["joint"] = tg::dsbs(0.1, "U", "X").to_json();
  reject(w);

  // Special case with the wrong variable set.
  njson c;
  c["mode"] = "special-case";
  c["case"] = "one-terminal";
  c["joint"] = a.joint.to_json();  // has F1, lacks Y1
  reject(c);

  // r / internal / markov_tol only make sense for theorem scenarios.
  njson v;
  v["mode"] = "wiretap";
  JointPmf u = tg::dsbs(0.0, "U", "X");
  u = tg::add_function_var(u, tg::make_alphabet("Y", 2),
                           [](const std::vector<std::size_t>& sym) {
                             return sym[1];
                           });
  v["joint"] = u.to_json();
  v["r"] = 1;
  reject(v);
}

TEST_CASE("scenario: chain violations are rejected at parse time") {
  // F1 copies X2, so F1 -- X1 -- X2 fails decisively for a correlated source.
  JointPmf p = tg::dsbs(0.1);
  p = tg::add_function_var(p, tg::make_alphabet("F1", 2),
                           [](const std::vector<std::size_t>& sym) {
                             return sym[1];
                           });
  njson j;
  j["mode"] = "thm1";
  j["r"] = 1;
  j["joint"] = p.to_json();
  CHECK_THROWS_WITH_AS(Scenario::from_json(j),
                       doctest::Contains("chain"), std::invalid_argument);
}

TEST_CASE("scenario: load reads files and reports parse problems") {
  const std::string good = "scenario_good.json";
  {
    std::ofstream out(good);
    out << dsbs_thm1_doc().dump(2) << "\n";
  }
  Scenario s = Scenario::load(good);
  CHECK(s.rates.R12 == 0.8);
  std::remove(good.c_str());

  const std::string bad = "scenario_bad.json";
  {
    std::ofstream out(bad);
    out << "this is not json\n";
  }
  CHECK_THROWS_AS(Scenario::load(bad), std::invalid_argument);
  std::remove(bad.c_str());

  CHECK_THROWS_AS(Scenario::load("no_such_file.json"), std::invalid_argument);
}
