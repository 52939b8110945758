#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "chansim/linsys.hpp"

using namespace chansim;

namespace {

LinearSystem random_system(std::mt19937_64& rng, std::size_t nvars,
                           std::size_t nrows) {
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < nvars; ++i) vars.push_back("v" + std::to_string(i));
  LinearSystem s(vars);
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_real_distribution<double> cons(-1.0, 1.0);
  for (std::size_t r = 0; r < nrows; ++r) {
    std::map<std::string, Rat> c;
    bool any = false;
    for (const auto& v : vars) {
      int k = coef(rng);
      if (k != 0) {
        c[v] = Rat(k);
        any = true;
      }
    }
    if (!any) c[vars[0]] = Rat(1);
    s.add("r" + std::to_string(r), c, RowOp::Ge, cons(rng));
  }
  return s;
}

std::map<std::string, double> random_point(std::mt19937_64& rng,
                                           const std::vector<std::string>& vars,
                                           double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::map<std::string, double> x;
  for (const auto& v : vars) x[v] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("single elimination: upper bound transfers") {
  // {y >= x, 3 >= y} --eliminate y--> {3 >= x}.
  LinearSystem s({"x", "y"});
  s.add("a", {{"y", Rat(1)}, {"x", Rat(-1)}}, RowOp::Ge, 0.0);  // y - x >= 0
  s.add("b", {{"y", Rat(-1)}}, RowOp::Ge, -3.0);                // -y >= -3
  s.eliminate("y");
  REQUIRE(s.vars() == std::vector<std::string>{"x"});
  REQUIRE(s.rows().size() == 1);
  const LinRow& r = s.rows()[0];
  CHECK(r.coeffs[0] == Rat(-1));  // -x >= -3
  CHECK(std::abs(r.constant - (-3.0)) <= 1e-15);
}

TEST_CASE("single elimination: two-sided combination") {
  // {y >= x, 2 - x >= y} --eliminate y--> x <= 1.
  LinearSystem s({"x", "y"});
  s.add("a", {{"y", Rat(1)}, {"x", Rat(-1)}}, RowOp::Ge, 0.0);   // y >= x
  s.add("b", {{"y", Rat(-1)}, {"x", Rat(-1)}}, RowOp::Ge, -2.0); // 2-x >= y
  s.eliminate("y");
  REQUIRE(s.rows().size() == 1);
  // Combined: -2x >= -2, normalized to -x >= -1.
  CHECK(s.rows()[0].coeffs[0] == Rat(-1));
  CHECK(std::abs(s.rows()[0].constant - (-1.0)) <= 1e-15);
  CHECK(s.satisfied_by({{"x", 0.9}}));
  CHECK_FALSE(s.satisfied_by({{"x", 1.1}}));
}

TEST_CASE("eliminating an unused variable keeps rows") {
  LinearSystem s({"x", "z"});
  s.add("a", {{"x", Rat(1)}}, RowOp::Ge, 0.5);
  s.eliminate("z");
  REQUIRE(s.rows().size() == 1);
  CHECK(s.vars() == std::vector<std::string>{"x"});
  CHECK(s.rows()[0].label == "a");
}

TEST_CASE("strictness propagates through combination") {
  LinearSystem s({"x", "y"});
  s.add("a", {{"y", Rat(1)}, {"x", Rat(-1)}}, RowOp::Gt, 0.0);  // y > x
  s.add("b", {{"y", Rat(-1)}}, RowOp::Ge, -3.0);                // y <= 3
  s.eliminate("y");
  REQUIRE(s.rows().size() == 1);
  CHECK(s.rows()[0].op == RowOp::Gt);  // 3 > x
}

TEST_CASE("vacuous and contradictory constant rows") {
  LinearSystem s({"x"});
  s.add("ok", {}, RowOp::Ge, -1.0);  // 0 >= -1: dropped
  CHECK(s.rows().empty());
  CHECK_FALSE(s.contradictory());
  s.add("bad", {}, RowOp::Ge, 2.0);  // 0 >= 2: contradiction
  CHECK(s.contradictory());
  CHECK_FALSE(s.feasible().feasible);

  LinearSystem t({"x"});
  t.add("edge", {}, RowOp::Gt, 0.0);  // 0 > 0: contradiction
  CHECK(t.contradictory());
}

TEST_CASE("infeasibility detected through elimination") {
  LinearSystem s({"x"});
  s.add("lo", {{"x", Rat(1)}}, RowOp::Ge, 2.0);   // x >= 2
  s.add("hi", {{"x", Rat(-1)}}, RowOp::Ge, -1.0); // x <= 1
  FeasibilityResult f = s.feasible();
  CHECK_FALSE(f.feasible);
  CHECK(f.margin > 0.9);  // 0 >= 1 derived
}

TEST_CASE("feasibility witness satisfies the system") {
  std::mt19937_64 rng(8201);
  int feasible_seen = 0;
  for (int it = 0; it < 40; ++it) {
    LinearSystem s = random_system(rng, 4, 6);
    FeasibilityResult f = s.feasible();
    if (!f.feasible) continue;
    ++feasible_seen;
    CHECK(s.satisfied_by(f.witness, 1e-9));
  }
  CHECK(feasible_seen > 5);  // sanity: the sampler produces feasible systems
}

TEST_CASE("projection soundness and completeness by sampling") {
  std::mt19937_64 rng(8202);
  for (int it = 0; it < 25; ++it) {
    LinearSystem s = random_system(rng, 4, 5);
    std::vector<std::string> keep{"v0", "v1"};
    LinearSystem p = s.project(keep);
    if (p.contradictory()) continue;

    for (int t = 0; t < 60; ++t) {
      auto x = random_point(rng, s.vars(), 3.0);
      // Soundness: full-system points restrict to projection points.
      if (s.satisfied_by(x, 0.0)) {
        std::map<std::string, double> xr{{"v0", x["v0"]}, {"v1", x["v1"]}};
        CHECK(p.satisfied_by(xr, 1e-9));
      }
    }
    for (int t = 0; t < 30; ++t) {
      // Completeness: projection points extend to full-system points.
      auto xr = random_point(rng, keep, 3.0);
      if (!p.satisfied_by(xr, 0.0)) continue;
      LinearSystem pinned = s;
      for (const auto& [name, val] : xr) {
        pinned.add("", {{name, Rat(1)}}, RowOp::Ge, val - 1e-9);
        pinned.add("", {{name, Rat(-1)}}, RowOp::Ge, -val - 1e-9);
      }
      CHECK(pinned.feasible().feasible);
    }
  }
}

TEST_CASE("projection is order-independent up to equivalence") {
  std::mt19937_64 rng(8203);
  for (int it = 0; it < 15; ++it) {
    LinearSystem s = random_system(rng, 5, 6);
    LinearSystem a = s.project({"v0", "v1"});
    // Force a different elimination order by eliminating manually.
    LinearSystem b = s;
    for (const auto& v : {"v4", "v2", "v3"}) b.eliminate(v);
    b = b.project({"v0", "v1"});
    if (a.contradictory() || b.contradictory()) {
      CHECK(a.contradictory() == b.contradictory());
      continue;
    }
    EquivalenceResult eq = LinearSystem::equivalent(a, b, 1e-9);
    CHECK(eq.equivalent);
  }
}

TEST_CASE("redundancy removal: duplicates and dominated rows") {
  LinearSystem s({"x"});
  s.add("a", {{"x", Rat(1)}}, RowOp::Ge, 1.0);
  s.add("b", {{"x", Rat(1)}}, RowOp::Ge, 0.0);  // dominated by a
  auto removed = s.remove_redundant();
  REQUIRE(s.rows().size() == 1);
  CHECK(s.rows()[0].label == "a");
  REQUIRE(removed.size() == 1);
  CHECK(removed[0] == "b");
  CHECK_FALSE(s.removal_degenerate());  // margin 1 is decisive

  LinearSystem t({"x", "y"});
  t.add("a", {{"x", Rat(1)}, {"y", Rat(1)}}, RowOp::Ge, 0.25);
  t.add("dup", {{"x", Rat(1)}, {"y", Rat(1)}}, RowOp::Ge, 0.25);
  t.remove_redundant();
  CHECK(t.rows().size() == 1);
  CHECK(t.removal_degenerate());  // a duplicate is a zero-margin implication
}

TEST_CASE("redundancy removal preserves the feasible set") {
  std::mt19937_64 rng(8204);
  for (int it = 0; it < 15; ++it) {
    LinearSystem s = random_system(rng, 3, 7);
    LinearSystem pruned = s;
    pruned.remove_redundant();
    if (s.contradictory()) continue;
    EquivalenceResult eq = LinearSystem::equivalent(s, pruned, 1e-9);
    CHECK(eq.equivalent);
  }
}

TEST_CASE("equivalence: identical systems and a separating witness") {
  LinearSystem a({"x"});
  a.add("nonneg", {{"x", Rat(1)}}, RowOp::Ge, 0.0);
  LinearSystem b({"x"});
  b.add("atleast1", {{"x", Rat(1)}}, RowOp::Ge, 1.0);

  CHECK(LinearSystem::equivalent(a, a).equivalent);

  EquivalenceResult eq = LinearSystem::equivalent(a, b);
  REQUIRE_FALSE(eq.equivalent);
  CHECK(eq.missing_from == "right");
  CHECK(eq.failing_label == "atleast1");
  // Witness: satisfies a but not b; bounds [0, 1 - tol] give midpoint ~0.5.
  CHECK(std::abs(eq.witness.at("x") - 0.5) <= 1e-6);
  CHECK(a.satisfied_by(eq.witness, 0.0));
  CHECK_FALSE(b.satisfied_by(eq.witness, 1e-12));
}

TEST_CASE("equivalence requires matching variable sets") {
  LinearSystem a({"x"});
  LinearSystem b({"y"});
  CHECK_THROWS_AS(LinearSystem::equivalent(a, b), std::invalid_argument);
}

TEST_CASE("equivalence with one empty side reports a witness") {
  LinearSystem dead({"x"});
  dead.add("c1", {{"x", Rat(1)}}, RowOp::Ge, 1.0);
  dead.add("c2", {{"x", Rat(-1)}}, RowOp::Ge, 0.0);  // x <= 0: empty
  LinearSystem alive({"x"});
  alive.add("c", {{"x", Rat(1)}}, RowOp::Ge, 0.0);
  EquivalenceResult eq = LinearSystem::equivalent(dead, alive);
  REQUIRE_FALSE(eq.equivalent);
  CHECK(alive.satisfied_by(eq.witness, 0.0));
  CHECK_FALSE(dead.satisfied_by(eq.witness, 1e-12));
}

TEST_CASE("row budget triggers BudgetError") {
  // 30 lower and 30 upper bounds on y (with distinct x-couplings) blow up
  // past a 100-row cap when y is eliminated.
  LinearSystem s({"x", "y"});
  for (int i = 0; i < 30; ++i) {
    s.add("", {{"y", Rat(1)}, {"x", Rat(i + 1)}}, RowOp::Ge, 0.0);
    s.add("", {{"y", Rat(-1)}, {"x", Rat(-2 * i - 1)}}, RowOp::Ge, 0.0);
  }
  CHECK_THROWS_AS(s.eliminate("y", 100), BudgetError);
}

TEST_CASE("json round trip preserves rows and rationals") {
  LinearSystem s({"R0", "R1", "Rt1"});
  s.add("rel[1]", {{"R1", Rat(1)}, {"Rt1", Rat(1)}, {"R0", Rat(1)}},
        RowOp::Ge, 0.46899);
  s.add("ind[1]", {{"R0", Rat(-1)}, {"Rt1", Rat(-1)}}, RowOp::Gt, -0.9);
  s.add("half", {{"R1", Rat(1, 2)}, {"R0", Rat(1)}}, RowOp::Ge, 0.1);
  auto j = s.to_json();
  LinearSystem t = LinearSystem::from_json(j);
  CHECK(j.dump() == t.to_json().dump());
  // The fractional coefficient survives as an exact rational.
  bool found = false;
  for (const auto& r : t.rows())
    for (const auto& c : r.coeffs)
      if (c == Rat(1, 2)) found = true;
  CHECK(found);
}

TEST_CASE("project keeps requested variable order and prunes") {
  LinearSystem s({"a", "b", "c"});
  s.add("r1", {{"a", Rat(1)}, {"c", Rat(1)}}, RowOp::Ge, 0.0);
  s.add("r2", {{"b", Rat(1)}}, RowOp::Ge, 1.0);
  s.add("r3", {{"b", Rat(1)}}, RowOp::Ge, 0.5);  // dominated
  LinearSystem p = s.project({"b", "a"});
  CHECK(p.vars() == std::vector<std::string>{"b", "a"});
  // r1 drops with c unbounded below; r3 pruned as redundant.
  REQUIRE(p.rows().size() == 1);
  CHECK(p.rows()[0].label == "r2");
}
