#pragma once

// Bundled scenario corpus: canonical distributions exercising every command
// (region verdicts, wiretap rate, special cases, exact and Monte-Carlo
// protocol runs). The command-line tool exposes them under `fixtures`, and
// the acceptance suite drives its end-to-end checks through them.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chansim/scenario.hpp"

namespace chansim {

struct Fixture {
  Scenario scenario;
  std::string summary;       // one-line description for `fixtures list`
  std::vector<int> exact_n;  // exact-run blocklengths (empty: verdict only)
  int mc_n = 0;              // Monte-Carlo blocklength (0: no sampled run)
  std::uint64_t mc_trials = 0;
};

/// Name order is the listing order.
const std::vector<Fixture>& fixtures();
std::vector<std::string> fixture_names();
/// Throws std::invalid_argument for unknown names.
const Fixture& fixture(const std::string& name);

struct FixtureOverrides {
  int n = 0;                  // >0: run only this blocklength
  std::string mode;           // "exact" (default) or "mc", with n
  std::uint64_t trials = 0;   // >0: Monte-Carlo trial override
};

/// Evaluate a fixture: the verdict appropriate to its kind, plus protocol
/// runs per its simulation config (or the overrides). Exceptions propagate
/// from the underlying operations (BudgetError, std::invalid_argument).
nlohmann::ordered_json run_fixture(const Fixture& f,
                                   const FixtureOverrides& o = {});

}  // namespace chansim
