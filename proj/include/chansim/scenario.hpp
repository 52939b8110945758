#pragma once

// Scenario files: a single JSON document that names a joint distribution,
// the operating mode, and rate/tolerance/budget settings, and that drives
// the region, constraint-projection, and simulation commands.

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "chansim/linsys.hpp"
#include "chansim/prob.hpp"
#include "chansim/protocol.hpp"
#include "chansim/region.hpp"

namespace chansim {

/// What the scenario describes: an interactive scheme checked against one of
/// the three theorem regions (and runnable by the protocol), a one-shot
/// wiretap distribution, or one of the named reduced special cases.
enum class ScenarioKind { Theorem, Wiretap, SpecialCase };

std::string scenario_kind_name(ScenarioKind k);

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::Theorem;
  Mode mode = Mode::Thm1;                           // Theorem kind
  SpecialCase which = SpecialCase::CommonFunction;  // SpecialCase kind
  AuxScheme aux;   // Theorem kind: joint over X1,X2[,Z],F1..Fr[,Y1,Y2,S]
  JointPmf pmf;    // Wiretap kind: U,X,Y[,Z]; SpecialCase kind: per case
  RatePoint rates;
  InternalRates internal;  // empty R = derive the default per-round split
  double tol = 1e-9;
  std::size_t budget_cells = kDefaultCellBudget;
  std::size_t row_cap = kDefaultRowCap;
  std::uint64_t seed = 1;

  /// The joint distribution regardless of kind.
  const JointPmf& joint() const {
    return kind == ScenarioKind::Theorem ? aux.joint : pmf;
  }

  /// Parse and validate. Throws std::invalid_argument naming the offending
  /// field on any schema or consistency problem (unknown keys, missing or
  /// ill-typed fields, unknown variables, negative rates, internal rate
  /// vectors of the wrong length, Markov-chain violations).
  static Scenario from_json(const nlohmann::ordered_json& j);

  /// Read a scenario file; file and JSON parse problems also surface as
  /// std::invalid_argument.
  static Scenario load(const std::string& path);

  /// Canonical form; from_json(to_json()) reproduces the scenario.
  nlohmann::ordered_json to_json() const;

  /// Per-round rates for the protocol: the explicit internal override if
  /// given, otherwise R12 split evenly over terminal-1 rounds and R21 over
  /// terminal-2 rounds, with zero per-round shared-randomness rates.
  /// Throws std::invalid_argument for non-Theorem kinds.
  ProtocolRates protocol_rates() const;
};

}  // namespace chansim
