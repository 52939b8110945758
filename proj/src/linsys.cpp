#include "chansim/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace chansim {

using njson = nlohmann::ordered_json;

namespace {

// Verdicts resting on margins thinner than this are flagged degenerate.
constexpr double kDegenerateBand = 1e-7;

double rat_to_double(const Rat& r) { return boost::rational_cast<double>(r); }

Rat abs_rat(const Rat& r) { return r < Rat(0) ? -r : r; }

/// True when a zero-coefficient row `0 op constant` holds.
bool constant_row_holds(RowOp op, double c) {
  return op == RowOp::Ge ? c <= 0.0 : c < 0.0;
}

bool row_less(const LinRow& a, const LinRow& b) {
  if (a.coeffs != b.coeffs) return a.coeffs < b.coeffs;
  if (a.op != b.op) return a.op < b.op;
  if (a.constant != b.constant) return a.constant < b.constant;
  return a.label < b.label;
}

/// Deduplicate rows with identical coefficient vectors, keeping the binding
/// (largest) constant — strict beats non-strict on ties — then put the rows
/// in canonical sorted order so downstream output is schedule-independent.
void dedup_rows(std::vector<LinRow>& rows) {
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<LinRow> out;
  for (auto& r : rows) {
    std::string key;
    for (const auto& c : r.coeffs) {
      key += rat_to_string(c);
      key += ',';
    }
    auto [it, fresh] = seen.emplace(key, out.size());
    if (fresh) {
      out.push_back(std::move(r));
      continue;
    }
    LinRow& kept = out[it->second];
    if (r.constant > kept.constant ||
        (r.constant == kept.constant && r.op == RowOp::Gt)) {
      kept = std::move(r);
    }
  }
  std::sort(out.begin(), out.end(), row_less);
  rows = std::move(out);
}

/// Pick the variable whose elimination creates the fewest bound pairings.
std::size_t cheapest_variable(const std::vector<LinRow>& rows,
                              const std::vector<std::size_t>& candidates) {
  std::size_t best = candidates[0];
  long long best_cost = -1;
  for (std::size_t vi : candidates) {
    long long p = 0, n = 0;
    for (const auto& r : rows) {
      if (r.coeffs[vi] > Rat(0))
        ++p;
      else if (r.coeffs[vi] < Rat(0))
        ++n;
    }
    long long cost = p * n;
    if (best_cost == -1 || cost < best_cost) {
      best_cost = cost;
      best = vi;
    }
  }
  return best;
}

}  // namespace

std::string rat_to_string(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rat rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(std::stoll(s));
  return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

LinearSystem::LinearSystem(std::vector<std::string> vars)
    : vars_(std::move(vars)) {
  std::vector<std::string> sorted = vars_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate variable name in system");
}

bool LinearSystem::has_var(const std::string& name) const {
  return std::find(vars_.begin(), vars_.end(), name) != vars_.end();
}

std::size_t LinearSystem::var_index(const std::string& name) const {
  auto it = std::find(vars_.begin(), vars_.end(), name);
  if (it == vars_.end())
    throw std::invalid_argument("unknown system variable: " + name);
  return std::size_t(it - vars_.begin());
}

void LinearSystem::add(const std::string& label,
                       const std::map<std::string, Rat>& coeffs, RowOp op,
                       double constant) {
  LinRow row;
  row.label = label;
  row.coeffs.assign(vars_.size(), Rat(0));
  for (const auto& [name, c] : coeffs) row.coeffs[var_index(name)] = c;
  row.op = op;
  row.constant = constant;
  add_row(std::move(row));
}

void LinearSystem::add_row(LinRow row) {
  if (row.coeffs.size() != vars_.size())
    throw std::invalid_argument("row arity does not match system");
  insert_normalized(std::move(row));
}

void LinearSystem::insert_normalized(LinRow row) {
  Rat maxabs(0);
  for (const auto& c : row.coeffs) maxabs = std::max(maxabs, abs_rat(c));
  if (maxabs == Rat(0)) {
    // Constant row: drop if vacuously true, otherwise flag the contradiction.
    worst_violation_ = std::max(worst_violation_, row.constant);
    if (!constant_row_holds(row.op, row.constant)) contradictory_ = true;
    return;
  }
  if (maxabs != Rat(1)) {
    for (auto& c : row.coeffs) c /= maxabs;
    row.constant /= rat_to_double(maxabs);
  }
  if (row.label.empty()) row.label = "d" + std::to_string(next_derived_++);
  rows_.push_back(std::move(row));
}

void LinearSystem::eliminate(const std::string& var, std::size_t row_cap) {
  std::size_t vi = var_index(var);

  std::vector<LinRow> pos, neg, rest;
  for (auto& r : rows_) {
    if (r.coeffs[vi] > Rat(0))
      pos.push_back(std::move(r));
    else if (r.coeffs[vi] < Rat(0))
      neg.push_back(std::move(r));
    else
      rest.push_back(std::move(r));
  }
  if (rest.size() + pos.size() * neg.size() > row_cap)
    throw BudgetError("elimination exceeds row budget");

  // Scale each bounding row so the pivot coefficient is +-1, then pair.
  auto scale_to_unit = [&](LinRow& r) {
    Rat a = abs_rat(r.coeffs[vi]);
    if (a == Rat(1)) return;
    for (auto& c : r.coeffs) c /= a;
    r.constant /= rat_to_double(a);
  };
  for (auto& r : pos) scale_to_unit(r);
  for (auto& r : neg) scale_to_unit(r);

  // Strip the eliminated slot from the surviving rows and the variable list.
  auto strip = [vi](LinRow& r) { r.coeffs.erase(r.coeffs.begin() + long(vi)); };
  rows_.clear();
  for (auto& r : rest) {
    strip(r);
    rows_.push_back(std::move(r));
  }
  vars_.erase(vars_.begin() + long(vi));

  for (const auto& p : pos) {
    for (const auto& n : neg) {
      LinRow combined;
      combined.coeffs.resize(vars_.size() + 1);
      for (std::size_t i = 0; i < combined.coeffs.size(); ++i)
        combined.coeffs[i] = p.coeffs[i] + n.coeffs[i];
      combined.coeffs.erase(combined.coeffs.begin() + long(vi));
      combined.op =
          (p.op == RowOp::Gt || n.op == RowOp::Gt) ? RowOp::Gt : RowOp::Ge;
      combined.constant = p.constant + n.constant;
      insert_normalized(std::move(combined));
      if (rows_.size() > row_cap)
        throw BudgetError("elimination exceeds row budget");
    }
  }
}

LinearSystem LinearSystem::project(const std::vector<std::string>& keep,
                                   std::size_t row_cap) const {
  for (const auto& name : keep) var_index(name);  // validate

  LinearSystem work = *this;
  while (!work.contradictory_) {
    std::vector<std::size_t> drop;
    for (std::size_t i = 0; i < work.vars_.size(); ++i)
      if (std::find(keep.begin(), keep.end(), work.vars_[i]) == keep.end())
        drop.push_back(i);
    if (drop.empty()) break;
    std::size_t vi = cheapest_variable(work.rows_, drop);
    work.eliminate(work.vars_[vi], row_cap);
    dedup_rows(work.rows_);
  }

  // Re-index rows onto the kept variables in the caller's order.
  LinearSystem out(keep);
  out.contradictory_ = work.contradictory_;
  out.worst_violation_ = work.worst_violation_;
  if (!out.contradictory_) {
    for (auto& r : work.rows_) {
      LinRow slim;
      slim.label = std::move(r.label);
      slim.coeffs.assign(keep.size(), Rat(0));
      for (std::size_t k = 0; k < keep.size(); ++k)
        slim.coeffs[k] = r.coeffs[work.var_index(keep[k])];
      slim.op = r.op;
      slim.constant = r.constant;
      out.insert_normalized(std::move(slim));
    }
    dedup_rows(out.rows_);
    out.remove_redundant(1e-9, row_cap);
  }
  return out;
}

struct FmRunner {
  /// Bounds on the pivot recorded before each elimination, consumed in
  /// reverse for witness back-substitution.
  struct Bound {
    double pivot_coeff;  // nonzero
    std::vector<std::pair<std::string, double>> others;
    double constant;
  };
  struct Step {
    std::string var;
    std::vector<Bound> bounds;
  };

  static FeasibilityResult run(const LinearSystem& input, std::size_t row_cap) {
    LinearSystem work = input;
    std::vector<Step> steps;

    while (!work.contradictory_ && !work.vars_.empty()) {
      std::vector<std::size_t> all(work.vars_.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      std::size_t vi = cheapest_variable(work.rows_, all);

      Step step;
      step.var = work.vars_[vi];
      for (const auto& r : work.rows_) {
        if (r.coeffs[vi] == Rat(0)) continue;
        Bound b;
        b.pivot_coeff = rat_to_double(r.coeffs[vi]);
        b.constant = r.constant;
        for (std::size_t i = 0; i < work.vars_.size(); ++i)
          if (i != vi && r.coeffs[i] != Rat(0))
            b.others.emplace_back(work.vars_[i], rat_to_double(r.coeffs[i]));
        step.bounds.push_back(std::move(b));
      }
      work.eliminate(step.var, row_cap);
      dedup_rows(work.rows_);
      steps.push_back(std::move(step));
    }

    FeasibilityResult res;
    res.margin = work.worst_violation_;
    res.feasible = !work.contradictory_;
    if (!res.feasible) return res;

    // Back-substitute midpoints, last-eliminated variable first.
    std::map<std::string, double> x;
    const double inf = std::numeric_limits<double>::infinity();
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      double lo = -inf, hi = inf;
      for (const auto& b : it->bounds) {
        double rest = 0.0;
        for (const auto& [name, c] : b.others) rest += c * x.at(name);
        double bound = (b.constant - rest) / b.pivot_coeff;
        if (b.pivot_coeff > 0)
          lo = std::max(lo, bound);
        else
          hi = std::min(hi, bound);
      }
      double v;
      if (std::isfinite(lo) && std::isfinite(hi)) {
        v = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        v = lo + 1.0;
        res.unbounded = true;
      } else if (std::isfinite(hi)) {
        v = hi - 1.0;
        res.unbounded = true;
      } else {
        v = 0.0;
        res.unbounded = true;
      }
      x[it->var] = v;
    }
    res.witness = std::move(x);
    return res;
  }
};

FeasibilityResult LinearSystem::feasible(std::size_t row_cap) const {
  if (contradictory_) {
    FeasibilityResult res;
    res.feasible = false;
    res.margin = worst_violation_;
    return res;
  }
  return FmRunner::run(*this, row_cap);
}

ImplicationResult LinearSystem::implies(const std::map<std::string, Rat>& coeffs,
                                        RowOp op, double constant, double tol,
                                        std::size_t row_cap) const {
  // Negate coeffs·x >= c as coeffs·x <= c - tol; the shift absorbs rounding
  // in either direction, so the op distinction dissolves.
  (void)op;
  LinearSystem aug = *this;
  std::map<std::string, Rat> neg;
  for (const auto& [name, c] : coeffs) neg[name] = -c;
  aug.add("negation", neg, RowOp::Ge, tol - constant);
  FeasibilityResult feas = aug.feasible(row_cap);
  ImplicationResult res;
  res.implied = !feas.feasible;
  if (res.implied) {
    // The contradiction's violation includes the tol shift; what exceeds the
    // shift is genuine slack between the polyhedron and the row.
    res.margin = feas.margin - tol;
    res.degenerate = res.margin < kDegenerateBand;
  } else {
    res.witness = std::move(feas.witness);
    res.witness_unbounded = feas.unbounded;
    res.degenerate = feas.margin > -kDegenerateBand;
  }
  return res;
}

std::vector<std::string> LinearSystem::remove_redundant(double tol,
                                                        std::size_t row_cap) {
  std::vector<std::string> removed;
  removal_degenerate_ = false;
  for (std::size_t i = 0; i < rows_.size();) {
    LinearSystem rest(vars_);
    for (std::size_t j = 0; j < rows_.size(); ++j)
      if (j != i) rest.rows_.push_back(rows_[j]);
    std::map<std::string, Rat> coeffs;
    for (std::size_t k = 0; k < vars_.size(); ++k)
      if (rows_[i].coeffs[k] != Rat(0)) coeffs[vars_[k]] = rows_[i].coeffs[k];
    ImplicationResult imp =
        rest.implies(coeffs, rows_[i].op, rows_[i].constant, tol, row_cap);
    if (imp.implied) {
      removal_degenerate_ = removal_degenerate_ || imp.degenerate;
      removed.push_back(rows_[i].label);
      rows_.erase(rows_.begin() + long(i));
    } else {
      ++i;
    }
  }
  return removed;
}

bool LinearSystem::satisfied_by(const std::map<std::string, double>& point,
                                double tol) const {
  if (contradictory_) return false;
  for (const auto& r : rows_) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (r.coeffs[i] == Rat(0)) continue;
      auto it = point.find(vars_[i]);
      double v = it == point.end() ? 0.0 : it->second;
      lhs += rat_to_double(r.coeffs[i]) * v;
    }
    double slack = lhs - r.constant;
    if (r.op == RowOp::Ge ? slack < -tol : slack <= -tol) return false;
  }
  return true;
}

EquivalenceResult LinearSystem::equivalent(const LinearSystem& left,
                                           const LinearSystem& right,
                                           double tol, std::size_t row_cap) {
  // Demand identical variable sets so witnesses are meaningful on both sides.
  std::vector<std::string> lv = left.vars(), rv = right.vars();
  std::sort(lv.begin(), lv.end());
  std::sort(rv.begin(), rv.end());
  if (lv != rv)
    throw std::invalid_argument("equivalence requires matching variable sets");

  EquivalenceResult res;
  if (left.contradictory_ || right.contradictory_) {
    if (left.contradictory_ && right.contradictory_) {
      res.equivalent = true;
      return res;
    }
    const LinearSystem& alive = left.contradictory_ ? right : left;
    FeasibilityResult feas = alive.feasible(row_cap);
    if (!feas.feasible) {  // empty despite no explicit constant contradiction
      res.equivalent = true;
      return res;
    }
    res.equivalent = false;
    res.missing_from = left.contradictory_ ? "left" : "right";
    res.failing_label = "(infeasible)";
    res.witness = std::move(feas.witness);
    res.degenerate = feas.unbounded;
    return res;
  }

  auto check_side = [&](const LinearSystem& base, const LinearSystem& probe,
                        const char* side) {
    for (const auto& r : probe.rows_) {
      std::map<std::string, Rat> coeffs;
      for (std::size_t k = 0; k < probe.vars_.size(); ++k)
        if (r.coeffs[k] != Rat(0)) coeffs[probe.vars_[k]] = r.coeffs[k];
      ImplicationResult imp =
          base.implies(coeffs, RowOp::Ge, r.constant, tol, row_cap);
      if (!imp.implied) {
        res.equivalent = false;
        res.missing_from = side;
        res.failing_label = r.label;
        res.witness = std::move(imp.witness);
        res.degenerate = imp.witness_unbounded;
        return false;
      }
    }
    return true;
  };

  // Rows of the right side must hold throughout the left polyhedron ...
  if (!check_side(left, right, "right")) return res;
  // ... and vice versa.
  if (!check_side(right, left, "left")) return res;
  res.equivalent = true;
  return res;
}

LinearSystem LinearSystem::from_json(const njson& j) {
  std::vector<std::string> vars;
  for (const auto& v : j.at("vars")) vars.push_back(v.get<std::string>());
  LinearSystem s(std::move(vars));
  for (const auto& rj : j.at("rows")) {
    std::map<std::string, Rat> coeffs;
    for (const auto& [name, cv] : rj.at("coeffs").items()) {
      if (cv.is_number_integer())
        coeffs[name] = Rat(cv.get<long long>());
      else if (cv.is_string())
        coeffs[name] = rat_from_string(cv.get<std::string>());
      else
        throw std::invalid_argument("coefficients must be integers or \"p/q\"");
    }
    std::string op = rj.at("op").get<std::string>();
    if (op != ">=" && op != ">")
      throw std::invalid_argument("row op must be \">=\" or \">\"");
    s.add(rj.value("label", ""), coeffs, op == ">=" ? RowOp::Ge : RowOp::Gt,
          rj.at("const").get<double>());
  }
  return s;
}

njson LinearSystem::to_json() const {
  njson j;
  j["vars"] = vars_;
  njson rows = njson::array();
  for (const auto& r : rows_) {
    njson rj;
    rj["label"] = r.label;
    njson coeffs = njson::object();
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (r.coeffs[i] == Rat(0)) continue;
      if (r.coeffs[i].denominator() == 1)
        coeffs[vars_[i]] = r.coeffs[i].numerator();
      else
        coeffs[vars_[i]] = rat_to_string(r.coeffs[i]);
    }
    rj["coeffs"] = std::move(coeffs);
    rj["op"] = r.op == RowOp::Ge ? ">=" : ">";
    rj["const"] = r.constant;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  j["contradictory"] = contradictory_;
  return j;
}

}  // namespace chansim
