#include "chansim/prob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace chansim {

using njson = nlohmann::ordered_json;

namespace {

constexpr double kMassTol = 1e-12;    // accepted as normalized
constexpr double kRenormTol = 1e-9;   // renormalized below this drift

std::size_t checked_product(const std::vector<Alphabet>& vars,
                            std::size_t budget) {
  std::size_t n = 1;
  for (const auto& a : vars) {
    if (a.symbols.empty()) throw std::invalid_argument("empty alphabet: " + a.name);
    if (a.size() > budget || n > budget / a.size())
      throw BudgetError("cell count exceeds enumeration budget");
    n *= a.size();
  }
  return n;
}

void check_alphabets(const std::vector<Alphabet>& vars) {
  std::unordered_set<std::string> names;
  for (const auto& a : vars) {
    if (!names.insert(a.name).second)
      throw std::invalid_argument("duplicate variable name: " + a.name);
    std::unordered_set<std::string> syms;
    for (const auto& s : a.symbols)
      if (!syms.insert(s).second)
        throw std::invalid_argument("duplicate symbol in alphabet " + a.name);
  }
}

double neg_sum_plogp(const std::vector<double>& t) {
  double h = 0.0;
  for (double v : t)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

std::vector<Alphabet> parse_alphabets(const njson& arr, const char* what) {
  if (!arr.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  std::vector<Alphabet> vars;
  for (const auto& v : arr) {
    Alphabet a;
    a.name = v.at("name").get<std::string>();
    for (const auto& s : v.at("symbols")) a.symbols.push_back(s.get<std::string>());
    vars.push_back(std::move(a));
  }
  return vars;
}

njson alphabets_to_json(const std::vector<Alphabet>& vars) {
  njson arr = njson::array();
  for (const auto& a : vars) {
    njson v;
    v["name"] = a.name;
    v["symbols"] = a.symbols;
    arr.push_back(std::move(v));
  }
  return arr;
}

}  // namespace

JointPmf::JointPmf() : table_{1.0} {}

JointPmf::JointPmf(std::vector<Alphabet> vars, std::vector<double> table)
    : vars_(std::move(vars)), table_(std::move(table)) {
  check_alphabets(vars_);
  std::size_t cells = checked_product(vars_, kDefaultCellBudget);
  if (table_.size() != cells)
    throw std::invalid_argument("table size " + std::to_string(table_.size()) +
                                " != cell count " + std::to_string(cells));
  double mass = 0.0;
  for (double v : table_) {
    if (!(v >= 0.0))  // also rejects NaN
      throw std::invalid_argument("negative or non-finite probability cell");
    mass += v;
  }
  double drift = std::abs(mass - 1.0);
  if (drift > kRenormTol)
    throw std::invalid_argument("pmf mass " + format_double(mass) +
                                " too far from 1");
  if (drift > kMassTol)
    for (double& v : table_) v /= mass;

  strides_.assign(vars_.size(), 1);
  for (std::size_t i = vars_.size(); i-- > 1;)
    strides_[i - 1] = strides_[i] * vars_[i].size();
}

bool JointPmf::has_var(const std::string& name) const {
  for (const auto& a : vars_)
    if (a.name == name) return true;
  return false;
}

std::size_t JointPmf::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  throw std::invalid_argument("unknown variable: " + name);
}

void JointPmf::decode_cell(std::size_t cell, std::vector<std::size_t>& out) const {
  out.resize(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    out[i] = cell / strides_[i];
    cell %= strides_[i];
  }
}

std::size_t JointPmf::encode_cell(const std::vector<std::size_t>& sym) const {
  std::size_t cell = 0;
  for (std::size_t i = 0; i < vars_.size(); ++i) cell += sym[i] * strides_[i];
  return cell;
}

JointPmf JointPmf::from_json(const njson& j) {
  std::vector<Alphabet> vars = parse_alphabets(j.at("vars"), "vars");
  std::vector<double> table;
  for (const auto& v : j.at("table")) table.push_back(v.get<double>());
  return JointPmf(std::move(vars), std::move(table));
}

njson JointPmf::to_json() const {
  njson j;
  j["vars"] = alphabets_to_json(vars_);
  j["table"] = table_;
  return j;
}

std::size_t Channel::input_cells() const {
  std::size_t n = 1;
  for (const auto& a : inputs) n *= a.size();
  return n;
}

std::size_t Channel::output_cells() const {
  std::size_t n = 1;
  for (const auto& a : outputs) n *= a.size();
  return n;
}

Channel Channel::from_json(const njson& j) {
  Channel ch;
  ch.inputs = parse_alphabets(j.at("inputs"), "inputs");
  ch.outputs = parse_alphabets(j.at("outputs"), "outputs");
  for (const auto& v : j.at("rows")) ch.rows.push_back(v.get<double>());
  if (ch.rows.size() != ch.input_cells() * ch.output_cells())
    throw std::invalid_argument("channel rows size mismatch");
  for (std::size_t r = 0; r < ch.input_cells(); ++r) {
    double mass = 0.0;
    for (std::size_t c = 0; c < ch.output_cells(); ++c) {
      double v = ch.rows[r * ch.output_cells() + c];
      if (!(v >= 0.0)) throw std::invalid_argument("negative channel entry");
      mass += v;
    }
    if (std::abs(mass - 1.0) > kRenormTol)
      throw std::invalid_argument("channel row does not sum to 1");
    if (std::abs(mass - 1.0) > kMassTol)
      for (std::size_t c = 0; c < ch.output_cells(); ++c)
        ch.rows[r * ch.output_cells() + c] /= mass;
  }
  return ch;
}

njson Channel::to_json() const {
  njson j;
  j["inputs"] = alphabets_to_json(inputs);
  j["outputs"] = alphabets_to_json(outputs);
  j["rows"] = rows;
  return j;
}

JointPmf marginalize(const JointPmf& p, const VarList& keep) {
  // Validate and locate kept variables, preserving p's order.
  std::vector<bool> keep_mask(p.vars().size(), false);
  for (const auto& name : keep) keep_mask[p.var_index(name)] = true;

  std::vector<Alphabet> out_vars;
  std::vector<std::size_t> kept_idx;
  for (std::size_t i = 0; i < p.vars().size(); ++i)
    if (keep_mask[i]) {
      out_vars.push_back(p.vars()[i]);
      kept_idx.push_back(i);
    }

  std::size_t out_cells = 1;
  for (const auto& a : out_vars) out_cells *= a.size();
  std::vector<double> table(out_cells, 0.0);

  std::vector<std::size_t> sym;
  for (std::size_t cell = 0; cell < p.cell_count(); ++cell) {
    double v = p.table()[cell];
    if (v == 0.0) continue;
    p.decode_cell(cell, sym);
    std::size_t out = 0;
    for (std::size_t k = 0; k < kept_idx.size(); ++k)
      out = out * p.vars()[kept_idx[k]].size() + sym[kept_idx[k]];
    table[out] += v;
  }
  return JointPmf(std::move(out_vars), std::move(table));
}

JointPmf compose(const JointPmf& p, const Channel& ch, std::size_t budget) {
  std::vector<std::size_t> in_idx;
  for (const auto& a : ch.inputs) {
    std::size_t i = p.var_index(a.name);
    if (!(p.vars()[i] == a))
      throw std::invalid_argument("alphabet mismatch on channel input " + a.name);
    in_idx.push_back(i);
  }
  for (const auto& a : ch.outputs)
    if (p.has_var(a.name))
      throw std::invalid_argument("channel output collides with variable " + a.name);

  std::vector<Alphabet> out_vars = p.vars();
  out_vars.insert(out_vars.end(), ch.outputs.begin(), ch.outputs.end());
  std::size_t cells = checked_product(out_vars, budget);
  std::vector<double> table(cells, 0.0);

  const std::size_t oc = ch.output_cells();
  std::vector<std::size_t> sym;
  for (std::size_t cell = 0; cell < p.cell_count(); ++cell) {
    double v = p.table()[cell];
    p.decode_cell(cell, sym);
    std::size_t row = 0;
    for (std::size_t k = 0; k < in_idx.size(); ++k)
      row = row * ch.inputs[k].size() + sym[in_idx[k]];
    // Output block: cell-major over p, then outputs fastest.
    for (std::size_t o = 0; o < oc; ++o)
      table[cell * oc + o] = v * ch.rows[row * oc + o];
  }
  return JointPmf(std::move(out_vars), std::move(table));
}

Channel condition(const JointPmf& p, const VarList& outs, const VarList& given) {
  JointPmf joint = marginalize(p, [&] {
    VarList all = given;
    all.insert(all.end(), outs.begin(), outs.end());
    return all;
  }());
  // Reorder conceptually: rows indexed by `given` in the order passed, columns
  // by `outs` in the order passed.
  std::vector<std::size_t> g_idx, o_idx;
  for (const auto& n : given) g_idx.push_back(joint.var_index(n));
  for (const auto& n : outs) o_idx.push_back(joint.var_index(n));

  Channel ch;
  for (auto i : g_idx) ch.inputs.push_back(joint.vars()[i]);
  for (auto i : o_idx) ch.outputs.push_back(joint.vars()[i]);
  const std::size_t ic = ch.input_cells(), oc = ch.output_cells();
  ch.rows.assign(ic * oc, 0.0);

  std::vector<std::size_t> sym;
  for (std::size_t cell = 0; cell < joint.cell_count(); ++cell) {
    double v = joint.table()[cell];
    if (v == 0.0) continue;
    joint.decode_cell(cell, sym);
    std::size_t r = 0, c = 0;
    for (std::size_t k = 0; k < g_idx.size(); ++k)
      r = r * joint.vars()[g_idx[k]].size() + sym[g_idx[k]];
    for (std::size_t k = 0; k < o_idx.size(); ++k)
      c = c * joint.vars()[o_idx[k]].size() + sym[o_idx[k]];
    ch.rows[r * oc + c] += v;
  }
  for (std::size_t r = 0; r < ic; ++r) {
    double mass = 0.0;
    for (std::size_t c = 0; c < oc; ++c) mass += ch.rows[r * oc + c];
    if (mass > 0.0) {
      for (std::size_t c = 0; c < oc; ++c) ch.rows[r * oc + c] /= mass;
    } else {
      for (std::size_t c = 0; c < oc; ++c) ch.rows[r * oc + c] = 1.0 / double(oc);
    }
  }
  return ch;
}

namespace {

void check_disjoint(const VarList& a, const VarList& b, const char* what) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (x == y) throw std::invalid_argument(std::string("overlapping variable sets in ") + what);
}

double plain_entropy(const JointPmf& p, const VarList& s) {
  return neg_sum_plogp(marginalize(p, s).table());
}

}  // namespace

double entropy(const JointPmf& p, const VarList& a, const VarList& c) {
  check_disjoint(a, c, "entropy");
  if (a.empty()) return 0.0;
  VarList ac = a;
  ac.insert(ac.end(), c.begin(), c.end());
  return plain_entropy(p, ac) - plain_entropy(p, c);
}

double mutual_info(const JointPmf& p, const VarList& a, const VarList& b,
                   const VarList& c) {
  check_disjoint(a, b, "mutual_info");
  check_disjoint(a, c, "mutual_info");
  check_disjoint(b, c, "mutual_info");
  if (a.empty() || b.empty()) return 0.0;
  VarList bc = b;
  bc.insert(bc.end(), c.begin(), c.end());
  return entropy(p, a, c) - entropy(p, a, bc);
}

double total_variation(const JointPmf& p, const JointPmf& q) {
  if (p.vars().size() != q.vars().size())
    throw std::invalid_argument("total_variation: variable sets differ");
  // Align q's axes with p's by name.
  std::vector<std::size_t> map_pq(p.vars().size());
  for (std::size_t i = 0; i < p.vars().size(); ++i) {
    std::size_t j = q.var_index(p.vars()[i].name);
    if (!(q.vars()[j] == p.vars()[i]))
      throw std::invalid_argument("total_variation: alphabet mismatch on " +
                                  p.vars()[i].name);
    map_pq[i] = j;
  }
  std::vector<std::size_t> sym(p.vars().size()), qsym(p.vars().size());
  double d = 0.0;
  for (std::size_t cell = 0; cell < p.cell_count(); ++cell) {
    p.decode_cell(cell, sym);
    for (std::size_t i = 0; i < sym.size(); ++i) qsym[map_pq[i]] = sym[i];
    d += std::abs(p.table()[cell] - q.table()[q.encode_cell(qsym)]);
  }
  return 0.5 * d;
}

MarkovResult is_markov(const JointPmf& p, const VarList& a, const VarList& b,
                       const VarList& c, double tol) {
  double w = mutual_info(p, a, c, b);
  return MarkovResult{w <= tol, w};
}

JointPmf iid_extend(const JointPmf& p, int n, std::size_t budget) {
  if (n < 1) throw std::invalid_argument("iid_extend: n must be >= 1");
  std::vector<Alphabet> vars;
  for (int t = 1; t <= n; ++t)
    for (const auto& a : p.vars())
      vars.push_back(Alphabet{a.name + "#" + std::to_string(t), a.symbols});
  std::size_t cells = checked_product(vars, budget);
  std::vector<double> table(cells);
  const std::size_t base = p.cell_count();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double v = 1.0;
    std::size_t rest = cell;
    // Replica blocks are contiguous: the flat index decomposes base-|p| per
    // replica, last replica fastest.
    for (int t = 0; t < n; ++t) {
      std::size_t digit = rest % base;  // replica n-1-t
      rest /= base;
      v *= p.table()[digit];
    }
    table[cell] = v;
  }
  return JointPmf(std::move(vars), std::move(table));
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

}  // namespace chansim
