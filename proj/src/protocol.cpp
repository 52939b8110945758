#include "chansim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace chansim {
namespace {

constexpr std::uint32_t kRoleK = 0x4B;
constexpr std::uint32_t kRoleB = 0x42;
constexpr std::uint32_t kRoleW = 0x57;
constexpr std::uint32_t kRoleT = 0x54;
constexpr double kLn2 = 0.69314718055994531;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t checked_pow(std::size_t base, int n, std::size_t budget,
                          const char* what) {
  std::uint64_t v = 1;
  const std::uint64_t b = base, cap = budget;
  for (int t = 0; t < n; ++t) {
    if (b > 1 && v > cap / b) {
      throw BudgetError(std::string(what) + " exceeds the cell budget");
    }
    v *= b;
  }
  if (v > cap) throw BudgetError(std::string(what) + " exceeds the cell budget");
  return v;
}

/// Symbols of a sequence index, most-significant symbol first (index order is
/// lexicographic order on the symbol string, so "smallest index" means
/// lexicographically smallest sequence).
void seq_syms(std::uint64_t seq, std::size_t size, int n,
              std::vector<std::size_t>& out) {
  out.assign(std::size_t(n), 0);
  for (int t = n - 1; t >= 0; --t) {
    out[std::size_t(t)] = std::size_t(seq % size);
    seq /= size;
  }
}

/// One source block, decoded into per-symbol cells and variable symbols.
struct BlockCtx {
  std::vector<std::size_t> cells;              // per symbol, source cell
  std::vector<std::vector<std::size_t>> syms;  // [t] -> source-var symbols
  std::vector<std::size_t> x1, x2, z;          // per symbol (z empty if absent)
};

BlockCtx make_ctx(const ProtocolInstance& inst,
                  const std::vector<std::size_t>& cells) {
  const int n = inst.n;
  BlockCtx c;
  c.cells = cells;
  c.syms.resize(std::size_t(n));
  c.x1.resize(std::size_t(n));
  c.x2.resize(std::size_t(n));
  if (inst.src_z >= 0) c.z.resize(std::size_t(n));
  for (int t = 0; t < n; ++t) {
    inst.source.decode_cell(cells[std::size_t(t)], c.syms[std::size_t(t)]);
    c.x1[std::size_t(t)] = c.syms[std::size_t(t)][std::size_t(inst.src_x1)];
    c.x2[std::size_t(t)] = c.syms[std::size_t(t)][std::size_t(inst.src_x2)];
    if (inst.src_z >= 0)
      c.z[std::size_t(t)] = c.syms[std::size_t(t)][std::size_t(inst.src_z)];
  }
  return c;
}

/// Per-symbol row pointers into a kernel whose inputs are
/// (F_1..F_nviews, X-variable): rows[t] points at the output pmf for symbol t.
std::vector<const double*> kernel_rows(const ProtocolInstance& inst,
                                       const Channel& ch,
                                       const std::vector<std::uint64_t>& views,
                                       int nviews,
                                       const std::vector<std::size_t>& xsyms) {
  const int n = inst.n;
  const std::size_t oc = ch.output_cells();
  std::vector<std::vector<std::size_t>> ps(static_cast<std::size_t>(nviews));
  for (int j = 0; j < nviews; ++j)
    seq_syms(views[std::size_t(j)], inst.f_size[std::size_t(j)], n,
             ps[std::size_t(j)]);
  const std::size_t xsz = ch.inputs.back().size();
  std::vector<const double*> rows(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    std::size_t idx = 0;
    for (int j = 0; j < nviews; ++j)
      idx = idx * inst.f_size[std::size_t(j)] + ps[std::size_t(j)][std::size_t(t)];
    idx = idx * xsz + xsyms[std::size_t(t)];
    rows[std::size_t(t)] = &ch.rows[idx * oc];
  }
  return rows;
}

/// The sender's conditional sampling space at one round: every candidate
/// F_i^n with positive conditional weight, flagged by bin consistency.
struct SendSpace {
  std::vector<std::uint64_t> f;
  std::vector<double> w;
  std::vector<char> ok;
  double mass_ok = 0.0, mass_all = 0.0;
};

SendSpace send_space(const ProtocolInstance& inst, int i,
                     const std::vector<std::uint64_t>& sender_view,
                     const BlockCtx& ctx, std::uint64_t omega,
                     std::uint64_t b_i) {
  const int idx = i - 1, n = inst.n;
  const Channel& ch = inst.send[std::size_t(idx)];
  const auto rows = kernel_rows(inst, ch, sender_view, idx,
                                parity(i) == 1 ? ctx.x1 : ctx.x2);
  const std::size_t fsz = inst.f_size[std::size_t(idx)];
  SendSpace sp;
  std::vector<std::size_t> syms(std::size_t(n), 0);
  std::vector<std::uint64_t> tuple(sender_view.begin(),
                                   sender_view.begin() + idx);
  tuple.push_back(0);
  for (std::uint64_t fs = 0; fs < inst.f_seq[std::size_t(idx)]; ++fs) {
    if (fs) {
      int t = n - 1;
      while (true) {
        if (++syms[std::size_t(t)] < fsz) break;
        syms[std::size_t(t)] = 0;
        --t;
      }
    }
    double w = 1.0;
    for (int t = 0; t < n; ++t) w *= rows[std::size_t(t)][syms[std::size_t(t)]];
    if (!(w > 0.0)) continue;
    tuple.back() = fs;
    bool okf = inst.bbin[std::size_t(idx)].bin_of(tuple) == b_i;
    if (okf && i == 1) okf = inst.wbin.bin_of(tuple) == omega;
    sp.f.push_back(fs);
    sp.w.push_back(w);
    sp.ok.push_back(okf ? 1 : 0);
    sp.mass_all += w;
    if (okf) sp.mass_ok += w;
  }
  return sp;
}

/// The receiver's candidate table at one round: MAP weights and the bins of
/// every candidate under the receiver's own transcript reconstruction.
struct DecodeList {
  std::vector<std::uint64_t> g, kb, bb, wb;
  std::vector<double> w;
};

DecodeList decode_list(const ProtocolInstance& inst, int i,
                       const std::vector<std::uint64_t>& recv_view,
                       const BlockCtx& ctx) {
  const int idx = i - 1, n = inst.n;
  const Channel& ch = inst.decode[std::size_t(idx)];
  const auto rows = kernel_rows(inst, ch, recv_view, idx,
                                parity(i) == 1 ? ctx.x2 : ctx.x1);
  const std::size_t fsz = inst.f_size[std::size_t(idx)];
  DecodeList dl;
  std::vector<std::size_t> syms(std::size_t(n), 0);
  std::vector<std::uint64_t> tuple(recv_view.begin(), recv_view.begin() + idx);
  tuple.push_back(0);
  for (std::uint64_t gs = 0; gs < inst.f_seq[std::size_t(idx)]; ++gs) {
    if (gs) {
      int t = n - 1;
      while (true) {
        if (++syms[std::size_t(t)] < fsz) break;
        syms[std::size_t(t)] = 0;
        --t;
      }
    }
    double w = 1.0;
    for (int t = 0; t < n; ++t) w *= rows[std::size_t(t)][syms[std::size_t(t)]];
    tuple.back() = gs;
    dl.g.push_back(gs);
    dl.w.push_back(w);
    dl.kb.push_back(inst.kbin[std::size_t(idx)].bin_of(tuple));
    dl.bb.push_back(inst.bbin[std::size_t(idx)].bin_of(tuple));
    dl.wb.push_back(i == 1 ? inst.wbin.bin_of(tuple) : 0);
  }
  return dl;
}

/// MAP decode inside the candidate bins; ties pick the smallest sequence.
/// When no candidate matches, relax to the message bin alone, then to the
/// unconstrained MAP; any relaxation counts as one fallback event.
std::pair<std::uint64_t, int> map_decode(const DecodeList& dl, bool round1,
                                         std::uint64_t k, std::uint64_t b,
                                         std::uint64_t omega) {
  std::ptrdiff_t best = -1;
  double bw = -1.0;
  for (std::size_t j = 0; j < dl.g.size(); ++j) {
    if (dl.kb[j] != k || dl.bb[j] != b) continue;
    if (round1 && dl.wb[j] != omega) continue;
    if (dl.w[j] > bw) {
      bw = dl.w[j];
      best = std::ptrdiff_t(j);
    }
  }
  if (best >= 0) return {dl.g[std::size_t(best)], 0};
  for (std::size_t j = 0; j < dl.g.size(); ++j) {
    if (dl.kb[j] != k) continue;
    if (dl.w[j] > bw) {
      bw = dl.w[j];
      best = std::ptrdiff_t(j);
    }
  }
  if (best >= 0) return {dl.g[std::size_t(best)], 1};
  for (std::size_t j = 0; j < dl.g.size(); ++j) {
    if (dl.w[j] > bw) {
      bw = dl.w[j];
      best = std::ptrdiff_t(j);
    }
  }
  if (best < 0) throw std::logic_error("decoder candidate table is empty");
  return {dl.g[std::size_t(best)], 1};
}

/// One fully resolved protocol path, conditioned on a source block.
struct PathInfo {
  std::uint64_t omega = 0;
  std::vector<std::uint64_t> b, sent, dec, k, viewA, viewB;
  double prob = 0.0;  // conditional on the block, shared values included
  int fallbacks = 0;
};

template <typename Sink>
class PathEnum {
 public:
  PathEnum(const ProtocolInstance& inst, const BlockCtx& ctx, Sink& sink,
           std::uint64_t path_budget)
      : inst_(inst), ctx_(ctx), sink_(sink), budget_(path_budget) {
    const std::size_t r = std::size_t(inst.a.r);
    p_.b.assign(r, 0);
    p_.sent.assign(r, 0);
    p_.dec.assign(r, 0);
    p_.k.assign(r, 0);
    p_.viewA.assign(r, 0);
    p_.viewB.assign(r, 0);
  }

  void run() {
    const std::uint64_t W = inst_.wbin.bins();
    const int r = inst_.a.r;
    const double shared_p = 1.0 / double(inst_.shared_count);
    std::vector<std::uint64_t> bsz(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) bsz[std::size_t(i)] = inst_.bbin[std::size_t(i)].bins();
    for (std::uint64_t omega = 0; omega < W; ++omega) {
      p_.omega = omega;
      std::fill(p_.b.begin(), p_.b.end(), 0);
      while (true) {
        rounds(1, shared_p, 0);
        int i = r - 1;
        while (i >= 0) {
          if (++p_.b[std::size_t(i)] < bsz[std::size_t(i)]) break;
          p_.b[std::size_t(i)] = 0;
          --i;
        }
        if (i < 0) break;
      }
    }
  }

 private:
  void rounds(int i, double prob, int fb) {
    if (i > inst_.a.r) {
      p_.prob = prob;
      p_.fallbacks = fb;
      if (++emitted_ > budget_)
        throw BudgetError("protocol path enumeration exceeds the cell budget");
      sink_(p_);
      return;
    }
    const int idx = i - 1;
    const bool a_sends = parity(i) == 1;
    std::vector<std::uint64_t> sview(static_cast<std::size_t>(idx));
    std::vector<std::uint64_t> rview(static_cast<std::size_t>(idx));
    for (int j = 0; j < idx; ++j) {
      const bool j_by_a = parity(j + 1) == 1;
      const std::uint64_t s = p_.sent[std::size_t(j)], d = p_.dec[std::size_t(j)];
      sview[std::size_t(j)] = (j_by_a == a_sends) ? s : d;
      rview[std::size_t(j)] = (j_by_a == a_sends) ? d : s;
    }
    const SendSpace sp =
        send_space(inst_, i, sview, ctx_, p_.omega, p_.b[std::size_t(idx)]);
    if (sp.f.empty())
      throw std::logic_error("sender conditional has empty support");
    const bool fb_round = !(sp.mass_ok > 0.0);
    const double Z = fb_round ? sp.mass_all : sp.mass_ok;
    const DecodeList dl = decode_list(inst_, i, rview, ctx_);
    std::vector<std::uint64_t> stuple(sview);
    stuple.push_back(0);
    for (std::size_t j = 0; j < sp.f.size(); ++j) {
      if (!fb_round && !sp.ok[j]) continue;
      stuple.back() = sp.f[j];
      const std::uint64_t k = inst_.kbin[std::size_t(idx)].bin_of(stuple);
      const auto [g, relaxed] =
          map_decode(dl, i == 1, k, p_.b[std::size_t(idx)], p_.omega);
      p_.sent[std::size_t(idx)] = sp.f[j];
      p_.dec[std::size_t(idx)] = g;
      p_.k[std::size_t(idx)] = k;
      p_.viewA[std::size_t(idx)] = a_sends ? sp.f[j] : g;
      p_.viewB[std::size_t(idx)] = a_sends ? g : sp.f[j];
      rounds(i + 1, prob * sp.w[j] / Z, fb + (fb_round ? 1 : 0) + relaxed);
    }
  }

  const ProtocolInstance& inst_;
  const BlockCtx& ctx_;
  Sink& sink_;
  std::uint64_t budget_;
  std::uint64_t emitted_ = 0;
  PathInfo p_;
};

template <typename Sink>
void for_each_path(const ProtocolInstance& inst, const BlockCtx& ctx,
                   Sink&& sink, std::uint64_t path_budget) {
  PathEnum<Sink> e(inst, ctx, sink, path_budget);
  e.run();
}

/// Per-symbol input cell of the S-kernel, whose inputs are the present ones
/// among (X1, X2, Y1, Y2, Z) in that order.
std::size_t s_input(const ProtocolInstance& inst, const BlockCtx& ctx, int t,
                    std::size_t y1sym, std::size_t y2sym) {
  std::size_t pos = 0;
  const auto& ins = inst.sk.inputs;
  std::size_t idx = 0;
  idx = idx * ins[pos].size() + ctx.x1[std::size_t(t)];
  ++pos;
  idx = idx * ins[pos].size() + ctx.x2[std::size_t(t)];
  ++pos;
  if (inst.has_y1) {
    idx = idx * ins[pos].size() + y1sym;
    ++pos;
  }
  if (inst.has_y2) {
    idx = idx * ins[pos].size() + y2sym;
    ++pos;
  }
  if (inst.has_z) {
    idx = idx * ins[pos].size() + ctx.z[std::size_t(t)];
    ++pos;
  }
  return idx;
}

/// Enumerate the downstream outputs (Y1^n, Y2^n, S^n) of one resolved path
/// and hand (y1seq, y2seq, sseq, mass) to the sink. Absent variables stay 0.
template <typename Sink>
void expand_downstream(const ProtocolInstance& inst, const BlockCtx& ctx,
                       const PathInfo& p, Sink&& sink) {
  const int n = inst.n, r = inst.a.r;
  const std::size_t sy1 = inst.has_y1 ? inst.y1k.output_cells() : 1;
  const std::size_t sy2 = inst.has_y2 ? inst.y2k.output_cells() : 1;
  const std::size_t ssz = inst.has_s ? inst.sk.output_cells() : 1;
  std::vector<const double*> y1rows, y2rows;
  if (inst.has_y1) y1rows = kernel_rows(inst, inst.y1k, p.viewA, r, ctx.x1);
  if (inst.has_y2) y2rows = kernel_rows(inst, inst.y2k, p.viewB, r, ctx.x2);
  std::function<void(int, std::uint64_t, std::uint64_t, std::uint64_t, double)>
      rec = [&](int t, std::uint64_t y1s, std::uint64_t y2s, std::uint64_t ss,
                double mass) {
        if (t == n) {
          sink(y1s, y2s, ss, mass);
          return;
        }
        for (std::size_t a = 0; a < sy1; ++a) {
          const double m1 = inst.has_y1 ? y1rows[std::size_t(t)][a] : 1.0;
          if (!(m1 > 0.0)) continue;
          for (std::size_t b = 0; b < sy2; ++b) {
            const double m2 = inst.has_y2 ? y2rows[std::size_t(t)][b] : 1.0;
            if (!(m2 > 0.0)) continue;
            const double* srow =
                inst.has_s ? &inst.sk.rows[s_input(inst, ctx, t, a, b) * ssz]
                           : nullptr;
            for (std::size_t c = 0; c < ssz; ++c) {
              const double m3 = inst.has_s ? srow[c] : 1.0;
              if (!(m3 > 0.0)) continue;
              rec(t + 1, inst.has_y1 ? y1s * sy1 + a : 0,
                  inst.has_y2 ? y2s * sy2 + b : 0,
                  inst.has_s ? ss * ssz + c : 0, mass * m1 * m2 * m3);
            }
          }
        }
      };
  rec(0, 0, 0, 0, 1.0);
}

// ------------------- sparse measurement helpers -------------------

using Key = std::vector<std::uint64_t>;
using Sparse = std::map<Key, double>;

Sparse project(const Sparse& m, const std::vector<std::size_t>& ix) {
  Sparse out;
  Key k(ix.size());
  for (const auto& [key, v] : m) {
    for (std::size_t j = 0; j < ix.size(); ++j) k[j] = key[ix[j]];
    out[k] += v;
  }
  return out;
}

double sparse_entropy(const Sparse& m, double total) {
  double h = 0.0;
  for (const auto& [key, v] : m) {
    (void)key;
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

std::vector<std::size_t> cat_ix(const std::vector<std::size_t>& a,
                                const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// I(A;B) over the sparse law; exactly 0 when either side is constant.
double sparse_mi(const Sparse& m, double total,
                 const std::vector<std::size_t>& ixa,
                 const std::vector<std::size_t>& ixb) {
  const Sparse A = project(m, ixa);
  if (A.size() <= 1) return 0.0;
  const Sparse B = project(m, ixb);
  if (B.size() <= 1) return 0.0;
  const Sparse AB = project(m, cat_ix(ixa, ixb));
  return sparse_entropy(A, total) + sparse_entropy(B, total) -
         sparse_entropy(AB, total);
}

/// I(A;B|C); exactly 0 when either A or B is constant.
double sparse_cmi(const Sparse& m, double total,
                  const std::vector<std::size_t>& ixa,
                  const std::vector<std::size_t>& ixb,
                  const std::vector<std::size_t>& ixc) {
  if (project(m, ixa).size() <= 1 || project(m, ixb).size() <= 1) return 0.0;
  const double hac = sparse_entropy(project(m, cat_ix(ixa, ixc)), total);
  const double hbc = sparse_entropy(project(m, cat_ix(ixb, ixc)), total);
  const double habc =
      sparse_entropy(project(m, cat_ix(cat_ix(ixa, ixb), ixc)), total);
  const double hc = sparse_entropy(project(m, ixc), total);
  return hac + hbc - habc - hc;
}

/// Evaluates the i.i.d. target mass of projected atoms
/// (source block, Y1^n, Y2^n, S^n).
class TargetCtx {
 public:
  explicit TargetCtx(const ProtocolInstance& inst) : inst_(inst) {
    VarList keep{"X1", "X2"};
    if (inst.has_z) keep.push_back("Z");
    if (inst.has_y1) keep.push_back("Y1");
    if (inst.has_y2) keep.push_back("Y2");
    if (inst.has_s) keep.push_back("S");
    qs_ = marginalize(inst.a.joint, keep);
    for (const auto& v : qs_.vars()) {
      if (v.name == "Y1") kind_.push_back(-1);
      else if (v.name == "Y2") kind_.push_back(-2);
      else if (v.name == "S") kind_.push_back(-3);
      else kind_.push_back(int(inst.source.var_index(v.name)));
    }
    for (double c : qs_.table())
      if (c > 0.0) ++supp_;
  }

  std::size_t support() const { return supp_; }

  double q_of(std::uint64_t srcseq, std::uint64_t y1seq, std::uint64_t y2seq,
              std::uint64_t sseq) {
    const int n = inst_.n;
    const auto& syms = src_syms(srcseq);
    if (inst_.has_y1)
      seq_syms(y1seq, inst_.y1k.output_cells(), n, y1buf_);
    if (inst_.has_y2)
      seq_syms(y2seq, inst_.y2k.output_cells(), n, y2buf_);
    if (inst_.has_s) seq_syms(sseq, inst_.sk.output_cells(), n, sbuf_);
    double q = 1.0;
    std::vector<std::size_t> cellsyms(kind_.size());
    for (int t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < kind_.size(); ++j) {
        if (kind_[j] == -1) cellsyms[j] = y1buf_[std::size_t(t)];
        else if (kind_[j] == -2) cellsyms[j] = y2buf_[std::size_t(t)];
        else if (kind_[j] == -3) cellsyms[j] = sbuf_[std::size_t(t)];
        else
          cellsyms[j] =
              syms[std::size_t(t) * nsrc() + std::size_t(kind_[j])];
      }
      q *= qs_.table()[qs_.encode_cell(cellsyms)];
      if (!(q > 0.0)) return 0.0;
    }
    return q;
  }

 private:
  std::size_t nsrc() const { return inst_.source.vars().size(); }

  const std::vector<std::size_t>& src_syms(std::uint64_t srcseq) {
    auto it = cache_.find(srcseq);
    if (it != cache_.end()) return it->second;
    const int n = inst_.n;
    std::vector<std::size_t> flat(std::size_t(n) * nsrc());
    std::uint64_t s = srcseq;
    std::vector<std::size_t> buf;
    for (int t = n - 1; t >= 0; --t) {
      const std::size_t cell = std::size_t(s % inst_.source.cell_count());
      s /= inst_.source.cell_count();
      inst_.source.decode_cell(cell, buf);
      for (std::size_t j = 0; j < nsrc(); ++j)
        flat[std::size_t(t) * nsrc() + j] = buf[j];
    }
    return cache_.emplace(srcseq, std::move(flat)).first->second;
  }

  const ProtocolInstance& inst_;
  JointPmf qs_;
  std::vector<int> kind_;
  std::size_t supp_ = 0;
  std::map<std::uint64_t, std::vector<std::size_t>> cache_;
  std::vector<std::size_t> y1buf_, y2buf_, sbuf_;
};

/// TV between a projected sparse law (keys: src, y1, y2, s) and the i.i.d.
/// target. Atom masses are used as-is — callers assert normalization
/// separately — so structurally exact runs report a bitwise zero. The
/// unvisited target mass is 0 exactly when the whole target support was
/// visited.
double tv_target(const Sparse& P, TargetCtx& tc, int n) {
  long double diff = 0.0L, qvis = 0.0L;
  std::uint64_t vis = 0;
  for (const auto& [k, v] : P) {
    const double p = v;
    const double q = tc.q_of(k[0], k[1], k[2], k[3]);
    if (q > 0.0) {
      qvis += q;
      ++vis;
    }
    diff += std::fabs((long double)p - (long double)q);
  }
  long double support = 1.0L;
  for (int t = 0; t < n; ++t) support *= (long double)tc.support();
  long double rest = 0.0L;
  if (!((long double)vis == support))
    rest = std::max(0.0L, 1.0L - qvis);
  return double(0.5L * (diff + rest));
}

/// Evaluates the ideal key-security law for atoms keyed (Z^n, S^n, key A,
/// key B): the extracted key must be uniform over the key alphabet, agreed
/// between the terminals, and independent of everything the adversary is
/// entitled to — the eavesdropper's source component and the secret. The
/// ideal law is therefore q(z,s)^n times a uniform diagonal over the keys.
class KeyTargetCtx {
 public:
  explicit KeyTargetCtx(const ProtocolInstance& inst)
      : inst_(inst), tbins_(inst.tbin.bins()) {
    VarList keep;
    if (inst.has_z) keep.push_back("Z");
    if (inst.has_s) keep.push_back("S");
    if (!keep.empty()) {
      qzs_ = marginalize(inst.a.joint, keep);
      for (std::size_t j = 0; j < qzs_.vars().size(); ++j) {
        if (qzs_.vars()[j].name == "Z") zpos_ = j;
        if (qzs_.vars()[j].name == "S") spos_ = j;
      }
      if (inst.has_z)
        z_sz_ = inst.source.vars()[std::size_t(inst.src_z)].symbols.size();
      if (inst.has_s) s_sz_ = inst.sk.output_cells();
    }
    supp_ = 0;
    for (double c : qzs_.table())
      if (c > 0.0) ++supp_;
  }

  std::uint64_t tbins() const { return tbins_; }

  /// Number of positive-mass target atoms over blocks of length n.
  long double support_n(int n) const {
    long double s = 1.0L;
    for (int t = 0; t < n; ++t) s *= (long double)supp_;
    return s * (long double)tbins_;
  }

  /// Target mass of the atom (z seq, s seq, key A, key B).
  double q_of(std::uint64_t zseq, std::uint64_t sseq, std::uint64_t ta,
              std::uint64_t tb, int n) {
    if (ta != tb) return 0.0;
    double q = 1.0 / double(tbins_);
    if (qzs_.vars().empty()) return q;
    if (inst_.has_z) seq_syms(zseq, z_sz_, n, zbuf_);
    if (inst_.has_s) seq_syms(sseq, s_sz_, n, sbuf_);
    std::vector<std::size_t> cell(qzs_.vars().size());
    for (int t = 0; t < n; ++t) {
      if (inst_.has_z) cell[zpos_] = zbuf_[std::size_t(t)];
      if (inst_.has_s) cell[spos_] = sbuf_[std::size_t(t)];
      q *= qzs_.table()[qzs_.encode_cell(cell)];
      if (!(q > 0.0)) return 0.0;
    }
    return q;
  }

  /// Enumerates every positive-mass target atom with its mass; throws
  /// BudgetError when the support exceeds the budget.
  template <typename Fn>
  void for_each_target(int n, std::size_t budget, Fn&& fn) const {
    std::vector<std::size_t> zs, ss;
    std::vector<double> w;
    if (qzs_.vars().empty()) {
      zs.push_back(0);
      ss.push_back(0);
      w.push_back(1.0);
    } else {
      std::vector<std::size_t> buf;
      for (std::size_t c = 0; c < qzs_.cell_count(); ++c) {
        if (!(qzs_.table()[c] > 0.0)) continue;
        qzs_.decode_cell(c, buf);
        zs.push_back(inst_.has_z ? buf[zpos_] : 0);
        ss.push_back(inst_.has_s ? buf[spos_] : 0);
        w.push_back(qzs_.table()[c]);
      }
    }
    long double count = (long double)tbins_;
    for (int t = 0; t < n; ++t) count *= (long double)w.size();
    if (count > (long double)budget)
      throw BudgetError("key target support exceeds the cell budget");
    std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
    Key key(4);
    while (true) {
      std::uint64_t zseq = 0, sseq = 0;
      double q = 1.0;
      for (int t = 0; t < n; ++t) {
        const std::size_t c = pos[std::size_t(t)];
        zseq = zseq * z_sz_ + zs[c];
        sseq = sseq * s_sz_ + ss[c];
        q *= w[c];
      }
      key[0] = zseq;
      key[1] = sseq;
      for (std::uint64_t t = 0; t < tbins_; ++t) {
        key[2] = t;
        key[3] = t;
        fn(key, q / double(tbins_));
      }
      int t = n - 1;
      while (t >= 0) {
        if (++pos[std::size_t(t)] < w.size()) break;
        pos[std::size_t(t)] = 0;
        --t;
      }
      if (t < 0) break;
    }
  }

 private:
  const ProtocolInstance& inst_;
  std::uint64_t tbins_;
  JointPmf qzs_;
  std::size_t zpos_ = 0, spos_ = 0, supp_ = 1, z_sz_ = 1, s_sz_ = 1;
  std::vector<std::size_t> zbuf_, sbuf_;
};

/// TV between a projected sparse law (keys: z, s, ta, tb) and the ideal
/// key-security law. Same exactness conventions as tv_target.
double tv_key_target(const Sparse& P, KeyTargetCtx& kc, int n) {
  long double diff = 0.0L, qvis = 0.0L;
  std::uint64_t vis = 0;
  for (const auto& [k, v] : P) {
    const double p = v;
    const double q = kc.q_of(k[0], k[1], k[2], k[3], n);
    if (q > 0.0) {
      qvis += q;
      ++vis;
    }
    diff += std::fabs((long double)p - (long double)q);
  }
  long double rest = 0.0L;
  if (!((long double)vis == kc.support_n(n)))
    rest = std::max(0.0L, 1.0L - qvis);
  return double(0.5L * (diff + rest));
}

double mm_entropy(const std::map<Key, std::uint64_t>& c, std::uint64_t N) {
  double h = 0.0;
  for (const auto& [k, v] : c) {
    (void)k;
    if (v == 0) continue;
    const double p = double(v) / double(N);
    h -= p * std::log2(p);
  }
  if (!c.empty()) h += double(c.size() - 1) / (2.0 * double(N) * kLn2);
  return h;
}

double mm_mi(const std::map<Key, std::uint64_t>& ca,
             const std::map<Key, std::uint64_t>& cb,
             const std::map<Key, std::uint64_t>& cab, std::uint64_t N) {
  if (ca.size() <= 1 || cb.size() <= 1) return 0.0;
  const double v = mm_entropy(ca, N) + mm_entropy(cb, N) - mm_entropy(cab, N);
  return v > 0.0 ? v : 0.0;
}

std::uint64_t fold_z(const ProtocolInstance& inst, const BlockCtx& ctx) {
  if (inst.src_z < 0) return 0;
  const std::size_t zsz =
      inst.source.vars()[std::size_t(inst.src_z)].symbols.size();
  std::uint64_t z = 0;
  for (int t = 0; t < inst.n; ++t) z = z * zsz + ctx.z[std::size_t(t)];
  return z;
}

std::string mc_note() {
  return "mutual informations are plug-in estimates over the realized "
         "sequence/bin values with a Miller-Madow bias correction; exact "
         "mode is the ground truth";
}

}  // namespace

// ------------------- public: rng, binning, build -------------------

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t trial) {
  std::uint64_t k = mix64(seed ^ 0x636f756e746572ULL);
  k = mix64(k ^ mix64(stream));
  k = mix64(k ^ mix64(trial * 0x9e3779b97f4a7c15ULL + 1));
  key_ = k;
}

std::uint64_t CounterRng::next() {
  return mix64(key_ ^ mix64(ctr_++ * 0x9e3779b97f4a7c15ULL + 0x51ULL));
}

double CounterRng::uniform() {
  return double(next() >> 11) * 0x1.0p-53;
}

SeqBinning::SeqBinning(std::uint64_t seed, std::uint32_t role,
                       std::uint32_t round, std::uint64_t bins)
    : bins_(bins < 1 ? 1 : bins) {
  std::uint64_t k = mix64(seed ^ (0xb1a5ed0000ULL + role));
  k = mix64(k ^ (0x9e3779b97f4a7c15ULL + round));
  key_ = k;
}

std::uint64_t SeqBinning::bin_of(const std::vector<std::uint64_t>& seqs) const {
  std::uint64_t h = key_;
  for (std::uint64_t s : seqs) h = mix64(h ^ mix64(s + 0x632be59bd9b4e019ULL));
  return bins_ == 1 ? 0 : h % bins_;
}

std::uint64_t bin_count(int n, double rate) {
  if (!std::isfinite(rate) || rate < 0.0)
    throw std::invalid_argument("bin rate must be finite and nonnegative");
  long double v = std::exp2l((long double)n * (long double)rate);
  v *= (1.0L - 1e-12L);
  if (v >= 9.2e18L)
    throw BudgetError("bin count exceeds the representable range");
  std::uint64_t b = (std::uint64_t)std::ceil(v);
  return b < 1 ? 1 : b;
}

ProtocolInstance build(const AuxScheme& a, int n, const ProtocolRates& rates,
                       std::uint64_t seed, Mode mode, std::size_t budget) {
  const int r = a.r;
  if (n < 1) throw std::invalid_argument("blocklength must be at least 1");
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (!a.joint.has_var("X1") || !a.joint.has_var("X2"))
    throw std::invalid_argument("scheme must declare X1 and X2");
  for (int i = 1; i <= r; ++i)
    if (!a.joint.has_var("F" + std::to_string(i)))
      throw std::invalid_argument("scheme must declare F" + std::to_string(i));
  if (int(rates.R.size()) != r || int(rates.Rt.size()) != r)
    throw std::invalid_argument(
        "per-round rate vectors must have one entry per round");
  for (double v : rates.R)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("message rates must be finite and >= 0");
  for (double v : rates.Rt)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(
          "shared-randomness rates must be finite and >= 0");
  if (!std::isfinite(rates.R0) || rates.R0 < 0.0 || !std::isfinite(rates.RSK) ||
      rates.RSK < 0.0)
    throw std::invalid_argument("R0 and RSK must be finite and >= 0");

  ProtocolInstance inst;
  inst.a = a;
  inst.mode = mode;
  inst.n = n;
  inst.rates = rates;
  inst.seed = seed;
  inst.budget = budget;
  inst.has_y1 = a.has("Y1");
  inst.has_y2 = a.has("Y2");
  inst.has_s = a.has("S");
  inst.has_z = a.has("Z");
  inst.key_mode = (mode == Mode::Thm3);

  VarList sv{"X1", "X2"};
  if (inst.has_z) sv.push_back("Z");
  inst.source = marginalize(a.joint, sv);
  for (const auto& v : inst.source.vars())
    inst.src_sizes.push_back(v.symbols.size());
  inst.src_x1 = int(inst.source.var_index("X1"));
  inst.src_x2 = int(inst.source.var_index("X2"));
  inst.src_z = inst.has_z ? int(inst.source.var_index("Z")) : -1;

  VarList fall;
  for (int i = 1; i <= r; ++i) {
    const std::string f = "F" + std::to_string(i);
    VarList own(fall), oth(fall);
    own.push_back(parity(i) == 1 ? "X1" : "X2");
    oth.push_back(parity(i) == 1 ? "X2" : "X1");
    inst.send.push_back(condition(a.joint, {f}, own));
    inst.decode.push_back(condition(a.joint, {f}, oth));
    fall.push_back(f);
    const std::size_t fsz =
        a.joint.vars()[a.joint.var_index(f)].symbols.size();
    inst.f_size.push_back(fsz);
    inst.f_seq.push_back(
        checked_pow(fsz, n, budget, "transcript sequence space"));
  }
  if (inst.has_y1) {
    VarList g(fall);
    g.push_back("X1");
    inst.y1k = condition(a.joint, {"Y1"}, g);
  }
  if (inst.has_y2) {
    VarList g(fall);
    g.push_back("X2");
    inst.y2k = condition(a.joint, {"Y2"}, g);
  }
  if (inst.has_s) {
    VarList g{"X1", "X2"};
    if (inst.has_y1) g.push_back("Y1");
    if (inst.has_y2) g.push_back("Y2");
    if (inst.has_z) g.push_back("Z");
    inst.sk = condition(a.joint, {"S"}, g);
  }
  VarList downs;
  if (inst.has_y1) downs.push_back("Y1");
  if (inst.has_y2) downs.push_back("Y2");
  if (inst.has_s) downs.push_back("S");
  inst.down_vars = downs;
  if (!downs.empty()) {
    VarList given;
    for (const auto& v : inst.source.vars()) given.push_back(v.name);
    inst.down = condition(a.joint, downs, given);
  }

  for (int i = 1; i <= r; ++i) {
    inst.kbin.emplace_back(seed, kRoleK, std::uint32_t(i),
                           bin_count(n, rates.R[std::size_t(i - 1)]));
    inst.bbin.emplace_back(seed, kRoleB, std::uint32_t(i),
                           bin_count(n, rates.Rt[std::size_t(i - 1)]));
  }
  inst.wbin = SeqBinning(seed, kRoleW, 0, bin_count(n, rates.R0));
  inst.tbin = SeqBinning(seed, kRoleT, 0, bin_count(n, rates.RSK));

  unsigned __int128 shared = inst.wbin.bins();
  for (const auto& b : inst.bbin) shared *= b.bins();
  if (shared > (unsigned __int128)std::numeric_limits<std::uint64_t>::max())
    throw BudgetError("shared-randomness space exceeds the representable range");
  inst.shared_count = std::uint64_t(shared);
  return inst;
}

// ------------------- public: forward execution -------------------

ProtocolState init_state(const ProtocolInstance& inst, CounterRng& rng) {
  ProtocolState st;
  const int n = inst.n, r = inst.a.r;
  st.src_cells.resize(std::size_t(n));
  const auto& tab = inst.source.table();
  for (int t = 0; t < n; ++t) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t cell = 0, lastnz = 0;
    for (std::size_t c = 0; c < tab.size(); ++c) {
      if (tab[c] > 0.0) lastnz = c;
      acc += tab[c];
      if (u < acc) {
        cell = c;
        break;
      }
      cell = lastnz;
    }
    st.src_cells[std::size_t(t)] = cell;
  }
  st.omega = inst.wbin.bins() > 1 ? rng.next() % inst.wbin.bins() : 0;
  st.b.resize(std::size_t(r), 0);
  for (int i = 0; i < r; ++i) {
    const std::uint64_t bb = inst.bbin[std::size_t(i)].bins();
    st.b[std::size_t(i)] = bb > 1 ? rng.next() % bb : 0;
  }
  return st;
}

void run_round(const ProtocolInstance& inst, int i, ProtocolState& state,
               CounterRng& rng) {
  const int r = inst.a.r;
  if (state.finalized) throw std::logic_error("protocol already finalized");
  if (i < 1 || i > r) throw std::invalid_argument("round index out of range");
  if (i != state.next_round)
    throw std::invalid_argument("rounds must be executed in order");
  const int idx = i - 1;
  const BlockCtx ctx = make_ctx(inst, state.src_cells);
  const bool a_sends = parity(i) == 1;
  std::vector<std::uint64_t> sview(static_cast<std::size_t>(idx));
    std::vector<std::uint64_t> rview(static_cast<std::size_t>(idx));
  for (int j = 0; j < idx; ++j) {
    const bool j_by_a = parity(j + 1) == 1;
    const std::uint64_t s = state.sent[std::size_t(j)],
                        d = state.dec[std::size_t(j)];
    sview[std::size_t(j)] = (j_by_a == a_sends) ? s : d;
    rview[std::size_t(j)] = (j_by_a == a_sends) ? d : s;
  }
  const SendSpace sp =
      send_space(inst, i, sview, ctx, state.omega, state.b[std::size_t(idx)]);
  if (sp.f.empty())
    throw std::logic_error("sender conditional has empty support");
  const bool fb = !(sp.mass_ok > 0.0);
  if (fb) ++state.fallbacks;
  const double Z = fb ? sp.mass_all : sp.mass_ok;
  const double u = rng.uniform() * Z;
  double acc = 0.0;
  std::uint64_t chosen = sp.f.back();
  for (std::size_t j = 0; j < sp.f.size(); ++j) {
    if (!fb && !sp.ok[j]) continue;
    acc += sp.w[j];
    chosen = sp.f[j];
    if (u < acc) break;
  }
  std::vector<std::uint64_t> tuple(sview);
  tuple.push_back(chosen);
  const std::uint64_t k = inst.kbin[std::size_t(idx)].bin_of(tuple);
  const DecodeList dl = decode_list(inst, i, rview, ctx);
  const auto [g, relaxed] =
      map_decode(dl, i == 1, k, state.b[std::size_t(idx)], state.omega);
  state.fallbacks += relaxed;
  state.sent.push_back(chosen);
  state.k.push_back(k);
  state.dec.push_back(g);
  ++state.next_round;
}

void finalize(const ProtocolInstance& inst, ProtocolState& state,
              CounterRng& rng) {
  const int r = inst.a.r, n = inst.n;
  if (state.finalized) throw std::logic_error("protocol already finalized");
  if (state.next_round != r + 1)
    throw std::logic_error("finalize requires all rounds executed");
  const BlockCtx ctx = make_ctx(inst, state.src_cells);
  std::vector<std::uint64_t> viewA(static_cast<std::size_t>(r));
  std::vector<std::uint64_t> viewB(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) {
    const bool j_by_a = parity(j + 1) == 1;
    viewA[std::size_t(j)] =
        j_by_a ? state.sent[std::size_t(j)] : state.dec[std::size_t(j)];
    viewB[std::size_t(j)] =
        j_by_a ? state.dec[std::size_t(j)] : state.sent[std::size_t(j)];
  }
  std::vector<std::size_t> y1syms(std::size_t(n), 0),
      y2syms(std::size_t(n), 0);
  auto sample_row = [&](const double* row, std::size_t m) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = 0, lastnz = 0;
    for (std::size_t c = 0; c < m; ++c) {
      if (row[c] > 0.0) lastnz = c;
      acc += row[c];
      if (u < acc) return c;
      pick = lastnz;
    }
    return pick;
  };
  if (inst.has_y1) {
    const auto rows = kernel_rows(inst, inst.y1k, viewA, r, ctx.x1);
    const std::size_t m = inst.y1k.output_cells();
    for (int t = 0; t < n; ++t) {
      y1syms[std::size_t(t)] = sample_row(rows[std::size_t(t)], m);
      state.y1 = state.y1 * m + y1syms[std::size_t(t)];
    }
  }
  if (inst.has_y2) {
    const auto rows = kernel_rows(inst, inst.y2k, viewB, r, ctx.x2);
    const std::size_t m = inst.y2k.output_cells();
    for (int t = 0; t < n; ++t) {
      y2syms[std::size_t(t)] = sample_row(rows[std::size_t(t)], m);
      state.y2 = state.y2 * m + y2syms[std::size_t(t)];
    }
  }
  if (inst.has_s) {
    const std::size_t m = inst.sk.output_cells();
    for (int t = 0; t < n; ++t) {
      const double* row =
          &inst.sk.rows[s_input(inst, ctx, t, y1syms[std::size_t(t)],
                                y2syms[std::size_t(t)]) *
                        m];
      state.s = state.s * m + sample_row(row, m);
    }
  }
  state.ta = inst.tbin.bin_of(viewA);
  state.tb = inst.tbin.bin_of(viewB);
  state.finalized = true;
}

// ------------------- public: exact execution -------------------

InducedPmf run_exact(const ProtocolInstance& inst) {
  InducedPmf out;
  const int n = inst.n, r = inst.a.r;
  out.r = r;
  checked_pow(inst.source.cell_count(), n, inst.budget,
              "source block enumeration");
  if (inst.shared_count > inst.budget)
    throw BudgetError("shared-randomness enumeration exceeds the cell budget");
  std::vector<std::size_t> nz;
  for (std::size_t c = 0; c < inst.source.cell_count(); ++c)
    if (inst.source.table()[c] > 0.0) nz.push_back(c);
  if (nz.empty()) throw std::logic_error("source pmf has empty support");
  const std::size_t C = inst.source.cell_count();
  std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> cells(static_cast<std::size_t>(n));
  Key key(out.key_width(), 0);
  while (true) {
    double src_mass = 1.0;
    std::uint64_t srcseq = 0;
    for (int t = 0; t < n; ++t) {
      cells[std::size_t(t)] = nz[pos[std::size_t(t)]];
      src_mass *= inst.source.table()[cells[std::size_t(t)]];
      srcseq = srcseq * C + cells[std::size_t(t)];
    }
    const BlockCtx ctx = make_ctx(inst, cells);
    for_each_path(
        inst, ctx,
        [&](const PathInfo& p) {
          const double base = src_mass * p.prob;
          if (!(base > 0.0)) return;
          out.fallback_expect += base * p.fallbacks;
          if (p.fallbacks > 0) out.fallback_mass += base;
          key[out.idx_src()] = srcseq;
          key[out.idx_omega()] = p.omega;
          for (int i = 1; i <= r; ++i) {
            key[out.idx_b(i)] = p.b[std::size_t(i - 1)];
            key[out.idx_sent(i)] = p.sent[std::size_t(i - 1)];
            key[out.idx_dec(i)] = p.dec[std::size_t(i - 1)];
            key[out.idx_k(i)] = p.k[std::size_t(i - 1)];
          }
          key[out.idx_ta()] = inst.tbin.bin_of(p.viewA);
          key[out.idx_tb()] = inst.tbin.bin_of(p.viewB);
          expand_downstream(
              inst, ctx, p,
              [&](std::uint64_t y1s, std::uint64_t y2s, std::uint64_t ss,
                  double dmass) {
                key[out.idx_y1()] = y1s;
                key[out.idx_y2()] = y2s;
                key[out.idx_s()] = ss;
                out.atoms[key] += base * dmass;
                if (out.atoms.size() > inst.budget)
                  throw BudgetError(
                      "induced distribution exceeds the cell budget");
              });
        },
        inst.budget);
    int t = n - 1;
    while (t >= 0) {
      if (++pos[std::size_t(t)] < nz.size()) break;
      pos[std::size_t(t)] = 0;
      --t;
    }
    if (t < 0) break;
  }
  return out;
}

// ------------------- public: measurement -------------------

SimulationReport measure(const ProtocolInstance& inst,
                         const InducedPmf& induced) {
  const int r = inst.a.r, n = inst.n;
  if (induced.r != r)
    throw std::invalid_argument("induced distribution round count mismatch");
  SimulationReport rep;
  rep.n = n;
  rep.seed = inst.seed;
  rep.mode = "exact";
  rep.estimator = "exact";
  rep.r = r;
  rep.sw_error.assign(std::size_t(r), 0.0);

  double total = 0.0;
  for (const auto& [k, v] : induced.atoms) {
    (void)k;
    total += v;
  }
  rep.normalization_gap = std::fabs(total - 1.0);
  if (!(total > 0.0) || rep.normalization_gap > 1e-9) {
    std::ostringstream os;
    os << "induced distribution mass " << format_double(total)
       << " violates normalization";
    throw std::logic_error(os.str());
  }

  for (const auto& [k, v] : induced.atoms) {
    for (int i = 1; i <= r; ++i)
      if (k[induced.idx_sent(i)] != k[induced.idx_dec(i)])
        rep.sw_error[std::size_t(i - 1)] += v;
    if (k[induced.idx_ta()] != k[induced.idx_tb()]) rep.key_agree_error += v;
  }
  for (double& v : rep.sw_error) v /= total;
  rep.key_agree_error /= total;
  double sw_sum = 0.0;
  for (double v : rep.sw_error) sw_sum += v;
  if (rep.key_agree_error > sw_sum + 1e-12)
    throw std::logic_error(
        "key agreement error exceeds the union bound over decode errors");

  // Augment every atom with the eavesdropper's source sequence Z^n so all
  // information functionals below are plain index projections.
  Sparse aug;
  {
    std::map<std::uint64_t, std::uint64_t> zcache;
    Key k2(induced.key_width() + 1);
    for (const auto& [k, v] : induced.atoms) {
      std::copy(k.begin(), k.end(), k2.begin());
      std::uint64_t z = 0;
      if (inst.has_z) {
        const std::uint64_t srcseq = k[induced.idx_src()];
        auto it = zcache.find(srcseq);
        if (it == zcache.end()) {
          std::vector<std::size_t> cells(static_cast<std::size_t>(n));
          std::uint64_t s = srcseq;
          for (int t = n - 1; t >= 0; --t) {
            cells[std::size_t(t)] = std::size_t(s % inst.source.cell_count());
            s /= inst.source.cell_count();
          }
          const BlockCtx ctx = make_ctx(inst, cells);
          it = zcache.emplace(srcseq, fold_z(inst, ctx)).first;
        }
        z = it->second;
      }
      k2.back() = z;
      aug[k2] = v;
    }
  }
  const std::size_t zix = induced.key_width();

  std::vector<std::size_t> ix_k, ix_b;
  for (int i = 1; i <= r; ++i) ix_k.push_back(induced.idx_k(i));
  for (int i = 1; i <= r; ++i) ix_b.push_back(induced.idx_b(i));

  // Fidelity: induced vs i.i.d. target, overall and conditioned on each
  // shared-randomness value. In key mode the report also scores the key
  // tuple (Z^n, S^n, key A, key B) against the ideal uniform-agreed-
  // independent key law, and tv_error is the larger of the two — the ideal
  // functionality must deliver both the simulation and the key.
  TargetCtx tc(inst);
  KeyTargetCtx kc(inst);
  const std::vector<std::size_t> simix{induced.idx_src(), induced.idx_y1(),
                                       induced.idx_y2(), induced.idx_s()};
  const std::vector<std::size_t> keyix{zix, induced.idx_s(), induced.idx_ta(),
                                       induced.idx_tb()};
  const std::uint64_t tbins = inst.tbin.bins();
  {
    rep.tv_sim = tv_target(project(aug, simix), tc, n);
    if (inst.key_mode)
      rep.tv_key = tv_key_target(project(aug, keyix), kc, n);
    rep.tv_error = std::max(rep.tv_sim, rep.tv_key);
    rep.epsilon = rep.tv_error;
  }
  {
    std::vector<std::size_t> shix{induced.idx_omega()};
    for (int i = 1; i <= r; ++i) shix.push_back(induced.idx_b(i));
    // Conditioning on a shared value divides by its exact probability
    // 1/shared_count, i.e. multiplies the group atoms by shared_count.
    std::map<Key, std::pair<Sparse, Sparse>> groups;
    Key sk(shix.size()), tk(simix.size()), kk(keyix.size());
    const double scale = double(inst.shared_count);
    for (const auto& [k, v] : aug) {
      for (std::size_t j = 0; j < shix.size(); ++j) sk[j] = k[shix[j]];
      auto& g = groups[sk];
      for (std::size_t j = 0; j < simix.size(); ++j) tk[j] = k[simix[j]];
      g.first[tk] += v * scale;
      if (inst.key_mode) {
        for (std::size_t j = 0; j < keyix.size(); ++j) kk[j] = k[keyix[j]];
        g.second[kk] += v * scale;
      }
    }
    bool first = true;
    for (auto& [skey, g] : groups) {
      double tv = tv_target(g.first, tc, n);
      if (inst.key_mode) tv = std::max(tv, tv_key_target(g.second, kc, n));
      if (first || tv < rep.best_shared_tv) {
        rep.best_shared_tv = tv;
        rep.best_shared = skey;
      }
      if (first || tv > rep.worst_shared_tv) {
        rep.worst_shared_tv = tv;
        rep.worst_shared = skey;
      }
      first = false;
    }
  }

  // Strong-secrecy leakage |I(S^n; Z^n, K) - n I(S;Z)|, split by the chain
  // rule into the message part I(S^n; K | Z^n) and the source-coupling part
  // I(S^n; Z^n) - n I(S;Z); the latter is exactly 0 whenever the induced
  // (S^n, Z^n) marginal factorizes into the i.i.d. target.
  if (inst.has_s) {
    const std::vector<std::size_t> ix_s{induced.idx_s()};
    const std::vector<std::size_t> ix_z{zix};
    rep.leakage_excess = sparse_cmi(aug, total, ix_s, ix_k, ix_z);
    double coupling = 0.0;
    if (inst.has_z) {
      const Sparse SZ = project(aug, cat_ix(ix_s, ix_z));
      const JointPmf qsz = marginalize(inst.a.joint, {"S", "Z"});
      std::size_t supp = 0;
      for (double c : qsz.table())
        if (c > 0.0) ++supp;
      const std::size_t s_sz = inst.sk.output_cells();
      const std::size_t z_sz =
          inst.source.vars()[std::size_t(inst.src_z)].symbols.size();
      const std::size_t s_pos = qsz.var_index("S"), z_pos = qsz.var_index("Z");
      bool exact_iid = true;
      long double support = 1.0L;
      for (int t = 0; t < n; ++t) support *= (long double)supp;
      if (!((long double)SZ.size() == support)) exact_iid = false;
      std::vector<std::size_t> ssyms, zsyms, cell(2);
      for (const auto& [k, v] : SZ) {
        if (!exact_iid) break;
        seq_syms(k[0], s_sz, n, ssyms);
        seq_syms(k[1], z_sz, n, zsyms);
        double q = 1.0;
        for (int t = 0; t < n; ++t) {
          cell[s_pos] = ssyms[std::size_t(t)];
          cell[z_pos] = zsyms[std::size_t(t)];
          q *= qsz.table()[qsz.encode_cell(cell)];
        }
        if (std::fabs(v / total - q) > 1e-12) exact_iid = false;
      }
      if (!exact_iid)
        coupling = sparse_mi(aug, total, ix_s, ix_z) -
                   double(n) * mutual_info(inst.a.joint, {"S"}, {"Z"});
    }
    rep.leakage = std::fabs(rep.leakage_excess + coupling);
  }

  // Key secrecy and quality.
  {
    std::vector<std::size_t> ix_e{induced.idx_s(), zix};
    ix_e.insert(ix_e.end(), ix_k.begin(), ix_k.end());
    ix_e.insert(ix_e.end(), ix_b.begin(), ix_b.end());
    rep.key_leak =
        sparse_mi(aug, total, {induced.idx_ta()}, ix_e);
    const Sparse T = project(aug, {induced.idx_ta()});
    const double u = 1.0 / double(tbins);
    long double acc = 0.0L;
    for (const auto& [k, v] : T) {
      (void)k;
      acc += std::fabs((long double)(v / total) - (long double)u);
    }
    acc += (long double)(tbins - std::min<std::uint64_t>(tbins, T.size())) *
           (long double)u;
    rep.key_uniformity = double(0.5L * acc);
  }

  // Bin-conditioning factorization: the downstream kernel given the sources
  // and both transcript reconstructions must not depend on the shared bin
  // values.
  {
    std::vector<std::size_t> up0{induced.idx_src()};
    for (int i = 1; i <= r; ++i) up0.push_back(induced.idx_sent(i));
    for (int i = 1; i <= r; ++i) up0.push_back(induced.idx_dec(i));
    std::vector<std::size_t> up1(up0);
    up1.push_back(induced.idx_omega());
    for (int i = 1; i <= r; ++i) up1.push_back(induced.idx_b(i));
    const std::vector<std::size_t> down{induced.idx_y1(), induced.idx_y2(),
                                        induced.idx_s()};
    const Sparse m0 = project(aug, up0);
    const Sparse m0d = project(aug, cat_ix(up0, down));
    const Sparse m1 = project(aug, up1);
    const Sparse m1d = project(aug, cat_ix(up1, down));
    double dev = 0.0;
    Key u1(up1.size()), u0(up0.size()), d0(up0.size() + down.size());
    for (const auto& [k, v] : m1d) {
      std::copy(k.begin(), k.begin() + std::ptrdiff_t(up1.size()), u1.begin());
      std::copy(k.begin(), k.begin() + std::ptrdiff_t(up0.size()), u0.begin());
      std::copy(u0.begin(), u0.end(), d0.begin());
      std::copy(k.begin() + std::ptrdiff_t(up1.size()), k.end(),
                d0.begin() + std::ptrdiff_t(up0.size()));
      const double c1 = v / m1.at(u1);
      const double c0 = m0d.at(d0) / m0.at(u0);
      dev = std::max(dev, std::fabs(c1 - c0));
    }
    rep.factorization_dev = dev;
    if (dev > 1e-10)
      throw std::logic_error(
          "bin-conditioning factorization violated in the induced "
          "distribution");
  }

  rep.fallback_count = induced.fallback_expect / total;
  return rep;
}

// ------------------- public: Monte-Carlo execution -------------------

namespace {

struct Accum {
  long double s = 0.0L, s2 = 0.0L;
  void add(double x) {
    s += x;
    s2 += (long double)x * x;
  }
  double mean(std::uint64_t nn) const { return nn ? double(s / nn) : 0.0; }
  double se(std::uint64_t nn) const {
    if (nn < 2) return 0.0;
    const long double m = s / nn;
    long double var = (s2 - (long double)nn * m * m) / (long double)(nn - 1);
    if (var < 0.0L) var = 0.0L;
    return std::sqrt(double(var / (long double)nn));
  }
};

/// One trial's Rao-Blackwell pass: exact per-round error masses and the
/// conditional downstream / key-tuple laws given the trial's source block
/// and shared values. `want_sim` skips the (larger) downstream law when the
/// caller only needs the key tuple.
struct TrialCond {
  std::vector<double> sw;
  double agree = 0.0;
  Sparse datoms;  // (y1 seq, y2 seq, s seq) conditional law
  Sparse katoms;  // (z seq, s seq, key A, key B) conditional law (key mode)
  Sparse tdist;   // conditional key-A marginal
};

TrialCond trial_conditionals(const ProtocolInstance& inst, const BlockCtx& ctx,
                             bool want_sim) {
  TrialCond out;
  out.sw.assign(std::size_t(inst.a.r), 0.0);
  const std::uint64_t zq = inst.key_mode ? fold_z(inst, ctx) : 0;
  Key dk(3), kk(4);
  for_each_path(
      inst, ctx,
      [&](const PathInfo& p) {
        for (int i = 0; i < inst.a.r; ++i)
          if (p.sent[std::size_t(i)] != p.dec[std::size_t(i)])
            out.sw[std::size_t(i)] += p.prob;
        const std::uint64_t ta = inst.tbin.bin_of(p.viewA);
        const std::uint64_t tb = inst.tbin.bin_of(p.viewB);
        if (ta != tb) out.agree += p.prob;
        out.tdist[{ta}] += p.prob;
        expand_downstream(
            inst, ctx, p,
            [&](std::uint64_t y1s, std::uint64_t y2s, std::uint64_t ss,
                double dmass) {
              if (want_sim) {
                dk[0] = y1s;
                dk[1] = y2s;
                dk[2] = ss;
                out.datoms[dk] += p.prob * dmass;
              }
              if (inst.key_mode) {
                kk[0] = zq;
                kk[1] = ss;
                kk[2] = ta;
                kk[3] = tb;
                out.katoms[kk] += p.prob * dmass;
              }
              if (out.datoms.size() > inst.budget ||
                  out.katoms.size() > inst.budget)
                throw BudgetError(
                    "conditional enumeration exceeds the cell budget");
            });
      },
      inst.budget);
  return out;
}

SimulationReport mc_run(const ProtocolInstance& inst, std::uint64_t trials,
                        std::uint64_t stream, bool rb) {
  const int r = inst.a.r, n = inst.n;
  SimulationReport rep;
  rep.n = n;
  rep.seed = inst.seed;
  rep.mode = "mc";
  rep.r = r;
  rep.trials = trials;
  rep.stream = stream;
  rep.estimator = rb ? "rao-blackwell" : "plug-in";
  rep.mi_note = mc_note();
  rep.sw_error.assign(std::size_t(r), 0.0);
  rep.sw_se.assign(std::size_t(r), 0.0);

  Accum a_tvs, a_ag;
  std::vector<Accum> a_sw(static_cast<std::size_t>(r));
  Sparse tmarg;  // averaged conditional key marginal (rb mode)
  Sparse ksum;   // summed conditional key-tuple laws (rb + key mode)
  std::map<Key, std::uint64_t> cS, cZ, cSZ, cZK, cSZK, cT, cE, cTE, cTv, cKey;
  std::uint64_t fb_events = 0;
  const std::uint64_t tbins = inst.tbin.bins();
  KeyTargetCtx kc(inst);
  if (rb && inst.key_mode && kc.support_n(n) > (long double)inst.budget)
    throw BudgetError("key target support exceeds the cell budget");
  const std::size_t down_oc =
      inst.down_vars.empty() ? 1 : inst.down.output_cells();
  const std::size_t sy1 = inst.has_y1 ? inst.y1k.output_cells() : 1;
  const std::size_t sy2 = inst.has_y2 ? inst.y2k.output_cells() : 1;
  const std::size_t ssz = inst.has_s ? inst.sk.output_cells() : 1;

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    CounterRng rng(inst.seed, stream, trial);
    ProtocolState st = init_state(inst, rng);

    if (rb) {
      const BlockCtx ctx = make_ctx(inst, st.src_cells);
      const TrialCond tcnd = trial_conditionals(inst, ctx, true);

      // Conditional simulation target: prod_t p(downstream | source cell_t).
      long double diff = 0.0L, qvis = 0.0L;
      std::uint64_t vis = 0;
      long double support = 1.0L;
      std::vector<const double*> drow(std::size_t(n), nullptr);
      if (!inst.down_vars.empty()) {
        for (int t = 0; t < n; ++t) {
          drow[std::size_t(t)] =
              &inst.down.rows[ctx.cells[std::size_t(t)] * down_oc];
          std::size_t cnt = 0;
          for (std::size_t c = 0; c < down_oc; ++c)
            if (drow[std::size_t(t)][c] > 0.0) ++cnt;
          support *= (long double)cnt;
        }
      }
      std::vector<std::size_t> y1syms, y2syms, ssyms;
      for (const auto& [k, v] : tcnd.datoms) {
        const double p = v;
        double q = 1.0;
        if (!inst.down_vars.empty()) {
          if (inst.has_y1) seq_syms(k[0], sy1, n, y1syms);
          if (inst.has_y2) seq_syms(k[1], sy2, n, y2syms);
          if (inst.has_s) seq_syms(k[2], ssz, n, ssyms);
          for (int t = 0; t < n && q > 0.0; ++t) {
            std::size_t cell = 0;
            if (inst.has_y1) cell = cell * sy1 + y1syms[std::size_t(t)];
            if (inst.has_y2) cell = cell * sy2 + y2syms[std::size_t(t)];
            if (inst.has_s) cell = cell * ssz + ssyms[std::size_t(t)];
            q *= drow[std::size_t(t)][cell];
          }
        }
        if (q > 0.0) {
          qvis += q;
          ++vis;
        }
        diff += std::fabs((long double)p - (long double)q);
      }
      long double rest = 0.0L;
      if (!((long double)vis == support)) rest = std::max(0.0L, 1.0L - qvis);
      const double tv_t = double(0.5L * (diff + rest));

      double sw_sum = 0.0;
      for (double v : tcnd.sw) sw_sum += v;
      if (tcnd.agree > sw_sum + 1e-12)
        throw std::logic_error(
            "key agreement error exceeds the union bound over decode errors");
      a_tvs.add(tv_t);
      a_ag.add(tcnd.agree);
      for (int i = 0; i < r; ++i)
        a_sw[std::size_t(i)].add(tcnd.sw[std::size_t(i)]);
      for (const auto& [k, v] : tcnd.tdist) tmarg[k] += v;
      for (const auto& [k, v] : tcnd.katoms) ksum[k] += v;
    }

    for (int i = 1; i <= r; ++i) run_round(inst, i, st, rng);
    finalize(inst, st, rng);
    fb_events += std::uint64_t(st.fallbacks);

    const BlockCtx ctx = make_ctx(inst, st.src_cells);
    const std::uint64_t zseq = fold_z(inst, ctx);
    Key ks{st.s}, kz{zseq}, ksz{st.s, zseq};
    Key kzk{zseq};
    for (std::uint64_t v : st.k) kzk.push_back(v);
    Key kszk{st.s};
    kszk.insert(kszk.end(), kzk.begin(), kzk.end());
    Key kt{st.ta};
    Key ke{st.s, zseq};
    for (std::uint64_t v : st.k) ke.push_back(v);
    for (std::uint64_t v : st.b) ke.push_back(v);
    Key kte{st.ta};
    kte.insert(kte.end(), ke.begin(), ke.end());
    ++cS[ks];
    ++cZ[kz];
    ++cSZ[ksz];
    ++cZK[kzk];
    ++cSZK[kszk];
    ++cT[kt];
    ++cE[ke];
    ++cTE[kte];
    if (!rb) {
      for (int i = 0; i < r; ++i)
        a_sw[std::size_t(i)].add(
            st.sent[std::size_t(i)] != st.dec[std::size_t(i)] ? 1.0 : 0.0);
      a_ag.add(st.ta != st.tb ? 1.0 : 0.0);
      Key tk(ctx.cells.begin(), ctx.cells.end());
      tk.push_back(st.y1);
      tk.push_back(st.y2);
      tk.push_back(st.s);
      ++cTv[tk];
      if (inst.key_mode) ++cKey[Key{zseq, st.s, st.ta, st.tb}];
    }
  }

  for (int i = 0; i < r; ++i) {
    rep.sw_error[std::size_t(i)] = a_sw[std::size_t(i)].mean(trials);
    rep.sw_se[std::size_t(i)] = a_sw[std::size_t(i)].se(trials);
  }
  rep.key_agree_error = a_ag.mean(trials);
  rep.key_agree_se = a_ag.se(trials);

  if (rb) {
    rep.tv_sim = a_tvs.mean(trials);
    rep.tv_sim_se = a_tvs.se(trials);
    if (inst.key_mode) {
      // Sign-fixed two-pass key-fidelity estimator. Averaging the per-trial
      // conditional key-tuple laws gives an unbiased estimate of every atom
      // probability; freezing the comparison signs at those estimates and
      // re-scoring each trial makes the per-trial scores an i.i.d. sample
      // whose mean is exactly the TV of the averaged law and whose spread
      // is an honest standard error. (Averaging per-trial conditional TVs
      // instead would over-condition and inflate the estimate.)
      std::map<Key, std::pair<double, double>> signq;  // atom -> (sign, q)
      kc.for_each_target(n, inst.budget, [&](const Key& k, double q) {
        signq[k] = {-1.0, q};
      });
      for (const auto& [k, v] : ksum) {
        auto it = signq.find(k);
        const double q = it != signq.end()
                             ? it->second.second
                             : kc.q_of(k[0], k[1], k[2], k[3], n);
        signq[k] = {v / double(trials) >= q ? 1.0 : -1.0, q};
        if (signq.size() > inst.budget)
          throw BudgetError("key tuple support exceeds the cell budget");
      }
      double base = 0.0;
      for (const auto& [k, sq] : signq) {
        (void)k;
        base -= sq.first * sq.second;
      }
      Accum a_tvk;
      for (std::uint64_t trial = 0; trial < trials; ++trial) {
        CounterRng rng(inst.seed, stream, trial);
        ProtocolState st = init_state(inst, rng);
        const BlockCtx ctx = make_ctx(inst, st.src_cells);
        const TrialCond tcnd = trial_conditionals(inst, ctx, false);
        double vi = base;
        for (const auto& [k, v] : tcnd.katoms) vi += signq.at(k).first * v;
        a_tvk.add(0.5 * vi);
      }
      rep.tv_key = std::max(0.0, a_tvk.mean(trials));
      rep.tv_key_se = a_tvk.se(trials);
    }
  } else {
    // Plug-in fidelity from the empirical joint over realized blocks.
    TargetCtx tc(inst);
    long double diff = 0.0L, qvis = 0.0L;
    for (const auto& [k, cnt] : cTv) {
      const double p = double(cnt) / double(trials);
      std::uint64_t srcseq = 0;
      for (int t = 0; t < n; ++t)
        srcseq = srcseq * inst.source.cell_count() + k[std::size_t(t)];
      const double q = tc.q_of(srcseq, k[std::size_t(n)],
                               k[std::size_t(n) + 1], k[std::size_t(n) + 2]);
      if (q > 0.0) qvis += q;
      diff += std::fabs((long double)p - (long double)q);
    }
    rep.tv_sim = double(0.5L * (diff + std::max(0.0L, 1.0L - qvis)));
    if (inst.key_mode) {
      long double kdiff = 0.0L, kqvis = 0.0L;
      for (const auto& [k, cnt] : cKey) {
        const double p = double(cnt) / double(trials);
        const double q = kc.q_of(k[0], k[1], k[2], k[3], n);
        if (q > 0.0) kqvis += q;
        kdiff += std::fabs((long double)p - (long double)q);
      }
      rep.tv_key = double(0.5L * (kdiff + std::max(0.0L, 1.0L - kqvis)));
    }
  }
  rep.tv_error = std::max(rep.tv_sim, rep.tv_key);
  rep.tv_se = (inst.key_mode && rep.tv_key >= rep.tv_sim) ? rep.tv_key_se
                                                          : rep.tv_sim_se;
  rep.epsilon = rep.tv_error;

  if (inst.has_s) {
    rep.leakage = std::fabs(
        mm_mi(cS, cZK, cSZK, trials) -
        (inst.has_z ? double(n) * mutual_info(inst.a.joint, {"S"}, {"Z"})
                    : 0.0));
    // Message part I(S;K|Z) = H(SZ) + H(ZK) - H(SZK) - H(Z), plug-in.
    if (cS.size() > 1 && cZK.size() > 1) {
      const double v = mm_entropy(cSZ, trials) + mm_entropy(cZK, trials) -
                       mm_entropy(cSZK, trials) - mm_entropy(cZ, trials);
      rep.leakage_excess = v > 0.0 ? v : 0.0;
    }
  }
  rep.key_leak = mm_mi(cT, cE, cTE, trials);

  {
    const double u = 1.0 / double(tbins);
    long double acc = 0.0L;
    std::uint64_t seen = 0;
    if (rb) {
      for (const auto& [k, v] : tmarg) {
        (void)k;
        acc += std::fabs((long double)(v / double(trials)) - (long double)u);
        ++seen;
      }
    } else {
      for (const auto& [k, v] : cT) {
        (void)k;
        acc += std::fabs((long double)(double(v) / double(trials)) -
                         (long double)u);
        ++seen;
      }
    }
    acc += (long double)(tbins - std::min<std::uint64_t>(tbins, seen)) *
           (long double)u;
    rep.key_uniformity = double(0.5L * acc);
  }

  rep.fallback_count = double(fb_events) / double(trials);
  return rep;
}

}  // namespace

SimulationReport run_monte_carlo(const ProtocolInstance& inst,
                                 std::uint64_t trials, std::uint64_t stream) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  try {
    return mc_run(inst, trials, stream, true);
  } catch (const BudgetError&) {
    return mc_run(inst, trials, stream, false);
  }
}

// ------------------- public: sweep and serialization -------------------

std::vector<SimulationReport> sweep(const AuxScheme& a,
                                    const ProtocolRates& rates, Mode mode,
                                    const std::vector<int>& n_list,
                                    const std::vector<std::uint64_t>& seeds,
                                    bool exact, std::uint64_t trials,
                                    std::uint64_t stream, std::size_t budget) {
  std::vector<SimulationReport> out;
  for (int n : n_list) {
    for (std::uint64_t seed : seeds) {
      const ProtocolInstance inst = build(a, n, rates, seed, mode, budget);
      if (exact) {
        out.push_back(measure(inst, run_exact(inst)));
      } else {
        out.push_back(run_monte_carlo(inst, trials, stream));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SimulationReport& x, const SimulationReport& y) {
              if (x.n != y.n) return x.n < y.n;
              return x.seed < y.seed;
            });
  return out;
}

std::string SimulationReport::csv_header(int r) {
  std::string h = "n,seed,mode,tv_error,leakage";
  for (int i = 1; i <= r; ++i) h += ",sw_error_" + std::to_string(i);
  h += ",key_leak,key_uniformity,key_agree_error,fallback_count";
  return h;
}

std::string SimulationReport::csv_row() const {
  std::ostringstream os;
  os << n << ',' << seed << ',' << mode << ',' << format_double(tv_error)
     << ',' << format_double(leakage);
  for (double v : sw_error) os << ',' << format_double(v);
  os << ',' << format_double(key_leak) << ',' << format_double(key_uniformity)
     << ',' << format_double(key_agree_error) << ','
     << format_double(fallback_count);
  return os.str();
}

std::string sweep_csv(const std::vector<SimulationReport>& reports) {
  if (reports.empty()) return SimulationReport::csv_header(0) + "\n";
  const int r = reports.front().r;
  for (const auto& rep : reports)
    if (rep.r != r)
      throw std::invalid_argument("sweep reports disagree on the round count");
  std::string out = SimulationReport::csv_header(r) + "\n";
  for (const auto& rep : reports) out += rep.csv_row() + "\n";
  return out;
}

nlohmann::ordered_json SimulationReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["seed"] = seed;
  j["mode"] = mode;
  j["r"] = r;
  j["tv_error"] = tv_error;
  j["epsilon"] = epsilon;
  j["tv_sim"] = tv_sim;
  j["tv_key"] = tv_key;
  j["leakage"] = leakage;
  j["leakage_excess"] = leakage_excess;
  j["sw_error"] = sw_error;
  j["key_leak"] = key_leak;
  j["key_uniformity"] = key_uniformity;
  j["key_agree_error"] = key_agree_error;
  j["fallback_count"] = fallback_count;
  j["normalization_gap"] = normalization_gap;
  j["estimator"] = estimator;
  if (mode == "exact") {
    j["factorization_dev"] = factorization_dev;
    j["best_shared"] = {{"values", best_shared}, {"tv", best_shared_tv}};
    j["worst_shared"] = {{"values", worst_shared}, {"tv", worst_shared_tv}};
  } else {
    j["trials"] = trials;
    j["stream"] = stream;
    j["tv_se"] = tv_se;
    j["tv_sim_se"] = tv_sim_se;
    j["tv_key_se"] = tv_key_se;
    j["sw_se"] = sw_se;
    j["key_agree_se"] = key_agree_se;
    j["mi_note"] = mi_note;
  }
  return j;
}

nlohmann::ordered_json InducedPmf::to_json() const {
  nlohmann::ordered_json j;
  j["r"] = r;
  j["fallback_expect"] = fallback_expect;
  j["fallback_mass"] = fallback_mass;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [k, v] : atoms) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    a.push_back(k);
    a.push_back(v);
    arr.push_back(std::move(a));
  }
  j["atoms"] = std::move(arr);
  return j;
}

}  // namespace chansim
