#pragma once

// Brute-force reference implementations working purely on member labels.
// Nothing here calls the library's signature, coverage, grouping or
// distance code: every set is enumerated from the raw rollup paths and the
// fact rows, and library ids are only ever turned into labels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/random_instance.hpp"

namespace oracle {

using Tuple = std::vector<std::size_t>;             // base path index per dimension
using LabelCoord = std::vector<std::string>;        // member label per dimension
using Cells = std::map<LabelCoord, std::vector<double>>;

struct LCond {
  std::vector<int> level;                   // per dimension; height means unconstrained
  std::vector<std::set<std::string>> vals;  // labels at that level
  bool operator==(const LCond&) const = default;
};

struct LQuery {
  LCond cond;
  std::vector<int> groupers;
  std::vector<std::pair<std::string, int>> aggs;  // (function name, measure index)
  std::vector<std::string> labels;                // "fn(M)" per aggregate
};

inline std::string fn_name(AggFn f) {
  switch (f) {
    case AggFn::sum: return "sum";
    case AggFn::avg: return "avg";
    case AggFn::count: return "count";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
  }
  return "?";
}

/// ref names the cell measure `label` verbatim, or is the measure inside "fn(ref)".
inline bool names_measure(const std::string& ref, const std::string& label) {
  if (ref == label) return true;
  std::string tail = "(" + ref + ")";
  return label.size() > tail.size() && label.compare(label.size() - tail.size(), tail.size(), tail) == 0 &&
         label.find('(') == label.size() - tail.size();
}

class Oracle {
 public:
  explicit Oracle(const Instance& inst) : inst_(inst) {
    std::size_t n = inst.raw.size();
    tuples_.push_back({});
    for (std::size_t d = 0; d < n; ++d) {
      std::vector<Tuple> next;
      for (const auto& t : tuples_)
        for (std::size_t b = 0; b < inst.raw[d].paths.size(); ++b) {
          Tuple u = t;
          u.push_back(b);
          next.push_back(std::move(u));
        }
      tuples_ = std::move(next);
    }
  }

  std::size_t dims() const { return inst_.raw.size(); }
  int height(std::size_t d) const { return static_cast<int>(inst_.raw[d].levels.size()); }

  std::string anc(std::size_t d, std::size_t b, int level) const {
    return level == height(d) ? std::string("all") : inst_.raw[d].paths[b][level];
  }

  // ---- lifting library objects into label space

  std::string label_of(std::size_t d, int level, MemberId id) const {
    return inst_.cube.schema().dims[d].label({level, id});
  }

  LabelCoord labels_of(const LevelVector& levels, const Coord& c) const {
    LabelCoord out;
    for (std::size_t d = 0; d < dims(); ++d) out.push_back(label_of(d, levels[d], c[d]));
    return out;
  }

  LCond lift(const SelectionCondition& c) const {
    LCond out;
    for (std::size_t d = 0; d < dims(); ++d) {
      const AtomicFilter* a = c.find(static_cast<int>(d));
      if (!a || a->level == height(d)) {
        out.level.push_back(height(d));
        out.vals.push_back({"all"});
      } else {
        out.level.push_back(a->level);
        std::set<std::string> v;
        for (MemberId id : a->values) v.insert(label_of(d, a->level, id));
        out.vals.push_back(std::move(v));
      }
    }
    return out;
  }

  LQuery lift(const CubeQuery& q) const {
    LQuery out{lift(q.condition), q.groupers, {}, {}};
    for (const auto& a : q.aggregates) {
      out.aggs.emplace_back(fn_name(a.fn), a.measure);
      out.labels.push_back(fn_name(a.fn) + "(" + inst_.cube.schema().measures[a.measure] + ")");
    }
    return out;
  }

  // ---- sets

  bool passes(const LCond& c, const Tuple& t) const {
    for (std::size_t d = 0; d < dims(); ++d)
      if (!c.vals[d].count(anc(d, t[d], c.level[d]))) return false;
    return true;
  }

  std::set<Tuple> signature(const LCond& c) const {
    std::set<Tuple> out;
    for (const auto& t : tuples_)
      if (passes(c, t)) out.insert(t);
    return out;
  }

  std::set<std::size_t> rows(const LCond& c) const {
    std::set<std::size_t> out;
    for (std::size_t r = 0; r < inst_.row_base.size(); ++r)
      if (passes(c, inst_.row_base[r])) out.insert(r);
    return out;
  }

  LabelCoord rollup(const Tuple& t, const std::vector<int>& levels) const {
    LabelCoord out;
    for (std::size_t d = 0; d < dims(); ++d) out.push_back(anc(d, t[d], levels[d]));
    return out;
  }

  std::map<LabelCoord, std::set<std::size_t>> groups(const LQuery& q) const {
    std::map<LabelCoord, std::set<std::size_t>> out;
    for (std::size_t r : rows(q.cond)) out[rollup(inst_.row_base[r], q.groupers)].insert(r);
    return out;
  }

  Cells evaluate(const LQuery& q) const {
    Cells out;
    for (const auto& [c, rs] : groups(q)) {
      std::vector<double> vals;
      for (const auto& [fn, m] : q.aggs) {
        double sum = 0, mn = INFINITY, mx = -INFINITY;
        for (std::size_t r : rs) {
          double v = inst_.row_values[r][m];
          sum += v;
          mn = std::min(mn, v);
          mx = std::max(mx, v);
        }
        double n = static_cast<double>(rs.size());
        vals.push_back(fn == "sum" ? sum : fn == "avg" ? sum / n : fn == "count" ? n : fn == "min" ? mn : mx);
      }
      out[c] = std::move(vals);
    }
    return out;
  }

  Cells lift(const CellSet& cs) const {
    Cells out;
    for (const auto& c : cs.cells) out[labels_of(cs.levels, c.coord)] = c.measures;
    return out;
  }

  static double novel(std::size_t covered, std::size_t total) {
    return total == 0 ? 1.0 : static_cast<double>(total - covered) / static_cast<double>(total);
  }
  static double relevant(std::size_t covered, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
  }
  static bool same_aggs(const LQuery& a, const LQuery& b) {
    auto x = a.aggs, y = b.aggs;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  }

  // ---- novelty

  double fslsn(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    LQuery lq = lift(q);
    for (const auto& x : h) {
      LQuery lx = lift(x);
      // identical means the same atoms as written, so compare raw atom lists
      bool same_atoms = q.condition.atoms().size() == x.condition.atoms().size();
      if (same_atoms)
        for (std::size_t d = 0; d < dims(); ++d) {
          bool qa = q.condition.find(static_cast<int>(d)) != nullptr, xa = x.condition.find(static_cast<int>(d)) != nullptr;
          if (qa != xa) same_atoms = false;
        }
      if (same_atoms && lq.cond == lx.cond && lq.groupers == lx.groupers && same_aggs(lq, lx)) return 0.0;
    }
    return 1.0;
  }

  /// Covered coordinates of q's grouper-level signature: a history query
  /// covers a coordinate when the detailed tuples under it are the same in
  /// both queries.
  std::pair<std::size_t, std::size_t> same_level_syntactic(const CubeQuery& q, const std::vector<CubeQuery>& h,
                                                           bool match_aggs) const {
    LQuery lq = lift(q);
    auto qs = signature(lq.cond);
    std::map<LabelCoord, std::set<Tuple>> under_q;
    for (const auto& t : qs) under_q[rollup(t, lq.groupers)].insert(t);
    std::set<LabelCoord> covered;
    for (const auto& x : h) {
      LQuery lx = lift(x);
      if (lx.groupers != lq.groupers || (match_aggs && !same_aggs(lq, lx))) continue;
      std::map<LabelCoord, std::set<Tuple>> under_x;
      for (const auto& t : signature(lx.cond)) under_x[rollup(t, lx.groupers)].insert(t);
      for (const auto& [c, ts] : under_q)
        if (under_x.count(c) && under_x[c] == ts) covered.insert(c);
    }
    return {covered.size(), under_q.size()};
  }

  std::pair<std::size_t, std::size_t> same_level_extensional(const CubeQuery& q, const std::vector<CubeQuery>& h,
                                                             bool match_aggs) const {
    LQuery lq = lift(q);
    auto gq = groups(lq);
    std::set<LabelCoord> covered;
    for (const auto& x : h) {
      LQuery lx = lift(x);
      if (lx.groupers != lq.groupers || (match_aggs && !same_aggs(lq, lx))) continue;
      auto gx = groups(lx);
      for (const auto& [c, rs] : gq)
        if (gx.count(c) && gx[c] == rs) covered.insert(c);
    }
    return {covered.size(), gq.size()};
  }

  double pslsn(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto [c, t] = same_level_syntactic(q, h, true);
    return novel(c, t);
  }
  double pslen(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto [c, t] = same_level_extensional(q, h, true);
    return novel(c, t);
  }

  double fsdn(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto qs = signature(lift(q.condition));
    for (const auto& x : h) {
      auto xs = signature(lift(x.condition));
      if (std::includes(xs.begin(), xs.end(), qs.begin(), qs.end())) return 0.0;
    }
    return 1.0;
  }

  std::pair<std::size_t, std::size_t> detailed_syntactic(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto qs = signature(lift(q.condition));
    std::size_t covered = 0;
    std::vector<LCond> hc;
    for (const auto& x : h) hc.push_back(lift(x.condition));
    for (const auto& t : qs)
      if (std::any_of(hc.begin(), hc.end(), [&](const LCond& c) { return passes(c, t); })) ++covered;
    return {covered, qs.size()};
  }

  double pdsn(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto [c, t] = detailed_syntactic(q, h);
    return novel(c, t);
  }

  /// Per row of q, the number of history queries selecting it.
  std::vector<std::size_t> hits(const CubeQuery& q, const std::vector<CubeQuery>& h, bool same_measures) const {
    LQuery lq = lift(q);
    std::vector<std::size_t> out;
    for (std::size_t r : rows(lq.cond)) {
      std::size_t n = 0;
      for (const auto& x : h) {
        LQuery lx = lift(x);
        if (same_measures && !same_aggs(lq, lx)) continue;
        if (passes(lx.cond, inst_.row_base[r])) ++n;
      }
      out.push_back(n);
    }
    return out;
  }

  double pden(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto v = hits(q, h, true);
    return novel(static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](std::size_t x) { return x > 0; })), v.size());
  }

  double wdn(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto v = hits(q, h, true);
    if (v.empty()) return 1.0;
    double nov = 0, w = 0;
    for (auto x : v) (x ? w : nov) += x ? static_cast<double>(x) : 1.0;
    return nov / (nov + w);
  }

  struct BeliefResult {
    double score;
    std::size_t skipped;
  };

  /// mode 0 same level, 1 detailed, 2 arbitrary.
  BeliefResult belief_novelty(const CubeQuery& q, double pi, int mode) const {
    LQuery lq = lift(q);
    using AnchorKey = std::pair<std::vector<int>, LabelCoord>;
    std::set<AnchorKey> known;
    for (const auto& st : inst_.beliefs.statements()) {
      if (st.probability < pi) continue;
      bool on_q = std::any_of(lq.labels.begin(), lq.labels.end(), [&](const std::string& l) { return names_measure(st.measure, l); });
      if (on_q) known.insert({st.anchor.levels, labels_of(st.anchor.levels, st.anchor.coord)});
    }
    std::vector<int> want = mode == 1 ? std::vector<int>(dims(), 0) : lq.groupers;
    std::vector<AnchorKey> usable;
    std::size_t skipped = 0;
    for (const auto& a : known) {
      bool ok = true;
      for (std::size_t d = 0; d < dims(); ++d) ok = ok && (mode == 2 ? a.first[d] <= want[d] : a.first[d] == want[d]);
      if (ok) usable.push_back(a);
      else ++skipped;
    }
    std::size_t covered = 0, total = 0;
    if (mode == 1) {
      for (std::size_t r : rows(lq.cond)) {
        LabelCoord c = rollup(inst_.row_base[r], want);
        ++total;
        if (std::any_of(usable.begin(), usable.end(), [&](const AnchorKey& a) { return a.second == c; })) ++covered;
      }
    } else {
      auto sig = signature(lq.cond);
      for (const auto& [c, rs] : groups(lq)) {
        ++total;
        if (mode == 0) {
          if (std::any_of(usable.begin(), usable.end(), [&](const AnchorKey& a) { return a.second == c; })) ++covered;
          continue;
        }
        bool all = true;
        for (const auto& t : sig) {
          if (rollup(t, lq.groupers) != c) continue;
          bool hit = std::any_of(usable.begin(), usable.end(), [&](const AnchorKey& a) { return rollup(t, a.first) == a.second; });
          if (!hit) {
            all = false;
            break;
          }
        }
        if (all) ++covered;
      }
    }
    return {novel(covered, total), skipped};
  }

  // ---- relevance

  double gbdsr(const CubeQuery& q, const std::vector<SelectionCondition>& goals) const {
    auto qs = signature(lift(q.condition));
    std::vector<LCond> gc;
    for (const auto& g : goals) gc.push_back(lift(g));
    std::size_t covered = 0;
    for (const auto& t : qs)
      if (std::any_of(gc.begin(), gc.end(), [&](const LCond& c) { return passes(c, t); })) ++covered;
    return relevant(covered, qs.size());
  }

  double pdsr(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto [c, t] = detailed_syntactic(q, h);
    return relevant(c, t);
  }

  double pder(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto v = hits(q, h, false);
    return relevant(static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](std::size_t x) { return x > 0; })), v.size());
  }

  double full_detailed_extensional(const CubeQuery& q, const std::vector<CubeQuery>& h) const {
    auto qr = rows(lift(q.condition));
    for (const auto& x : h) {
      auto xr = rows(lift(x.condition));
      if (std::includes(xr.begin(), xr.end(), qr.begin(), qr.end())) return 1.0;
    }
    return 0.0;
  }

  /// Same-level relevance against beacons. nullopt when a beacon sits at other groupers.
  std::optional<double> same_level_relevance(const CubeQuery& q, const std::vector<CubeQuery>& beacons, bool full,
                                             bool extensional) const {
    for (const auto& b : beacons)
      if (b.groupers != q.groupers) return std::nullopt;
    if (!full) {
      auto [c, t] = extensional ? same_level_extensional(q, beacons, false) : same_level_syntactic(q, beacons, false);
      return relevant(c, t);
    }
    for (const auto& b : beacons) {
      if (!extensional) {
        if (signature(lift(b.condition)) == signature(lift(q.condition))) return 1.0;
      } else {
        auto [c, t] = same_level_extensional(q, {b}, false);
        if (c == t) return 1.0;
      }
    }
    return 0.0;
  }

  // ---- peculiarity

  double query_distance(const CubeQuery& a, const CubeQuery& b) const {
    LQuery la = lift(a), lb = lift(b);
    double f = 0, l = 0;
    for (std::size_t d = 0; d < dims(); ++d) {
      if (la.cond.level[d] != lb.cond.level[d] || la.cond.vals[d] != lb.cond.vals[d]) f += 1;
      l += std::abs(la.groupers[d] - lb.groupers[d]) / static_cast<double>(height(d));
    }
    f /= static_cast<double>(dims());
    l /= static_cast<double>(dims());
    std::set<std::pair<std::string, int>> ma(la.aggs.begin(), la.aggs.end()), mb(lb.aggs.begin(), lb.aggs.end());
    std::size_t common = 0;
    for (const auto& x : ma) common += mb.count(x);
    double m = 1.0 - static_cast<double>(common) / static_cast<double>(ma.size() + mb.size() - common);
    return 0.5 * f + 0.35 * l + 0.15 * m;
  }

  /// kind: 0 min, 1 max, 2 average, 3 median, 4 k-th smallest.
  static std::optional<double> stat(std::vector<double> v, int kind, std::size_t k = 1) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    switch (kind) {
      case 0: return v.front();
      case 1: return v.back();
      case 2: return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      case 3: return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
      default: return k >= 1 && k <= v.size() ? std::optional<double>(v[k - 1]) : std::nullopt;
    }
  }

  std::optional<double> syntactic_peculiarity(const CubeQuery& q, const std::vector<CubeQuery>& others, int kind,
                                              std::size_t k = 1) const {
    std::vector<double> v;
    for (const auto& o : others) v.push_back(query_distance(q, o));
    return stat(v, kind, k);
  }

  /// Hop distance through the lowest common ancestor, from label chains.
  double member_distance(std::size_t d, int la, const std::string& a, int lb, const std::string& b) const {
    auto chain = [&](int lvl, const std::string& lab) {
      for (std::size_t base = 0; base < inst_.raw[d].paths.size(); ++base)
        if (anc(d, base, lvl) == lab) return base;
      return std::size_t(0);
    };
    std::size_t ba = chain(la, a), bb = chain(lb, b);
    for (int L = std::max(la, lb); L <= height(d); ++L)
      if (anc(d, ba, L) == anc(d, bb, L)) return ((L - la) + (L - lb)) / (2.0 * height(d));
    return 1.0;
  }

  double cell_dist(const std::vector<int>& la, const LabelCoord& a, const std::vector<int>& lb, const LabelCoord& b) const {
    double s = 0;
    for (std::size_t d = 0; d < dims(); ++d) s += member_distance(d, la[d], a[d], lb[d], b[d]);
    return s / static_cast<double>(dims());
  }

  std::vector<double> nearest(const std::vector<int>& la, const Cells& a, const std::vector<int>& lb, const Cells& b) const {
    std::vector<double> out;
    for (const auto& [ca, va] : a) {
      double best = INFINITY;
      for (const auto& [cb, vb] : b) best = std::min(best, cell_dist(la, ca, lb, cb));
      out.push_back(best);
    }
    return out;
  }

  /// Average over others of delta(other, q); hausdorff or directed closest relative.
  std::optional<double> value_peculiarity(const CubeQuery& q, const std::vector<CubeQuery>& others, bool hausdorff) const {
    if (others.empty()) return std::nullopt;
    LQuery lq = lift(q);
    Cells qc = evaluate(lq);
    std::vector<double> v;
    for (const auto& o : others) {
      LQuery lo = lift(o);
      Cells oc = evaluate(lo);
      if (oc.empty() || qc.empty()) return std::nullopt;
      auto ab = nearest(lo.groupers, oc, lq.groupers, qc);
      if (!hausdorff) {
        v.push_back(std::accumulate(ab.begin(), ab.end(), 0.0) / static_cast<double>(ab.size()));
      } else {
        auto ba = nearest(lq.groupers, qc, lo.groupers, oc);
        v.push_back(std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end())));
      }
    }
    return stat(v, 2);
  }

  std::optional<double> jaccard_peculiarity(const CubeQuery& q, const std::vector<CubeQuery>& others, std::size_t k) const {
    auto qr = rows(lift(q.condition));
    std::vector<double> v;
    for (const auto& o : others) {
      auto orr = rows(lift(o.condition));
      std::set<std::size_t> u = qr;
      u.insert(orr.begin(), orr.end());
      std::size_t inter = qr.size() + orr.size() - u.size();
      v.push_back(u.empty() ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(u.size()));
    }
    return stat(v, 4, k);
  }

  // ---- surprise

  template <class Map>
  static std::optional<typename Map::mapped_type> lookup(const Map& m, const std::vector<int>& levels, const LabelCoord& c,
                                                         const std::string& label) {
    if (auto it = m.find({levels, c, label}); it != m.end()) return it->second;
    for (const auto& [k, v] : m)
      if (std::get<0>(k) == levels && std::get<1>(k) == c && names_measure(std::get<2>(k), label)) return v;
    return std::nullopt;
  }

  /// Per-cell mean absolute gap, for cells holding at least one expectation.
  std::vector<double> cell_gaps(const CubeQuery& q) const {
    LQuery lq = lift(q);
    std::vector<double> out;
    for (const auto& [c, vals] : evaluate(lq)) {
      double s = 0;
      int n = 0;
      for (std::size_t m = 0; m < vals.size(); ++m)
        if (auto e = lookup(inst_.raw_expected, lq.groupers, c, lq.labels[m])) {
          s += std::abs(vals[m] - *e);
          ++n;
        }
      if (n) out.push_back(s / n);
    }
    return out;
  }

  std::optional<double> value_surprise(const CubeQuery& q) const { return stat(cell_gaps(q), 2); }

  std::optional<double> value_surprise_avg_norm(const CubeQuery& q) const {
    auto g = cell_gaps(q);
    if (g.empty()) return std::nullopt;
    double lo = *std::min_element(g.begin(), g.end()), hi = *std::max_element(g.begin(), g.end());
    if (hi == lo) return 0.0;
    return (*stat(g, 2) - lo) / (hi - lo);
  }

  std::vector<const BeliefStatement*> statements_at(const std::vector<int>& levels, const LabelCoord& c,
                                                    const std::string& label, BeliefKind kind) const {
    std::vector<const BeliefStatement*> out;
    for (const auto& st : inst_.beliefs.statements())
      if (st.kind == kind && st.anchor.levels == levels && labels_of(st.anchor.levels, st.anchor.coord) == c &&
          names_measure(st.measure, label))
        out.push_back(&st);
    return out;
  }

  static bool inside(const BeliefStatement& st, double v) {
    if (st.kind == BeliefKind::value_set) return std::find(st.values.begin(), st.values.end(), v) != st.values.end();
    const auto& r = st.range;
    bool lo = r.lo_closed ? v >= r.lo : v > r.lo;
    bool hi = r.hi_closed ? v <= r.hi : v < r.hi;
    return lo && hi;
  }

  std::optional<double> probability_surprise(const CubeQuery& q, bool interval) const {
    LQuery lq = lift(q);
    std::vector<double> v;
    for (const auto& [c, vals] : evaluate(lq))
      for (std::size_t m = 0; m < vals.size(); ++m) {
        auto st = statements_at(lq.groupers, c, lq.labels[m], interval ? BeliefKind::range : BeliefKind::value_set);
        if (st.empty()) continue;
        double s = 0;
        for (const auto* x : st)
          if (!inside(*x, vals[m])) s += x->probability;
        v.push_back(s);
      }
    return stat(v, 2);
  }

  std::string classify(double v) const { return v < inst_.t1 ? "Low" : v < inst_.t2 ? "Mid" : "High"; }

  double label_gap(const std::string& a, const std::string& b) const {
    static const std::vector<std::string> order{"Low", "Mid", "High"};
    if (inst_.labels.domain.kind == LabelKind::nominal) return a == b ? 0.0 : 1.0;
    auto pa = std::find(order.begin(), order.end(), a) - order.begin();
    auto pb = std::find(order.begin(), order.end(), b) - order.begin();
    return std::abs(static_cast<double>(pa - pb)) / 2.0;
  }

  std::optional<double> label_surprise(const CubeQuery& q) const {
    LQuery lq = lift(q);
    std::vector<double> per_cell;
    for (const auto& [c, vals] : evaluate(lq)) {
      std::optional<double> worst;
      for (std::size_t m = 0; m < vals.size(); ++m)
        if (auto e = lookup(inst_.raw_expected_labels, lq.groupers, c, lq.labels[m]))
          worst = std::max(worst.value_or(0.0), label_gap(classify(vals[m]), *e));
      if (worst) per_cell.push_back(*worst);
    }
    return stat(per_cell, 2);
  }

  bool strict_label_surprise(const CubeQuery& q) const {
    LQuery lq = lift(q);
    for (const auto& [c, vals] : evaluate(lq))
      for (std::size_t m = 0; m < vals.size(); ++m)
        if (auto e = lookup(inst_.raw_expected_labels, lq.groupers, c, lq.labels[m]))
          if (*e != classify(vals[m])) return true;
    return false;
  }

  /// nullopt for loose mode on a nominal domain or when no label beliefs apply.
  std::optional<double> prob_label_surprise(const CubeQuery& q, bool loose) const {
    if (loose && inst_.labels.domain.kind == LabelKind::nominal) return std::nullopt;
    LQuery lq = lift(q);
    std::vector<double> v;
    for (const auto& [c, vals] : evaluate(lq))
      for (std::size_t m = 0; m < vals.size(); ++m) {
        auto st = statements_at(lq.groupers, c, lq.labels[m], BeliefKind::label);
        if (st.empty()) continue;
        std::string actual = classify(vals[m]);
        double s = 0;
        for (const auto* x : st)
          if (x->label != actual) s += (loose ? label_gap(x->label, actual) : 1.0) * x->probability;
        v.push_back(s);
      }
    return stat(v, 2);
  }

 private:
  const Instance& inst_;
  std::vector<Tuple> tuples_;
};

/// Runs every metric through the library and the oracle; returns the
/// disagreements and counts the comparisons made.
struct Comparison {
  std::size_t checks = 0;
  std::vector<std::string> mismatches;

  void near(const std::string& what, double lib, double ref, double tol = 1e-9) {
    ++checks;
    if (!(std::abs(lib - ref) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": library " << lib << " oracle " << ref;
      mismatches.push_back(os.str());
    }
  }
  void opt(const std::string& what, const std::function<double()>& lib, std::optional<double> ref, double tol = 1e-9) {
    std::optional<double> got;
    try {
      got = lib();
    } catch (const std::exception&) {
      // library error or null result
    }
    ++checks;
    if (got.has_value() != ref.has_value()) {
      mismatches.push_back(what + ": library " + (got ? "value" : "error/null") + " oracle " + (ref ? "value" : "error/null"));
      return;
    }
    if (got) {
      --checks;
      near(what, *got, *ref, tol);
    }
  }
};

inline Comparison compare_instance(const Instance& inst) {
  Comparison cmp;
  Oracle o(inst);
  const auto& cube = inst.cube;
  const auto& s = cube.schema();
  const auto& q = inst.q;
  const auto& H = inst.history;
  std::span<const CubeQuery> h(H);

  // evaluation
  std::vector<CubeQuery> all = H;
  all.push_back(q);
  for (std::size_t i = 0; i < all.size(); ++i) {
    Cells lib = o.lift(evaluate(cube, all[i]));
    Cells ref = o.evaluate(o.lift(all[i]));
    ++cmp.checks;
    if (lib.size() != ref.size()) {
      cmp.mismatches.push_back("evaluate #" + std::to_string(i) + ": cell count differs");
      continue;
    }
    for (const auto& [c, v] : ref) {
      auto it = lib.find(c);
      if (it == lib.end() || it->second.size() != v.size()) {
        cmp.mismatches.push_back("evaluate #" + std::to_string(i) + ": missing cell");
        break;
      }
      for (std::size_t m = 0; m < v.size(); ++m) cmp.near("evaluate value", it->second[m], v[m]);
    }
  }

  // novelty
  cmp.near("fslsn", fslsn(q, h), o.fslsn(q, H));
  cmp.near("pslsn", pslsn(s, q, h).score, o.pslsn(q, H));
  cmp.near("pslen", pslen(cube, q, h).score, o.pslen(q, H));
  cmp.near("fsdn", fsdn(s, q, h), o.fsdn(q, H));
  cmp.near("pdsn", pdsn(s, q, h).score, o.pdsn(q, H));
  cmp.near("pden", pden(cube, q, h).score, o.pden(q, H));
  cmp.near("wdn", wdn(cube, q, h).score, o.wdn(q, H));
  for (double pi : {0.3, 0.5, 0.8})
    for (int mode = 0; mode < 3; ++mode) {
      auto lib = belief_novelty(cube, q, inst.beliefs, pi, static_cast<BeliefMode>(mode));
      auto ref = o.belief_novelty(q, pi, mode);
      std::string tag = std::string("belief_novelty/") + belief_mode_name(static_cast<BeliefMode>(mode));
      cmp.near(tag, lib.score, ref.score);
      cmp.near(tag + "/skipped", static_cast<double>(lib.skipped), static_cast<double>(ref.skipped));
    }

  // relevance
  cmp.near("gbdsr", multi_goal_gbdsr(s, q, inst.goals).score, o.gbdsr(q, inst.goals));
  cmp.near("gbdsr/first", gbdsr(s, q, inst.goals.front()).score, o.gbdsr(q, {inst.goals.front()}));
  cmp.near("pdsr", pdsr(s, q, h).score, o.pdsr(q, H));
  cmp.near("pder", pder(cube, q, h).score, o.pder(q, H));
  cmp.near("fdsr", detailed_relevance(cube, q, h, Coverage::full, Basis::syntactic).score, 1.0 - o.fsdn(q, H));
  cmp.near("fder", detailed_relevance(cube, q, h, Coverage::full, Basis::extensional).score,
           o.full_detailed_extensional(q, H));
  std::vector<CubeQuery> beacons;
  for (const auto& x : H)
    if (x.groupers == q.groupers) beacons.push_back(x);
  for (bool full : {false, true})
    for (bool ext : {false, true}) {
      std::string tag = std::string("same_level_relevance/") + (full ? "full/" : "partial/") + (ext ? "ext" : "syn");
      auto mode = full ? Coverage::full : Coverage::partial;
      auto basis = ext ? Basis::extensional : Basis::syntactic;
      cmp.opt(tag, [&] { return same_level_relevance(cube, q, beacons, mode, basis); }, o.same_level_relevance(q, beacons, full, ext));
      cmp.opt(tag + "/unfiltered", [&] { return same_level_relevance(cube, q, h, mode, basis); },
              o.same_level_relevance(q, H, full, ext));
    }

  // peculiarity
  for (const auto& x : H) cmp.near("query_distance", query_distance(s, q, x), o.query_distance(q, x));
  const AggKind kinds[] = {AggKind::min, AggKind::max, AggKind::average, AggKind::median};
  for (int k = 0; k < 4; ++k)
    cmp.opt(std::string("syntactic_peculiarity/") + agg_kind_name(kinds[k]),
            [&] { return syntactic_peculiarity(s, q, h, {kinds[k], 1}); }, o.syntactic_peculiarity(q, H, k));
  for (std::size_t k = 1; k <= H.size() + 1; ++k) {
    cmp.opt("syntactic_peculiarity/knn", [&] { return syntactic_peculiarity(s, q, h, {AggKind::knn, k}); },
            o.syntactic_peculiarity(q, H, 4, k));
    cmp.opt("jaccard_peculiarity", [&] { return jaccard_peculiarity(cube, q, h, k); }, o.jaccard_peculiarity(q, H, k));
  }
  cmp.opt("value_peculiarity/closest_relative", [&] { return value_peculiarity(cube, q, h, ValueDistance::closest_relative); },
          o.value_peculiarity(q, H, false));
  cmp.opt("value_peculiarity/hausdorff", [&] { return value_peculiarity(cube, q, h, ValueDistance::hausdorff); },
          o.value_peculiarity(q, H, true));

  // surprise
  CellSet qc = evaluate(cube, q);
  cmp.opt("value_surprise", [&] { return value_surprise(qc, inst.expected).value(); }, o.value_surprise(q));
  cmp.opt("value_surprise_avg_norm", [&] { return value_surprise_avg_normalized(qc, inst.expected).value(); },
          o.value_surprise_avg_norm(q));
  cmp.opt("probability_surprise/exact",
          [&] { return cube_probability_surprise(qc, inst.beliefs, ProbabilityMode::exact).value(); },
          o.probability_surprise(q, false));
  cmp.opt("probability_surprise/interval",
          [&] { return cube_probability_surprise(qc, inst.beliefs, ProbabilityMode::interval).value(); },
          o.probability_surprise(q, true));
  cmp.opt("label_surprise", [&] { return label_surprise(qc, inst.expected_labels, inst.labels).value(); },
          o.label_surprise(q));
  cmp.near("strict_label_surprise", strict_label_surprise(qc, inst.expected_labels, inst.labels) ? 1.0 : 0.0,
           o.strict_label_surprise(q) ? 1.0 : 0.0);
  cmp.opt("prob_label_surprise/strict",
          [&] { return cube_prob_label_surprise(qc, inst.beliefs, inst.labels, LabelProbMode::strict).value(); },
          o.prob_label_surprise(q, false));
  cmp.opt("prob_label_surprise/loose",
          [&] { return cube_prob_label_surprise(qc, inst.beliefs, inst.labels, LabelProbMode::loose).value(); },
          o.prob_label_surprise(q, true));
  return cmp;
}

}  // namespace oracle
