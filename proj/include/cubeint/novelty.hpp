#pragma once

// Novelty of a query against the user's history and beliefs.

#include <algorithm>
#include <span>
#include <unordered_set>
#include <vector>

#include "cubeint/context.hpp"
#include "cubeint/coverage.hpp"
#include "cubeint/engine.hpp"

namespace cubeint {

/// A fraction of an assessed universe plus the split it came from.
/// `score` is the novel fraction for novelty metrics and the covered
/// fraction for relevance metrics.
struct CoverageScore {
  double score = 1.0;
  CoverageCounts counts;
  std::size_t skipped = 0;  // statements ignored because their anchor levels do not fit the mode
};

inline CoverageScore novelty_score(CoverageCounts c) { return {c.novel_fraction(), c, 0}; }

/// Same condition atoms, same groupers, same aggregate multiset.
inline bool syntactically_identical(const CubeQuery& a, const CubeQuery& b) {
  return a.condition == b.condition && a.groupers == b.groupers && same_aggregates(a, b);
}

/// 0 when some history query is identical to q, else 1.
inline double fslsn(const CubeQuery& q, std::span<const CubeQuery> history) {
  for (const auto& h : history)
    if (syntactically_identical(q, h)) return 0.0;
  return 1.0;
}

namespace detail {

/// Members of q's grouper set on dimension d whose filtered detailed
/// content is identical under q and under h. A coordinate built only from
/// such members denotes the very same aggregate in both queries.
inline std::vector<MemberId> compatible_members(const Dimension& dim, int grouper, const std::vector<MemberId>& q_set,
                                                const std::vector<MemberId>& q_det, const std::vector<MemberId>& h_det) {
  std::vector<char> in_q(dim.cardinality(0), 0), in_h(dim.cardinality(0), 0);
  for (MemberId b : q_det) in_q[b] = 1;
  for (MemberId b : h_det) in_h[b] = 1;
  std::vector<MemberId> out;
  for (MemberId m : q_set) {
    bool same = true, any = false;
    for (MemberId b : dim.base_desc({grouper, m})) {
      if (in_q[b] != in_h[b]) {
        same = false;
        break;
      }
      any |= in_q[b] != 0;
    }
    if (same && any) out.push_back(m);
  }
  return out;
}

/// Coordinates of q+ that some same-level history query produces with the
/// same detailed content. Aggregates are checked only when asked.
inline CoverageCounts same_level_syntactic_counts(const CubeSchema& s, const CubeQuery& q,
                                                  std::span<const CubeQuery> history, bool match_aggregates) {
  FactoredSignature target = query_signature(s, q);
  FactoredSignature q_det = detailed_signature(s, q);
  std::vector<FactoredSignature> covers;
  for (const auto& h : history) {
    if (h.groupers != q.groupers) continue;
    if (match_aggregates && !same_aggregates(h, q)) continue;
    FactoredSignature h_det = detailed_signature(s, h);
    FactoredSignature cov;
    cov.levels = q.groupers;
    bool empty = false;
    for (std::size_t d = 0; d < s.dim_count() && !empty; ++d) {
      cov.sets.push_back(compatible_members(s.dims[d], q.groupers[d], target.sets[d], q_det.sets[d], h_det.sets[d]));
      empty = cov.sets.back().empty();
    }
    if (!empty) covers.push_back(std::move(cov));
  }
  std::uint64_t total = target.cardinality();
  std::uint64_t covered = count_union_coverage(target, covers);
  return {covered, total - covered};
}

/// Result cells of q that some same-level history query reproduces from the same fact rows.
inline CoverageCounts same_level_extensional_counts(const DetailedCube& cube, const CubeQuery& q,
                                                    std::span<const CubeQuery> history, bool match_aggregates) {
  RowSet rows = detailed_rows(cube, q);
  auto groups = group_rows(cube, rows, q.groupers);
  std::vector<char> covered(groups.size(), 0);
  for (const auto& h : history) {
    if (h.groupers != q.groupers) continue;
    if (match_aggregates && !same_aggregates(h, q)) continue;
    RowSet hrows = detailed_rows(cube, h);
    auto hgroups = group_rows(cube, hrows, h.groupers);
    // both sorted by coordinate
    std::size_t i = 0, j = 0;
    while (i < groups.size() && j < hgroups.size()) {
      if (groups[i].first < hgroups[j].first) {
        ++i;
      } else if (hgroups[j].first < groups[i].first) {
        ++j;
      } else {
        if (groups[i].second == hgroups[j].second) covered[i] = 1;
        ++i;
        ++j;
      }
    }
  }
  CoverageCounts c;
  for (char v : covered) (v ? c.covered : c.novel)++;
  return c;
}

}  // namespace detail

/// Partial same-level syntactic novelty (PSLSN).
inline CoverageScore pslsn(const CubeSchema& s, const CubeQuery& q, std::span<const CubeQuery> history) {
  return novelty_score(detail::same_level_syntactic_counts(s, q, history, true));
}

/// Partial same-level extensional novelty (PSLEN).
inline CoverageScore pslen(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> history) {
  return novelty_score(detail::same_level_extensional_counts(cube, q, history, true));
}

/// 0 when some history query's detailed signature contains q's, else 1.
inline double fsdn(const CubeSchema& s, const CubeQuery& q, std::span<const CubeQuery> history) {
  FactoredSignature target = detailed_signature(s, q);
  for (const auto& h : history)
    if (factored_subset(target, detailed_signature(s, h))) return 0.0;
  return 1.0;
}

/// Covered/novel split of q's detailed signature against the history's union.
inline CoverageCounts detailed_syntactic_counts(const CubeSchema& s, const CubeQuery& q,
                                                std::span<const CubeQuery> history) {
  FactoredSignature target = detailed_signature(s, q);
  std::vector<FactoredSignature> covers;
  covers.reserve(history.size());
  for (const auto& h : history) covers.push_back(detailed_signature(s, h));
  std::uint64_t total = target.cardinality();
  std::uint64_t covered = count_union_coverage(target, covers);
  return {covered, total - covered};
}

/// Partial detailed syntactic novelty (PDSN).
inline CoverageScore pdsn(const CubeSchema& s, const CubeQuery& q, std::span<const CubeQuery> history) {
  return novelty_score(detailed_syntactic_counts(s, q, history));
}

/// Materialized PDSN split, for callers who want the coordinates themselves.
inline CoveragePartition<Coord> pdsn_partition(const CubeSchema& s, const CubeQuery& q,
                                               std::span<const CubeQuery> history,
                                               std::uint64_t cap = 10'000'000) {
  std::vector<FactoredSignature> covers;
  for (const auto& h : history) covers.push_back(detailed_signature(s, h));
  return enumerate_union_coverage(detailed_signature(s, q), covers, cap);
}

/// q's detailed rows and, per row, how many history queries aggregate over it.
struct DetailedHits {
  RowSet rows;
  std::vector<std::uint32_t> hits;

  CoverageCounts counts() const {
    CoverageCounts c;
    for (auto h : hits) (h ? c.covered : c.novel)++;
    return c;
  }
  CoveragePartition<RowId> partition() const {
    CoveragePartition<RowId> p;
    for (std::size_t i = 0; i < rows.size(); ++i) (hits[i] ? p.covered : p.novel).push_back(rows[i]);
    return p;
  }
};

inline DetailedHits detailed_hits(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> history) {
  DetailedHits out;
  out.rows = detailed_rows(cube, q);
  out.hits.assign(out.rows.size(), 0);
  for (const auto& h : history) {
    RowSet hr = detailed_rows(cube, h);
    std::size_t i = 0, j = 0;
    while (i < out.rows.size() && j < hr.size()) {
      if (out.rows[i] < hr[j]) {
        ++i;
      } else if (hr[j] < out.rows[i]) {
        ++j;
      } else {
        ++out.hits[i];
        ++i;
        ++j;
      }
    }
  }
  return out;
}

/// Partial detailed extensional novelty (PDEN). Only history queries with
/// q's aggregate multiset take part.
inline CoverageScore pden(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> history) {
  auto same = filter_history_same_measures(history, q);
  return novelty_score(detailed_hits(cube, q, same).counts());
}

/// Weighted detailed novelty. A covered row weighs the number of history
/// queries that touched it; a novel row weighs 1.
inline CoverageScore wdn(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> history) {
  auto same = filter_history_same_measures(history, q);
  DetailedHits h = detailed_hits(cube, q, same);
  CoverageScore out = novelty_score(h.counts());
  if (out.counts.covered == 0) return out;
  double weight_cov = 0;
  for (auto x : h.hits) weight_cov += x;
  double nov = static_cast<double>(out.counts.novel);
  out.score = nov / (nov + weight_cov);
  return out;
}

/// True iff the detailed signature of the cell (optionally restricted per
/// dimension to `restrict`'s base sets) lies inside the union of the
/// detailed signatures of `cstar`.
inline bool full_coverage(const CubeSchema& s, const LevelVector& levels, std::span<const MemberId> coord,
                          std::span<const Anchor> cstar, const FactoredSignature* restrict = nullptr) {
  const std::size_t n = s.dim_count();
  for (const auto& a : cstar)
    for (std::size_t d = 0; d < n; ++d)
      if (a.levels[d] > levels[d])
        throw Error(Errc::level_mismatch, "covering cell sits above the covered cell on " + s.dims[d].name());
  FactoredSignature target;
  target.levels = s.base_levels();
  for (std::size_t d = 0; d < n; ++d) {
    auto bd = s.dims[d].base_desc({levels[d], coord[d]});
    std::vector<MemberId> set(bd.begin(), bd.end());
    if (restrict) {
      std::vector<MemberId> kept;
      std::set_intersection(set.begin(), set.end(), restrict->sets[d].begin(), restrict->sets[d].end(),
                            std::back_inserter(kept));
      set = std::move(kept);
    }
    if (set.empty()) return true;
    target.sets.push_back(std::move(set));
  }
  std::vector<FactoredSignature> covers;
  for (const auto& a : cstar) {
    FactoredSignature c;
    c.levels = target.levels;
    for (std::size_t d = 0; d < n; ++d) {
      auto bd = s.dims[d].base_desc({a.levels[d], a.coord[d]});
      c.sets.emplace_back(bd.begin(), bd.end());
    }
    if (count_intersection(c, target) > 0) covers.push_back(std::move(c));
  }
  return count_union_coverage(target, covers) == target.cardinality();
}

enum class BeliefMode { same_level, detailed, arbitrary };

inline const char* belief_mode_name(BeliefMode m) {
  switch (m) {
    case BeliefMode::same_level: return "same_level";
    case BeliefMode::detailed: return "detailed";
    case BeliefMode::arbitrary: return "arbitrary";
  }
  return "?";
}

/// Belief-based novelty. Cells are covered when the user holds a Pi-known
/// belief about them on one of q's measures:
///   same_level  result cells, anchors at q's grouper levels
///   detailed    detailed cells, anchors at base levels
///   arbitrary   result cells, anchors at or below q's levels, covered when
///               the anchors jointly span the cell's filtered detailed area
/// Anchors at other levels are skipped and counted.
inline CoverageScore belief_novelty(const DetailedCube& cube, const CubeQuery& q, const BeliefStore& beliefs, double pi,
                                    BeliefMode mode) {
  const auto& s = cube.schema();
  std::vector<std::string> measures;
  for (const auto& a : q.aggregates) measures.push_back(aggregate_label(s, a));
  std::vector<Anchor> known = beliefs.known_cells(pi, &measures);

  LevelVector want = mode == BeliefMode::detailed ? s.base_levels() : q.groupers;
  std::vector<Anchor> usable;
  std::size_t skipped = 0;
  for (auto& a : known) {
    bool ok = true;
    for (std::size_t d = 0; d < s.dim_count() && ok; ++d)
      ok = mode == BeliefMode::arbitrary ? a.levels[d] <= want[d] : a.levels[d] == want[d];
    if (ok) usable.push_back(std::move(a));
    else ++skipped;
  }

  RowSet rows = detailed_rows(cube, q);
  CoverageCounts c;
  if (mode == BeliefMode::detailed) {
    CoordPacker packer(s, want);
    std::unordered_set<std::uint64_t> keys;
    for (const auto& a : usable) keys.insert(packer.pack(a.coord));
    Coord coord(s.dim_count());
    for (RowId r : rows) {
      for (std::size_t d = 0; d < coord.size(); ++d) coord[d] = cube.at(d, r);
      (keys.count(packer.pack(coord)) ? c.covered : c.novel)++;
    }
  } else {
    auto groups = group_rows(cube, rows, q.groupers);
    if (mode == BeliefMode::same_level) {
      std::sort(usable.begin(), usable.end());
      for (const auto& g : groups) {
        Anchor key{q.groupers, g.first};
        (std::binary_search(usable.begin(), usable.end(), key) ? c.covered : c.novel)++;
      }
    } else {
      FactoredSignature det = detailed_signature(s, q);
      for (const auto& g : groups)
        (full_coverage(s, q.groupers, g.first, usable, &det) ? c.covered : c.novel)++;
    }
  }
  CoverageScore out = novelty_score(c);
  out.skipped = skipped;
  return out;
}

}  // namespace cubeint
