#pragma once

// Relevance of a query to declared goals or to beacon/history queries.
// Relevant cells are the covered ones; irrelevant cells are the novel ones.

#include <span>
#include <vector>

#include "cubeint/coverage.hpp"
#include "cubeint/engine.hpp"
#include "cubeint/novelty.hpp"

namespace cubeint {

enum class Coverage { full, partial };
enum class Basis { syntactic, extensional };

inline CoverageScore relevance_score(CoverageCounts c) { return {c.covered_fraction(), c, 0}; }

/// Fraction of q's detailed signature falling inside the union of the
/// goals' detailed signatures. Independent of the fact table.
inline CoverageScore multi_goal_gbdsr(const CubeSchema& s, const CubeQuery& q, std::span<const SelectionCondition> goals) {
  if (goals.empty()) throw Error(Errc::empty_collection, "no goal conditions");
  FactoredSignature target = detailed_signature(s, q);
  std::vector<FactoredSignature> covers;
  for (const auto& g : goals) {
    validate(s, g);
    covers.push_back(condition_signature(s, g, true));
  }
  std::uint64_t total = target.cardinality();
  std::uint64_t rel = covers.size() == 1 ? count_intersection(target, covers[0]) : count_union_coverage(target, covers);
  return relevance_score({rel, total - rel});
}

inline CoverageScore gbdsr(const CubeSchema& s, const CubeQuery& q, const SelectionCondition& goal) {
  return multi_goal_gbdsr(s, q, std::span<const SelectionCondition>(&goal, 1));
}

/// Same-level relevance against beacon queries, aggregates ignored. Every
/// beacon must share q's grouper levels.
inline double same_level_relevance(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> beacons,
                                   Coverage mode, Basis basis) {
  const auto& s = cube.schema();
  for (const auto& b : beacons)
    if (b.groupers != q.groupers) throw Error(Errc::level_mismatch, "beacon query at different grouper levels");
  if (mode == Coverage::partial) {
    CoverageCounts c = basis == Basis::syntactic ? detail::same_level_syntactic_counts(s, q, beacons, false)
                                                 : detail::same_level_extensional_counts(cube, q, beacons, false);
    return c.covered_fraction();
  }
  if (basis == Basis::syntactic) {
    FactoredSignature qd = detailed_signature(s, q);
    for (const auto& b : beacons)
      if (detailed_signature(s, b) == qd) return 1.0;
    return 0.0;
  }
  for (const auto& b : beacons) {
    CoverageCounts c = detail::same_level_extensional_counts(cube, q, std::span<const CubeQuery>(&b, 1), false);
    if (c.novel == 0) return 1.0;
  }
  return 0.0;
}

/// Detailed relevance against the unfiltered history.
///   full/syntactic      1 - FSDN
///   full/extensional    1 when one history query's detailed area contains q's
///   partial/syntactic   PDSR, covered fraction of q's detailed signature
///   partial/extensional PDER, covered fraction of q's detailed area
inline CoverageScore detailed_relevance(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> history,
                                        Coverage mode, Basis basis) {
  const auto& s = cube.schema();
  if (mode == Coverage::partial) {
    CoverageCounts c = basis == Basis::syntactic ? detailed_syntactic_counts(s, q, history)
                                                 : detailed_hits(cube, q, history).counts();
    return relevance_score(c);
  }
  if (basis == Basis::syntactic) return {1.0 - fsdn(s, q, history), {}, 0};
  RowSet rows = detailed_rows(cube, q);
  for (const auto& h : history) {
    RowSet hr = detailed_rows(cube, h);
    if (std::includes(hr.begin(), hr.end(), rows.begin(), rows.end())) return {1.0, {}, 0};
  }
  return {0.0, {}, 0};
}

inline CoverageScore pdsr(const CubeSchema& s, const CubeQuery& q, std::span<const CubeQuery> history) {
  return relevance_score(detailed_syntactic_counts(s, q, history));
}

inline CoverageScore pder(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> history) {
  return relevance_score(detailed_hits(cube, q, history).counts());
}

}  // namespace cubeint
