#pragma once

// Peculiarity: how far a query sits from a collection of other queries.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "cubeint/coverage.hpp"
#include "cubeint/engine.hpp"
#include "cubeint/error.hpp"

namespace cubeint {

struct DistanceWeights {
  double filter = 0.5;
  double levels = 0.35;
  double measures = 0.15;

  void check() const {
    if (filter < 0 || levels < 0 || measures < 0 || std::abs(filter + levels + measures - 1.0) > 1e-9)
      throw Error(Errc::invalid_argument, "distance weights must be nonnegative and sum to 1");
  }
};

struct QueryDistance {
  double filter = 0;
  double levels = 0;
  double measures = 0;
  double total = 0;
};

/// Weighted structural distance between two queries over one schema.
///   filter   per dimension 0 iff both atoms share level and value set
///            (a missing atom reads as ALL IN {all}), averaged
///   levels   per dimension |depth gap| / height, averaged
///   measures Jaccard distance of the (function, measure) sets
inline QueryDistance query_distance_parts(const CubeSchema& s, const CubeQuery& a, const CubeQuery& b,
                                          const DistanceWeights& w = {}) {
  w.check();
  const std::size_t n = s.dim_count();
  if (a.groupers.size() != n || b.groupers.size() != n)
    throw Error(Errc::schema_mismatch, "queries are not over the given schema");
  QueryDistance out;
  if (n > 0) {
    for (std::size_t d = 0; d < n; ++d) {
      const auto* fa = a.condition.find(static_cast<int>(d));
      const auto* fb = b.condition.find(static_cast<int>(d));
      const int top = s.dims[d].height();
      int la = fa ? fa->level : top, lb = fb ? fb->level : top;
      static const std::vector<MemberId> kAll{0};
      const auto& va = fa ? fa->values : kAll;
      const auto& vb = fb ? fb->values : kAll;
      if (la != lb || va != vb) out.filter += 1.0;
      out.levels += std::abs(a.groupers[d] - b.groupers[d]) / static_cast<double>(top);
    }
    out.filter /= static_cast<double>(n);
    out.levels /= static_cast<double>(n);
  }
  std::vector<Aggregate> ma = a.aggregates, mb = b.aggregates;
  std::sort(ma.begin(), ma.end());
  ma.erase(std::unique(ma.begin(), ma.end()), ma.end());
  std::sort(mb.begin(), mb.end());
  mb.erase(std::unique(mb.begin(), mb.end()), mb.end());
  std::vector<Aggregate> common;
  std::set_intersection(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(common));
  std::size_t uni = ma.size() + mb.size() - common.size();
  out.measures = uni == 0 ? 0.0 : 1.0 - static_cast<double>(common.size()) / static_cast<double>(uni);
  out.total = w.filter * out.filter + w.levels * out.levels + w.measures * out.measures;
  return out;
}

inline double query_distance(const CubeSchema& s, const CubeQuery& a, const CubeQuery& b, const DistanceWeights& w = {}) {
  return query_distance_parts(s, a, b, w).total;
}

enum class AggKind { min, max, average, median, knn };

struct AggregationSpec {
  AggKind kind = AggKind::average;
  std::size_t k = 1;
};

inline const char* agg_kind_name(AggKind k) {
  switch (k) {
    case AggKind::min: return "min";
    case AggKind::max: return "max";
    case AggKind::average: return "average";
    case AggKind::median: return "median";
    case AggKind::knn: return "knn";
  }
  return "?";
}

/// Applies the statistic. knn is the k-th smallest value, 1-based.
inline double aggregate_distances(std::vector<double> v, const AggregationSpec& spec) {
  if (v.empty()) throw Error(Errc::empty_collection, "no distances to aggregate");
  switch (spec.kind) {
    case AggKind::min: return *std::min_element(v.begin(), v.end());
    case AggKind::max: return *std::max_element(v.begin(), v.end());
    case AggKind::average: return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    case AggKind::median: {
      std::sort(v.begin(), v.end());
      std::size_t m = v.size() / 2;
      return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
    }
    case AggKind::knn:
      if (spec.k < 1 || spec.k > v.size())
        throw Error(Errc::k_out_of_range, "k=" + std::to_string(spec.k) + " with " + std::to_string(v.size()) + " queries");
      std::stable_sort(v.begin(), v.end());
      return v[spec.k - 1];
  }
  return 0;
}

inline double syntactic_peculiarity(const CubeSchema& s, const CubeQuery& q, std::span<const CubeQuery> others,
                                    const AggregationSpec& agg = {}, const DistanceWeights& w = {}) {
  std::vector<double> d;
  d.reserve(others.size());
  for (const auto& o : others) d.push_back(query_distance(s, q, o, w));
  return aggregate_distances(std::move(d), agg);
}

inline constexpr std::uint64_t kDefaultPairCap = 1'000'000;

namespace detail {

inline void check_pairs(const CellSet& a, const CellSet& b, std::uint64_t cap) {
  if (a.empty() || b.empty()) throw Error(Errc::empty_result, "cell distance over an empty result");
  if (static_cast<std::uint64_t>(a.size()) * b.size() > cap)
    throw Error(Errc::pair_cap_exceeded, std::to_string(a.size()) + " x " + std::to_string(b.size()) +
                                             " cell pairs exceed the cap of " + std::to_string(cap));
}

/// Per source cell, its distance to the nearest target cell.
inline std::vector<double> nearest_distances(const CubeSchema& s, const CellSet& from, const CellSet& to) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& c : from.cells) {
    double best = 1.0;
    for (const auto& c2 : to.cells) {
      best = std::min(best, cell_distance(s, from.levels, c.coord, to.levels, c2.coord));
      if (best == 0.0) break;
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace detail

/// Directed: mean over cells of `a` of the distance to their closest cell in `b`.
inline double closest_relative_distance(const CubeSchema& s, const CellSet& a, const CellSet& b,
                                        std::uint64_t cap = kDefaultPairCap) {
  detail::check_pairs(a, b, cap);
  auto d = detail::nearest_distances(s, a, b);
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

/// Mean of the two directed Closest Relative distances.
inline double symmetric_closest_relative_distance(const CubeSchema& s, const CellSet& a, const CellSet& b,
                                                  std::uint64_t cap = kDefaultPairCap) {
  return (closest_relative_distance(s, a, b, cap) + closest_relative_distance(s, b, a, cap)) / 2.0;
}

inline double directed_hausdorff(const CubeSchema& s, const CellSet& a, const CellSet& b,
                                 std::uint64_t cap = kDefaultPairCap) {
  detail::check_pairs(a, b, cap);
  auto d = detail::nearest_distances(s, a, b);
  return *std::max_element(d.begin(), d.end());
}

inline double hausdorff_distance(const CubeSchema& s, const CellSet& a, const CellSet& b,
                                 std::uint64_t cap = kDefaultPairCap) {
  return std::max(directed_hausdorff(s, a, b, cap), directed_hausdorff(s, b, a, cap));
}

enum class ValueDistance { closest_relative, hausdorff };

/// Aggregates delta(q_i, q) over the collection using evaluated results.
inline double value_peculiarity(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> others,
                                ValueDistance kind, const AggregationSpec& agg = {},
                                std::uint64_t cap = kDefaultPairCap) {
  if (others.empty()) throw Error(Errc::empty_collection, "no queries to compare against");
  const auto& s = cube.schema();
  CellSet qc = evaluate(cube, q);
  std::vector<double> d;
  for (const auto& o : others) {
    CellSet oc = evaluate(cube, o);
    d.push_back(kind == ValueDistance::closest_relative ? closest_relative_distance(s, oc, qc, cap)
                                                        : hausdorff_distance(s, oc, qc, cap));
  }
  return aggregate_distances(std::move(d), agg);
}

/// 1 - |a ∩ b| / |a ∪ b| over detailed rows; two empty areas are identical.
inline double jaccard_distance(std::span<const RowId> a, std::span<const RowId> b) {
  auto [inter, uni] = intersection_union_size(a, b);
  return uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

/// Jaccard distances between q's detailed area and each other query's, in input order.
inline std::vector<double> jaccard_distances(const DetailedCube& cube, const CubeQuery& q,
                                             std::span<const CubeQuery> others) {
  RowSet qr = detailed_rows(cube, q);
  std::vector<double> out;
  out.reserve(others.size());
  for (const auto& o : others) out.push_back(jaccard_distance(qr, detailed_rows(cube, o)));
  return out;
}

/// k-th smallest Jaccard distance.
inline double jaccard_peculiarity(const DetailedCube& cube, const CubeQuery& q, std::span<const CubeQuery> others,
                                  std::size_t k) {
  if (others.empty()) throw Error(Errc::empty_collection, "no queries to compare against");
  if (k < 1 || k > others.size())
    throw Error(Errc::k_out_of_range, "k=" + std::to_string(k) + " with " + std::to_string(others.size()) + " queries");
  return aggregate_distances(jaccard_distances(cube, q, others), {AggKind::knn, k});
}

}  // namespace cubeint
