#pragma once

// Exact coverage arithmetic over factored signatures, plus the partition
// types shared by novelty and relevance.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "cubeint/engine.hpp"

namespace cubeint {

/// Sizes of the covered/novel split of an assessed universe.
struct CoverageCounts {
  std::uint64_t covered = 0;
  std::uint64_t novel = 0;

  std::uint64_t total() const noexcept { return covered + novel; }
  /// Novel fraction; an empty universe has nothing covered and scores 1.
  double novel_fraction() const noexcept {
    return total() == 0 ? 1.0 : static_cast<double>(novel) / static_cast<double>(total());
  }
  double covered_fraction() const noexcept { return 1.0 - novel_fraction(); }
};

/// Materialized covered/novel split. `Item` is a row id (detailed cells) or a coordinate.
template <class Item>
struct CoveragePartition {
  std::vector<Item> covered;
  std::vector<Item> novel;

  CoverageCounts counts() const noexcept { return {covered.size(), novel.size()}; }
};

namespace detail {

class UnionCounter {
 public:
  UnionCounter(const FactoredSignature& target, std::span<const FactoredSignature> covers)
      : target_(target), n_(target.sets.size()), k_(covers.size()), words_((covers.size() + 63) / 64) {
    masks_.resize(n_);
    for (std::size_t d = 0; d < n_; ++d) {
      const auto& tset = target.sets[d];
      masks_[d].assign(tset.size() * words_, 0);
      for (std::size_t i = 0; i < k_; ++i) {
        const auto& cset = covers[i].sets[d];
        // both sorted: merge walk
        std::size_t a = 0, b = 0;
        while (a < tset.size() && b < cset.size()) {
          if (tset[a] < cset[b]) {
            ++a;
          } else if (cset[b] < tset[a]) {
            ++b;
          } else {
            masks_[d][a * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
            ++a;
            ++b;
          }
        }
      }
    }
  }

  std::uint64_t count() {
    if (k_ == 0 || n_ == 0) return k_ == 0 ? 0 : 1;
    std::vector<std::uint64_t> all(words_, 0);
    for (std::size_t i = 0; i < k_; ++i) all[i / 64] |= std::uint64_t{1} << (i % 64);
    return rec(0, all);
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (auto w : v) h = (h ^ w) * 1099511628211ull;
      return h;
    }
  };

  std::uint64_t rec(std::size_t d, const std::vector<std::uint64_t>& active) {
    if (std::all_of(active.begin(), active.end(), [](auto w) { return w == 0; })) return 0;
    if (d == n_) return 1;
    auto memo_key = std::make_pair(d, active);
    if (auto it = memo_.find(memo_key); it != memo_.end()) return it->second;

    std::unordered_map<std::vector<std::uint64_t>, std::uint64_t, KeyHash> classes;
    std::vector<std::uint64_t> key(words_);
    const std::size_t m = target_.sets[d].size();
    for (std::size_t j = 0; j < m; ++j) {
      bool any = false;
      for (std::size_t w = 0; w < words_; ++w) {
        key[w] = masks_[d][j * words_ + w] & active[w];
        any |= key[w] != 0;
      }
      if (any) ++classes[key];
    }
    std::uint64_t total = 0;
    for (const auto& [cls, cnt] : classes) total += cnt * rec(d + 1, cls);
    memo_.emplace(std::move(memo_key), total);
    return total;
  }

  const FactoredSignature& target_;
  std::size_t n_, k_, words_;
  std::vector<std::vector<std::uint64_t>> masks_;  // [dim][member * words + w]
  std::map<std::pair<std::size_t, std::vector<std::uint64_t>>, std::uint64_t> memo_;
};

}  // namespace detail

/// |target ∩ ∪ covers| for products over the same level vector, computed
/// without materializing any product. Members of one dimension are grouped
/// by the subset of covers containing them, then the count recurses on the
/// next dimension with that subset only.
inline std::uint64_t count_union_coverage(const FactoredSignature& target,
                                          std::span<const FactoredSignature> covers) {
  for (const auto& c : covers)
    if (c.levels != target.levels) throw Error(Errc::level_mismatch, "signatures at different levels");
  if (target.cardinality() == 0) return 0;
  return detail::UnionCounter(target, covers).count();
}

/// Coordinate-by-coordinate split of `target` against the union of `covers`,
/// streaming the target product with per-dimension membership tests.
inline CoveragePartition<Coord> enumerate_union_coverage(const FactoredSignature& target,
                                                         std::span<const FactoredSignature> covers,
                                                         std::uint64_t cap = 10'000'000) {
  CoveragePartition<Coord> p;
  for (auto& c : target.enumerate(cap)) {
    bool hit = std::any_of(covers.begin(), covers.end(), [&](const FactoredSignature& s) { return s.contains(c); });
    (hit ? p.covered : p.novel).push_back(std::move(c));
  }
  return p;
}

/// |a ∩ b| for two products at the same levels.
inline std::uint64_t count_intersection(const FactoredSignature& a, const FactoredSignature& b) {
  if (a.levels != b.levels) throw Error(Errc::level_mismatch, "signatures at different levels");
  std::uint64_t n = 1;
  for (std::size_t d = 0; d < a.sets.size(); ++d) {
    std::uint64_t common = 0;
    std::size_t i = 0, j = 0;
    while (i < a.sets[d].size() && j < b.sets[d].size()) {
      if (a.sets[d][i] < b.sets[d][j]) ++i;
      else if (b.sets[d][j] < a.sets[d][i]) ++j;
      else { ++common; ++i; ++j; }
    }
    if (common == 0) return 0;
    n *= common;
  }
  return n;
}

/// True iff every per-dimension set of `inner` is a subset of the one in `outer`.
inline bool factored_subset(const FactoredSignature& inner, const FactoredSignature& outer) {
  if (inner.levels != outer.levels) throw Error(Errc::level_mismatch, "signatures at different levels");
  if (inner.cardinality() == 0) return true;
  for (std::size_t d = 0; d < inner.sets.size(); ++d)
    if (!std::includes(outer.sets[d].begin(), outer.sets[d].end(), inner.sets[d].begin(), inner.sets[d].end()))
      return false;
  return true;
}

/// Sorted-merge intersection and union sizes of two row sets.
inline std::pair<std::size_t, std::size_t> intersection_union_size(std::span<const RowId> a, std::span<const RowId> b) {
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++common; ++i; ++j; }
  }
  return {common, a.size() + b.size() - common};
}

}  // namespace cubeint
