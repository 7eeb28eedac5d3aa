#pragma once

// Dimension hierarchies: levels, members, rollup maps, and the
// ancestor/descendant/LCA machinery everything else is built on.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cubeint/csv.hpp"
#include "cubeint/error.hpp"

namespace cubeint {

using MemberId = std::uint32_t;

inline constexpr std::string_view kAllLevel = "ALL";
inline constexpr std::string_view kAllMember = "all";

/// A member of one dimension: its level depth plus its dense id within that level.
struct Member {
  int level = 0;
  MemberId id = 0;

  friend auto operator<=>(const Member&, const Member&) = default;
};

/// A linear hierarchy of levels, depth 0 (most detailed) up to depth
/// height() which is the synthesized ALL level holding the single member "all".
class Dimension {
 public:
  /// Builds from base-member rollup paths. `level_names` are finest to
  /// coarsest without ALL; every path has one label per level.
  static Dimension from_paths(std::string name, std::vector<std::string> level_names,
                              const std::vector<std::vector<std::string>>& paths) {
    if (level_names.empty()) throw Error(Errc::empty_file, "dimension " + name + " has no levels");
    for (const auto& ln : level_names)
      if (ln == kAllLevel) throw Error(Errc::invalid_argument, "level name ALL is reserved");
    Dimension d;
    d.name_ = std::move(name);
    d.level_names_ = std::move(level_names);
    d.level_names_.emplace_back(kAllLevel);
    const int h = static_cast<int>(d.level_names_.size()) - 1;
    d.labels_.resize(h + 1);
    d.index_.resize(h + 1);
    d.parent_.resize(h);
    d.labels_[h].emplace_back(kAllMember);
    d.index_[h].emplace(std::string(kAllMember), 0);

    for (const auto& path : paths) {
      if (static_cast<int>(path.size()) != h)
        throw Error(Errc::invalid_argument, "rollup row for " + d.name_ + " has " +
                                                std::to_string(path.size()) + " fields, expected " +
                                                std::to_string(h));
      std::vector<MemberId> ids(h);
      for (int lv = 0; lv < h; ++lv) ids[lv] = d.intern(lv, path[lv]);
      for (int lv = 0; lv < h; ++lv) {
        MemberId parent = lv + 1 < h ? ids[lv + 1] : 0;
        auto& pm = d.parent_[lv];
        if (pm.size() <= ids[lv]) pm.resize(ids[lv] + 1, kUnset);
        if (pm[ids[lv]] == kUnset) {
          pm[ids[lv]] = parent;
        } else if (pm[ids[lv]] != parent) {
          throw Error(Errc::inconsistent_rollup,
                      d.name_ + "." + d.level_names_[lv] + " member '" + path[lv] +
                          "' rolls up to both '" + d.labels_[lv + 1][pm[ids[lv]]] + "' and '" +
                          d.labels_[lv + 1][parent] + "'");
        }
      }
    }
    if (d.labels_[0].empty()) throw Error(Errc::empty_file, "dimension " + d.name_ + " has no members");
    d.build_indexes();
    return d;
  }

  const std::string& name() const noexcept { return name_; }
  /// Number of edges from the base level to ALL.
  int height() const noexcept { return static_cast<int>(level_names_.size()) - 1; }
  int level_count() const noexcept { return static_cast<int>(level_names_.size()); }
  const std::string& level_name(int depth) const { return level_names_.at(depth); }

  std::optional<int> find_level(std::string_view lname) const {
    for (int i = 0; i < level_count(); ++i)
      if (level_names_[i] == lname) return i;
    return std::nullopt;
  }
  int level(std::string_view lname) const {
    if (auto l = find_level(lname)) return *l;
    throw Error(Errc::level_not_in_dimension,
                "level '" + std::string(lname) + "' is not in dimension " + name_);
  }

  std::size_t cardinality(int depth) const { return labels_.at(depth).size(); }
  const std::string& label(Member m) const { return labels_.at(m.level).at(m.id); }
  Member all() const noexcept { return {height(), 0}; }

  std::optional<Member> find_member(int depth, std::string_view lbl) const {
    check_level(depth);
    auto it = index_[depth].find(std::string(lbl));
    if (it == index_[depth].end()) return std::nullopt;
    return Member{depth, it->second};
  }
  Member member(int depth, std::string_view lbl) const {
    if (auto m = find_member(depth, lbl)) return *m;
    throw Error(Errc::unknown_member, "no member '" + std::string(lbl) + "' at " + name_ + "." +
                                          level_names_[depth]);
  }
  bool contains(Member m) const noexcept {
    return m.level >= 0 && m.level < level_count() && m.id < labels_[m.level].size();
  }

  /// Ancestor of `v` at depth `to`; anc(v, v.level) == v.
  Member anc(Member v, int to) const {
    check_member(v);
    check_level(to);
    if (to < v.level)
      throw Error(Errc::level_below_member, "cannot roll " + name_ + "." + level_names_[v.level] +
                                                " up to lower level " + level_names_[to]);
    MemberId id = v.id;
    for (int lv = v.level; lv < to; ++lv) id = parent_[lv][id];
    return {to, id};
  }

  /// Ancestor of the base member `base_id` at depth `to` (table lookup).
  MemberId base_anc(MemberId base_id, int to) const { return base_anc_[to][base_id]; }

  /// Base-level members under `v`, sorted ascending.
  std::span<const MemberId> base_desc(Member v) const {
    check_member(v);
    const auto& off = desc_offsets_[v.level];
    return std::span<const MemberId>(desc_members_[v.level]).subspan(off[v.id], off[v.id + 1] - off[v.id]);
  }

  /// Members at depth `to` under `v`, sorted ascending; desc(v, v.level) == {v}.
  std::vector<MemberId> desc(Member v, int to) const {
    check_member(v);
    check_level(to);
    if (to > v.level)
      throw Error(Errc::level_above_member, "cannot drill " + name_ + "." + level_names_[v.level] +
                                                " down to higher level " + level_names_[to]);
    std::vector<MemberId> out;
    for (MemberId b : base_desc(v)) out.push_back(base_anc_[to][b]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Lowest member that is an ancestor-or-self of both.
  Member lca(Member a, Member b) const {
    check_member(a);
    check_member(b);
    int lv = std::max(a.level, b.level);
    Member x = anc(a, lv), y = anc(b, lv);
    while (x.id != y.id) {
      x = {lv + 1, parent_[lv][x.id]};
      y = {lv + 1, parent_[lv][y.id]};
      ++lv;
    }
    return x;
  }

  /// Hop count to the LCA from both sides, normalized by twice the height.
  double value_distance(Member a, Member b) const {
    Member c = lca(a, b);
    return static_cast<double>((c.level - a.level) + (c.level - b.level)) / (2.0 * height());
  }

 private:
  static constexpr MemberId kUnset = static_cast<MemberId>(-1);

  MemberId intern(int depth, const std::string& lbl) {
    auto [it, inserted] = index_[depth].emplace(lbl, static_cast<MemberId>(labels_[depth].size()));
    if (inserted) labels_[depth].push_back(lbl);
    return it->second;
  }

  void check_level(int depth) const {
    if (depth < 0 || depth >= level_count())
      throw Error(Errc::level_not_in_dimension,
                  "depth " + std::to_string(depth) + " is not a level of " + name_);
  }
  void check_member(Member m) const {
    check_level(m.level);
    if (m.id >= labels_[m.level].size())
      throw Error(Errc::unknown_member, "member id " + std::to_string(m.id) + " out of range at " +
                                            name_ + "." + level_names_[m.level]);
  }

  void build_indexes() {
    const int h = height();
    const std::size_t nbase = labels_[0].size();
    base_anc_.assign(h + 1, {});
    base_anc_[0].resize(nbase);
    for (MemberId b = 0; b < nbase; ++b) base_anc_[0][b] = b;
    for (int lv = 1; lv <= h; ++lv) {
      base_anc_[lv].resize(nbase);
      for (MemberId b = 0; b < nbase; ++b) base_anc_[lv][b] = lv == h ? 0 : parent_[lv - 1][base_anc_[lv - 1][b]];
    }
    desc_offsets_.assign(h + 1, {});
    desc_members_.assign(h + 1, {});
    for (int lv = 0; lv <= h; ++lv) {
      const std::size_t card = labels_[lv].size();
      std::vector<std::uint32_t> counts(card + 1, 0);
      for (MemberId b = 0; b < nbase; ++b) ++counts[base_anc_[lv][b] + 1];
      for (std::size_t i = 1; i <= card; ++i) counts[i] += counts[i - 1];
      desc_offsets_[lv] = counts;
      desc_members_[lv].resize(nbase);
      for (MemberId b = 0; b < nbase; ++b) desc_members_[lv][counts[base_anc_[lv][b]]++] = b;
    }
  }

  std::string name_;
  std::vector<std::string> level_names_;  // finest..coarsest, last is ALL
  std::vector<std::vector<std::string>> labels_;
  std::vector<std::unordered_map<std::string, MemberId>> index_;
  std::vector<std::vector<MemberId>> parent_;       // parent_[lv][id] -> id at lv+1
  std::vector<std::vector<MemberId>> base_anc_;     // base_anc_[lv][base id]
  std::vector<std::vector<std::uint32_t>> desc_offsets_;
  std::vector<std::vector<MemberId>> desc_members_;
};

/// Reads a hierarchy CSV: header names the levels finest to coarsest, each
/// data row is one base member's full rollup path. ALL is implicit.
inline Dimension load_dimension(std::string name, std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(Errc::empty_file, "hierarchy file for " + name + " is empty");
  std::vector<std::string> header = rows.front();
  rows.erase(rows.begin());
  if (rows.empty()) throw Error(Errc::empty_file, "hierarchy file for " + name + " has no members");
  return Dimension::from_paths(std::move(name), std::move(header), rows);
}

}  // namespace cubeint
