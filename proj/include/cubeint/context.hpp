#pragma once

// Assessment context: query history with optional cached results, belief
// store, goals, beacon queries, and expected values/labels.

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cubeint/beliefs.hpp"
#include "cubeint/csv.hpp"
#include "cubeint/engine.hpp"
#include "cubeint/error.hpp"

namespace cubeint {

/// Aggregates as a sorted multiset, so order inside a query does not matter.
inline std::vector<Aggregate> aggregate_multiset(const CubeQuery& q) {
  auto a = q.aggregates;
  std::sort(a.begin(), a.end());
  return a;
}

inline bool same_aggregates(const CubeQuery& a, const CubeQuery& b) {
  return aggregate_multiset(a) == aggregate_multiset(b);
}

struct HistoryEntry {
  CubeQuery query;
  std::optional<CellSet> cached;
  std::string session;
  std::size_t seq = 0;
};

class QueryHistory {
 public:
  /// Appends without a cached result.
  void append(const CubeSchema& schema, CubeQuery q, std::string session = "default") {
    validate(schema, q);
    entries_.push_back({std::move(q), std::nullopt, std::move(session), next_seq_++});
  }

  /// Appends with a cached result, which must equal a fresh evaluation.
  void append(const DetailedCube& cube, CubeQuery q, CellSet result, std::string session = "default") {
    validate(cube.schema(), q);
    if (evaluate(cube, q) != result)
      throw Error(Errc::cached_result_mismatch, "cached result does not match the query's evaluation");
    entries_.push_back({std::move(q), std::move(result), std::move(session), next_seq_++});
  }

  const std::vector<HistoryEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::vector<CubeQuery> queries() const {
    std::vector<CubeQuery> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.query);
    return out;
  }

  /// Session ids in order of first appearance.
  std::vector<std::string> sessions() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (std::find(out.begin(), out.end(), e.session) == out.end()) out.push_back(e.session);
    return out;
  }

  QueryHistory session(const std::string& id) const {
    QueryHistory h;
    for (const auto& e : entries_)
      if (e.session == id) h.entries_.push_back(e);
    h.next_seq_ = next_seq_;
    return h;
  }

 private:
  std::vector<HistoryEntry> entries_;
  std::size_t next_seq_ = 0;
};

/// History entries whose aggregate multiset equals q's.
inline std::vector<CubeQuery> filter_history_same_measures(std::span<const CubeQuery> history, const CubeQuery& q) {
  std::vector<CubeQuery> out;
  auto want = aggregate_multiset(q);
  for (const auto& h : history)
    if (aggregate_multiset(h) == want) out.push_back(h);
  return out;
}

inline std::vector<CubeQuery> filter_history_same_measures(const QueryHistory& history, const CubeQuery& q) {
  auto all = history.queries();
  return filter_history_same_measures(std::span<const CubeQuery>(all), q);
}

/// Statements grouped by anchor. Per-anchor probabilities need not sum to one.
class BeliefStore {
 public:
  void add(BeliefStatement s) {
    if (!(s.probability >= 0.0 && s.probability <= 1.0))
      throw Error(Errc::probability_out_of_range, "belief probability outside [0,1]");
    by_anchor_[s.anchor].push_back(statements_.size());
    statements_.push_back(std::move(s));
  }

  const std::vector<BeliefStatement>& statements() const noexcept { return statements_; }
  bool empty() const noexcept { return statements_.empty(); }
  std::size_t size() const noexcept { return statements_.size(); }

  /// Statements anchored exactly at (levels, coord), optionally restricted to one cell measure label.
  std::vector<const BeliefStatement*> at(const LevelVector& levels, std::span<const MemberId> coord,
                                         std::optional<std::string_view> cell_measure = std::nullopt) const {
    std::vector<const BeliefStatement*> out;
    auto it = by_anchor_.find(Anchor{levels, Coord(coord.begin(), coord.end())});
    if (it == by_anchor_.end()) return out;
    for (std::size_t i : it->second) {
      const auto& s = statements_[i];
      if (!cell_measure || measure_matches(s.measure, *cell_measure)) out.push_back(&s);
    }
    return out;
  }

  /// Anchors owning at least one statement with probability >= pi. When
  /// `measures` is given, only statements on one of those cell measures count.
  std::vector<Anchor> known_cells(double pi, const std::vector<std::string>* measures = nullptr) const {
    if (!(pi >= 0.0 && pi <= 1.0)) throw Error(Errc::probability_out_of_range, "threshold outside [0,1]");
    std::vector<Anchor> out;
    for (const auto& [anchor, idx] : by_anchor_) {
      bool known = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) {
        const auto& s = statements_[i];
        if (s.probability < pi) return false;
        if (!measures) return true;
        return std::any_of(measures->begin(), measures->end(),
                           [&](const std::string& m) { return measure_matches(s.measure, m); });
      });
      if (known) out.push_back(anchor);
    }
    return out;
  }

 private:
  std::vector<BeliefStatement> statements_;
  std::map<Anchor, std::vector<std::size_t>> by_anchor_;
};

namespace detail {

/// Parses `Dim.Level` header columns plus two trailing columns into anchors.
template <class Value, class Convert>
std::map<std::pair<Anchor, std::string>, Value> load_anchor_csv(const CubeSchema& s, std::istream& in,
                                                               const char* what, Convert&& convert) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(Errc::empty_file, std::string(what) + " file is empty");
  const auto& header = rows.front();
  if (header.size() < 2) throw Error(Errc::invalid_argument, std::string(what) + " header needs measure and value columns");
  const std::size_t ncoord = header.size() - 2;
  std::vector<std::pair<int, int>> cols;
  for (std::size_t c = 0; c < ncoord; ++c) {
    auto dot = header[c].find('.');
    if (dot == std::string::npos) throw Error(Errc::invalid_argument, "column '" + header[c] + "' is not Dim.Level");
    int d = s.dim_index(header[c].substr(0, dot));
    int l = s.dims[d].level(header[c].substr(dot + 1));
    for (const auto& [od, ol] : cols)
      if (od == d) throw Error(Errc::duplicate_dimension_atom, "dimension " + s.dims[d].name() + " appears twice");
    cols.emplace_back(d, l);
  }
  std::map<std::pair<Anchor, std::string>, Value> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw Error(Errc::invalid_argument, std::string(what) + " row " + std::to_string(r) + " has wrong arity");
    Anchor a{s.all_levels(), Coord(s.dim_count(), 0)};
    for (std::size_t c = 0; c < ncoord; ++c) {
      auto [d, l] = cols[c];
      a.levels[d] = l;
      a.coord[d] = s.dims[d].member(l, row[c]).id;
    }
    out[{std::move(a), row[ncoord]}] = convert(row[ncoord + 1], r);
  }
  return out;
}

}  // namespace detail

/// Expected measure values per (anchor, measure). The measure is a base
/// name or an aggregate label and matches cells via measure_matches.
class ExpectedValues {
 public:
  void set(Anchor a, std::string measure, double v) { values_[{std::move(a), std::move(measure)}] = v; }

  std::optional<double> find(const LevelVector& levels, std::span<const MemberId> coord,
                             std::string_view cell_measure) const {
    Anchor a{levels, Coord(coord.begin(), coord.end())};
    // an exact label beats a base-measure match
    if (auto it = values_.find({a, std::string(cell_measure)}); it != values_.end()) return it->second;
    auto it = values_.lower_bound({a, std::string()});
    for (; it != values_.end() && it->first.first == a; ++it)
      if (measure_matches(it->first.second, cell_measure)) return it->second;
    return std::nullopt;
  }

  bool empty() const noexcept { return values_.empty(); }
  std::size_t size() const noexcept { return values_.size(); }

  static ExpectedValues load(const CubeSchema& s, std::istream& in) {
    ExpectedValues e;
    e.values_ = detail::load_anchor_csv<double>(s, in, "expected values", [](const std::string& v, std::size_t r) {
      try {
        return std::stod(v);
      } catch (const std::exception&) {
        throw Error(Errc::invalid_argument, "non-numeric expected value in row " + std::to_string(r));
      }
    });
    return e;
  }

 private:
  std::map<std::pair<Anchor, std::string>, double> values_;
};

class ExpectedLabels {
 public:
  void set(Anchor a, std::string measure, std::string label) {
    labels_[{std::move(a), std::move(measure)}] = std::move(label);
  }

  std::optional<std::string> find(const LevelVector& levels, std::span<const MemberId> coord,
                                  std::string_view cell_measure) const {
    Anchor a{levels, Coord(coord.begin(), coord.end())};
    // an exact label beats a base-measure match
    if (auto it = labels_.find({a, std::string(cell_measure)}); it != labels_.end()) return it->second;
    auto it = labels_.lower_bound({a, std::string()});
    for (; it != labels_.end() && it->first.first == a; ++it)
      if (measure_matches(it->first.second, cell_measure)) return it->second;
    return std::nullopt;
  }

  bool empty() const noexcept { return labels_.empty(); }
  std::size_t size() const noexcept { return labels_.size(); }

  static ExpectedLabels load(const CubeSchema& s, std::istream& in) {
    ExpectedLabels e;
    e.labels_ = detail::load_anchor_csv<std::string>(s, in, "expected labels",
                                                     [](const std::string& v, std::size_t) { return v; });
    return e;
  }

 private:
  std::map<std::pair<Anchor, std::string>, std::string> labels_;
};

/// Everything a query is assessed against. Fields left empty make the
/// metrics depending on them not assessable.
struct SessionContext {
  QueryHistory history;
  BeliefStore beliefs;
  std::vector<SelectionCondition> goals;
  std::vector<CubeQuery> beacons;
  ExpectedValues expected_values;
  ExpectedLabels expected_labels;
  std::optional<LabelingScheme> labels;
};

}  // namespace cubeint
