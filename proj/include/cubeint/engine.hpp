#pragma once

// Detailed fact cube, cube queries, and their evaluation: filter on the
// detailed proxy, roll up to the grouper levels, aggregate.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cubeint/csv.hpp"
#include "cubeint/error.hpp"
#include "cubeint/mdm.hpp"

namespace cubeint {

using RowId = std::uint32_t;
using Coord = std::vector<MemberId>;
/// One level depth per dimension, in cube dimension order.
using LevelVector = std::vector<int>;
/// Sorted, duplicate-free fact row ids. Fact coordinates are unique, so a
/// row id stands for exactly one detailed cell.
using RowSet = std::vector<RowId>;

struct CubeSchema {
  std::vector<Dimension> dims;
  std::vector<std::string> measures;

  std::size_t dim_count() const noexcept { return dims.size(); }

  std::optional<int> find_dim(std::string_view name) const {
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (dims[i].name() == name) return static_cast<int>(i);
    return std::nullopt;
  }
  int dim_index(std::string_view name) const {
    if (auto d = find_dim(name)) return *d;
    throw Error(Errc::unknown_dimension, "no dimension named '" + std::string(name) + "'");
  }
  std::optional<int> find_measure(std::string_view name) const {
    for (std::size_t i = 0; i < measures.size(); ++i)
      if (measures[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }
  int measure_index(std::string_view name) const {
    if (auto m = find_measure(name)) return *m;
    throw Error(Errc::unknown_measure, "no measure named '" + std::string(name) + "'");
  }
  LevelVector base_levels() const { return LevelVector(dims.size(), 0); }
  LevelVector all_levels() const {
    LevelVector l;
    for (const auto& d : dims) l.push_back(d.height());
    return l;
  }
};

enum class AggFn { sum, avg, count, min, max };

inline const char* agg_fn_name(AggFn f) {
  switch (f) {
    case AggFn::sum: return "sum";
    case AggFn::avg: return "avg";
    case AggFn::count: return "count";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
  }
  return "?";
}

inline std::optional<AggFn> parse_agg_fn(std::string_view s) {
  std::string l;
  for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "sum") return AggFn::sum;
  if (l == "avg") return AggFn::avg;
  if (l == "count") return AggFn::count;
  if (l == "min") return AggFn::min;
  if (l == "max") return AggFn::max;
  return std::nullopt;
}

struct Aggregate {
  AggFn fn = AggFn::sum;
  int measure = 0;

  friend auto operator<=>(const Aggregate&, const Aggregate&) = default;
};

inline std::string aggregate_label(const CubeSchema& s, const Aggregate& a) {
  return std::string(agg_fn_name(a.fn)) + "(" + s.measures.at(a.measure) + ")";
}

/// `level IN {values}` on one dimension. Values are sorted and unique.
struct AtomicFilter {
  int dim = 0;
  int level = 0;
  std::vector<MemberId> values;

  friend bool operator==(const AtomicFilter&, const AtomicFilter&) = default;
};

/// Conjunction of atomic filters, at most one per dimension, kept sorted by
/// dimension. A dimension without an atom is unconstrained (ALL IN {all}).
class SelectionCondition {
 public:
  SelectionCondition() = default;

  void add(AtomicFilter atom) {
    if (atom.values.empty()) throw Error(Errc::invalid_argument, "atomic filter with no values");
    std::sort(atom.values.begin(), atom.values.end());
    atom.values.erase(std::unique(atom.values.begin(), atom.values.end()), atom.values.end());
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom.dim,
                               [](const AtomicFilter& a, int d) { return a.dim < d; });
    if (it != atoms_.end() && it->dim == atom.dim)
      throw Error(Errc::duplicate_dimension_atom,
                  "dimension #" + std::to_string(atom.dim) + " already has an atom");
    atoms_.insert(it, std::move(atom));
  }

  const AtomicFilter* find(int dim) const {
    for (const auto& a : atoms_)
      if (a.dim == dim) return &a;
    return nullptr;
  }
  const std::vector<AtomicFilter>& atoms() const noexcept { return atoms_; }
  bool empty() const noexcept { return atoms_.empty(); }

  friend bool operator==(const SelectionCondition&, const SelectionCondition&) = default;

 private:
  std::vector<AtomicFilter> atoms_;
};

/// ⟨C0, condition, grouper levels, aggregates⟩ over a given CubeSchema.
struct CubeQuery {
  SelectionCondition condition;
  LevelVector groupers;
  std::vector<Aggregate> aggregates;

  friend bool operator==(const CubeQuery&, const CubeQuery&) = default;
};

inline void validate(const CubeSchema& s, const SelectionCondition& c) {
  for (const auto& a : c.atoms()) {
    if (a.dim < 0 || a.dim >= static_cast<int>(s.dim_count()))
      throw Error(Errc::unknown_dimension, "atom on dimension #" + std::to_string(a.dim));
    const auto& d = s.dims[a.dim];
    if (a.level < 0 || a.level >= d.level_count())
      throw Error(Errc::unknown_level, "atom level out of range on " + d.name());
    for (MemberId v : a.values)
      if (!d.contains({a.level, v}))
        throw Error(Errc::unknown_member, "atom value out of range on " + d.name());
  }
}

inline void validate(const CubeSchema& s, const CubeQuery& q) {
  validate(s, q.condition);
  if (q.groupers.size() != s.dim_count())
    throw Error(Errc::dimension_mismatch, "query has " + std::to_string(q.groupers.size()) +
                                              " groupers for " + std::to_string(s.dim_count()) +
                                              " dimensions");
  for (std::size_t i = 0; i < q.groupers.size(); ++i)
    if (q.groupers[i] < 0 || q.groupers[i] >= s.dims[i].level_count())
      throw Error(Errc::unknown_level, "grouper level out of range on " + s.dims[i].name());
  if (q.aggregates.empty()) throw Error(Errc::invalid_argument, "query has no aggregates");
  for (const auto& a : q.aggregates)
    if (a.measure < 0 || a.measure >= static_cast<int>(s.measures.size()))
      throw Error(Errc::unknown_measure, "aggregate over measure #" + std::to_string(a.measure));
}

/// Per-dimension member sets whose Cartesian product is the signature.
struct FactoredSignature {
  LevelVector levels;
  std::vector<std::vector<MemberId>> sets;  // each sorted, unique

  /// Product cardinality; throws if it does not fit in 64 bits.
  std::uint64_t cardinality() const {
    std::uint64_t n = 1;
    for (const auto& s : sets) {
      if (s.empty()) return 0;
      if (n > std::numeric_limits<std::uint64_t>::max() / s.size())
        throw Error(Errc::invalid_argument, "signature cardinality overflows 64 bits");
      n *= s.size();
    }
    return n;
  }

  bool contains(std::span<const MemberId> coord) const {
    if (coord.size() != sets.size()) return false;
    for (std::size_t d = 0; d < sets.size(); ++d)
      if (!std::binary_search(sets[d].begin(), sets[d].end(), coord[d])) return false;
    return true;
  }

  /// Materializes the product in lexicographic order. Throws past `cap` coordinates.
  std::vector<Coord> enumerate(std::uint64_t cap = 10'000'000) const {
    const std::uint64_t n = cardinality();
    if (n > cap)
      throw Error(Errc::invalid_argument, "refusing to materialize " + std::to_string(n) + " coordinates");
    std::vector<Coord> out;
    if (n == 0) return out;
    out.reserve(n);
    std::vector<std::size_t> pos(sets.size(), 0);
    Coord c(sets.size());
    while (true) {
      for (std::size_t d = 0; d < sets.size(); ++d) c[d] = sets[d][pos[d]];
      out.push_back(c);
      std::size_t d = sets.size();
      while (d > 0) {
        --d;
        if (++pos[d] < sets[d].size()) break;
        pos[d] = 0;
        if (d == 0) return out;
      }
      if (sets.empty()) return out;
    }
  }

  friend bool operator==(const FactoredSignature&, const FactoredSignature&) = default;
};

/// Signature of a selection condition. `detailed` replaces each value set by
/// the union of its base-level descendants.
inline FactoredSignature condition_signature(const CubeSchema& s, const SelectionCondition& c,
                                             bool detailed) {
  FactoredSignature sig;
  for (std::size_t d = 0; d < s.dim_count(); ++d) {
    const Dimension& dim = s.dims[d];
    const AtomicFilter* a = c.find(static_cast<int>(d));
    std::vector<MemberId> set;
    if (!detailed) {
      if (a) {
        sig.levels.push_back(a->level);
        set = a->values;
      } else {
        sig.levels.push_back(dim.height());
        set = {0};
      }
    } else {
      sig.levels.push_back(0);
      if (!a || a->level == dim.height()) {
        set.resize(dim.cardinality(0));
        for (MemberId i = 0; i < set.size(); ++i) set[i] = i;
      } else {
        for (MemberId v : a->values) {
          auto bd = dim.base_desc({a->level, v});
          set.insert(set.end(), bd.begin(), bd.end());
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
      }
    }
    sig.sets.push_back(std::move(set));
  }
  return sig;
}

/// The detailed signature q0+ of a query: the signature of its detailed proxy filter.
inline FactoredSignature detailed_signature(const CubeSchema& s, const CubeQuery& q) {
  return condition_signature(s, q.condition, true);
}

/// Coordinates at the grouper levels that the query can produce. Rolling up a
/// product dimension-wise stays a product, so the result is exact and factored.
inline FactoredSignature query_signature(const CubeSchema& s, const CubeQuery& q) {
  FactoredSignature det = detailed_signature(s, q);
  FactoredSignature sig;
  sig.levels = q.groupers;
  for (std::size_t d = 0; d < s.dim_count(); ++d) {
    const Dimension& dim = s.dims[d];
    std::vector<MemberId> set;
    set.reserve(det.sets[d].size());
    for (MemberId b : det.sets[d]) set.push_back(dim.base_anc(b, q.groupers[d]));
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    sig.sets.push_back(std::move(set));
  }
  return sig;
}

/// Same query with its condition rewritten to base levels and groupers at base levels.
inline CubeQuery detailed_proxy(const CubeSchema& s, const CubeQuery& q) {
  CubeQuery p;
  p.aggregates = q.aggregates;
  p.groupers = s.base_levels();
  FactoredSignature det = detailed_signature(s, q);
  for (const auto& a : q.condition.atoms()) {
    if (a.level == s.dims[a.dim].height()) continue;  // ALL IN {all} selects everything
    p.condition.add(AtomicFilter{a.dim, 0, det.sets[a.dim]});
  }
  return p;
}

/// Mixed-radix packing of coordinates into a 64-bit key.
class CoordPacker {
 public:
  CoordPacker() = default;
  CoordPacker(const CubeSchema& s, const LevelVector& levels) {
    std::uint64_t span = 1;
    for (std::size_t d = 0; d < levels.size(); ++d) {
      std::uint64_t card = s.dims[d].cardinality(levels[d]);
      radix_.push_back(card);
      if (card && span > std::numeric_limits<std::uint64_t>::max() / card)
        throw Error(Errc::invalid_argument, "coordinate space too large to pack into 64 bits");
      span *= card;
    }
  }
  std::uint64_t pack(std::span<const MemberId> c) const {
    std::uint64_t k = 0;
    for (std::size_t d = 0; d < radix_.size(); ++d) k = k * radix_[d] + c[d];
    return k;
  }
  Coord unpack(std::uint64_t k) const {
    Coord c(radix_.size());
    for (std::size_t d = radix_.size(); d-- > 0;) {
      c[d] = static_cast<MemberId>(k % radix_[d]);
      k /= radix_[d];
    }
    return c;
  }

 private:
  std::vector<std::uint64_t> radix_;
};

struct Cell {
  Coord coord;
  std::vector<double> measures;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Cells at a fixed level vector, sorted by coordinate.
struct CellSet {
  LevelVector levels;
  std::vector<std::string> measure_names;
  std::vector<Cell> cells;

  std::size_t size() const noexcept { return cells.size(); }
  bool empty() const noexcept { return cells.empty(); }

  const Cell* find(std::span<const MemberId> coord) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), coord, [](const Cell& c, std::span<const MemberId> k) {
      return std::lexicographical_compare(c.coord.begin(), c.coord.end(), k.begin(), k.end());
    });
    if (it != cells.end() && std::equal(it->coord.begin(), it->coord.end(), coord.begin(), coord.end()))
      return &*it;
    return nullptr;
  }

  void sort() {
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.coord < b.coord; });
  }

  friend bool operator==(const CellSet&, const CellSet&) = default;
};

/// The detailed cube C0: one row per base coordinate, stored column-wise.
class DetailedCube {
 public:
  DetailedCube() = default;
  explicit DetailedCube(CubeSchema schema) : schema_(std::move(schema)) {
    columns_.resize(schema_.dim_count());
    measures_.resize(schema_.measures.size());
    packer_ = CoordPacker(schema_, schema_.base_levels());
  }

  const CubeSchema& schema() const noexcept { return schema_; }
  std::size_t size() const noexcept { return columns_.empty() ? 0 : columns_[0].size(); }

  void reserve(std::size_t n) {
    for (auto& c : columns_) c.reserve(n);
    for (auto& m : measures_) m.reserve(n);
    keys_.reserve(n);
  }

  /// Appends one fact. Rejects a coordinate that is already present.
  RowId add_row(std::span<const MemberId> coord, std::span<const double> values) {
    if (coord.size() != schema_.dim_count() || values.size() != schema_.measures.size())
      throw Error(Errc::dimension_mismatch, "fact row arity does not match the cube schema");
    for (std::size_t d = 0; d < coord.size(); ++d)
      if (coord[d] >= schema_.dims[d].cardinality(0))
        throw Error(Errc::unknown_member, "fact coordinate out of range on " + schema_.dims[d].name());
    if (!keys_.insert(packer_.pack(coord)).second)
      throw Error(Errc::duplicate_coordinate, "duplicate detailed coordinate " + describe(coord));
    for (std::size_t d = 0; d < coord.size(); ++d) columns_[d].push_back(coord[d]);
    for (std::size_t m = 0; m < values.size(); ++m) measures_[m].push_back(values[m]);
    return static_cast<RowId>(size() - 1);
  }

  std::span<const MemberId> column(std::size_t dim) const { return columns_[dim]; }
  std::span<const double> measure_column(std::size_t m) const { return measures_[m]; }
  MemberId at(std::size_t dim, RowId row) const { return columns_[dim][row]; }
  double measure(std::size_t m, RowId row) const { return measures_[m][row]; }
  Coord row_coord(RowId row) const {
    Coord c(columns_.size());
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = columns_[d][row];
    return c;
  }

  std::string describe(std::span<const MemberId> coord) const {
    std::string s = "(";
    for (std::size_t d = 0; d < coord.size(); ++d) {
      if (d) s += ", ";
      s += schema_.dims[d].label({0, coord[d]});
    }
    return s + ")";
  }

 private:
  CubeSchema schema_;
  std::vector<std::vector<MemberId>> columns_;
  std::vector<std::vector<double>> measures_;
  CoordPacker packer_;
  std::unordered_set<std::uint64_t> keys_;
};

/// Reads a fact CSV. Header: one column per dimension (named by the
/// dimension, its base level, or Dim.Level for the base level) in any order,
/// then the measure columns.
inline DetailedCube load_facts(std::vector<Dimension> dims, std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(Errc::empty_file, "fact file is empty");
  const auto& header = rows.front();
  std::vector<int> col_dim(header.size(), -1);
  std::vector<Dimension> ordered;
  std::vector<std::string> measures;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    int hit = -1;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const auto& dim = dims[d];
      if (h == dim.name() || h == dim.level_name(0) || h == dim.name() + "." + dim.level_name(0)) {
        hit = static_cast<int>(d);
        break;
      }
    }
    if (hit >= 0) {
      if (!measures.empty())
        throw Error(Errc::invalid_argument, "dimension column '" + h + "' after measure columns");
      col_dim[c] = static_cast<int>(ordered.size());
      ordered.push_back(dims[hit]);
      dims.erase(dims.begin() + hit);
    } else {
      measures.push_back(h);
    }
  }
  if (ordered.empty()) throw Error(Errc::invalid_argument, "fact header names no known dimension");
  CubeSchema schema{std::move(ordered), std::move(measures)};
  DetailedCube cube(std::move(schema));
  const auto& s = cube.schema();
  cube.reserve(rows.size() - 1);
  Coord coord(s.dim_count());
  std::vector<double> vals(s.measures.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw Error(Errc::invalid_argument, "fact row " + std::to_string(r) + " has wrong arity");
    std::size_t m = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (col_dim[c] >= 0) {
        coord[col_dim[c]] = s.dims[col_dim[c]].member(0, row[c]).id;
      } else {
        try {
          vals[m++] = std::stod(row[c]);
        } catch (const std::exception&) {
          throw Error(Errc::invalid_argument, "non-numeric measure '" + row[c] + "' in fact row " + std::to_string(r));
        }
      }
    }
    cube.add_row(coord, vals);
  }
  return cube;
}

/// Rows selected by the condition, evaluated through its detailed proxy.
inline RowSet select_rows(const DetailedCube& cube, const SelectionCondition& cond) {
  const auto& s = cube.schema();
  struct Mask {
    std::size_t dim;
    std::vector<char> allowed;
  };
  std::vector<Mask> masks;
  FactoredSignature det = condition_signature(s, cond, true);
  for (const auto& a : cond.atoms()) {
    if (a.level == s.dims[a.dim].height()) continue;
    Mask m{static_cast<std::size_t>(a.dim), std::vector<char>(s.dims[a.dim].cardinality(0), 0)};
    for (MemberId b : det.sets[a.dim]) m.allowed[b] = 1;
    masks.push_back(std::move(m));
  }
  RowSet out;
  const std::size_t n = cube.size();
  if (masks.empty()) {
    out.resize(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = static_cast<RowId>(r);
    return out;
  }
  std::vector<std::span<const MemberId>> cols;
  for (const auto& m : masks) cols.push_back(cube.column(m.dim));
  for (std::size_t r = 0; r < n; ++r) {
    bool ok = true;
    for (std::size_t i = 0; i < masks.size() && ok; ++i) ok = masks[i].allowed[cols[i][r]] != 0;
    if (ok) out.push_back(static_cast<RowId>(r));
  }
  return out;
}

/// Fact rows a query aggregates over (the rows of its detailed area).
inline RowSet detailed_rows(const DetailedCube& cube, const CubeQuery& q) {
  return select_rows(cube, q.condition);
}

namespace detail {

struct AggAcc {
  double sum = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::uint64_t count = 0;

  void add(double v) {
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
    ++count;
  }
  double value(AggFn f) const {
    switch (f) {
      case AggFn::sum: return sum;
      case AggFn::avg: return sum / static_cast<double>(count);
      case AggFn::count: return static_cast<double>(count);
      case AggFn::min: return min;
      case AggFn::max: return max;
    }
    return 0;
  }
};

}  // namespace detail

/// Groups the given rows by their ancestors at `levels`. Returns groups
/// sorted by coordinate; rows inside a group keep their input order.
inline std::vector<std::pair<Coord, RowSet>> group_rows(const DetailedCube& cube, std::span<const RowId> rows,
                                                        const LevelVector& levels) {
  const auto& s = cube.schema();
  CoordPacker packer(s, levels);
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<std::pair<Coord, RowSet>> groups;
  Coord c(s.dim_count());
  for (RowId r : rows) {
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = s.dims[d].base_anc(cube.at(d, r), levels[d]);
    auto [it, inserted] = slot.emplace(packer.pack(c), groups.size());
    if (inserted) groups.emplace_back(c, RowSet{});
    groups[it->second].second.push_back(r);
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return groups;
}

/// Filter, roll up, aggregate. Only groups with at least one fact appear.
inline CellSet evaluate(const DetailedCube& cube, const CubeQuery& q) {
  const auto& s = cube.schema();
  validate(s, q);
  RowSet rows = detailed_rows(cube, q);
  CellSet out;
  out.levels = q.groupers;
  for (const auto& a : q.aggregates) out.measure_names.push_back(aggregate_label(s, a));

  CoordPacker packer(s, q.groupers);
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<Coord> coords;
  std::vector<detail::AggAcc> accs;  // coords.size() * aggregates.size()
  const std::size_t na = q.aggregates.size();
  Coord c(s.dim_count());
  for (RowId r : rows) {
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = s.dims[d].base_anc(cube.at(d, r), q.groupers[d]);
    auto [it, inserted] = slot.emplace(packer.pack(c), coords.size());
    if (inserted) {
      coords.push_back(c);
      accs.resize(accs.size() + na);
    }
    for (std::size_t i = 0; i < na; ++i) accs[it->second * na + i].add(cube.measure(q.aggregates[i].measure, r));
  }
  out.cells.reserve(coords.size());
  for (std::size_t g = 0; g < coords.size(); ++g) {
    Cell cell{std::move(coords[g]), {}};
    for (std::size_t i = 0; i < na; ++i) cell.measures.push_back(accs[g * na + i].value(q.aggregates[i].fn));
    out.cells.push_back(std::move(cell));
  }
  out.sort();
  return out;
}

/// Base-level cells the query aggregates over: the result of its detailed proxy.
inline CellSet detailed_area(const DetailedCube& cube, const CubeQuery& q) {
  return evaluate(cube, detailed_proxy(cube.schema(), q));
}

/// Mean of per-dimension LCA value distances; members may sit at different levels.
inline double cell_distance(const CubeSchema& s, const LevelVector& la, std::span<const MemberId> a,
                            const LevelVector& lb, std::span<const MemberId> b) {
  const std::size_t n = s.dim_count();
  if (la.size() != n || lb.size() != n || a.size() != n || b.size() != n)
    throw Error(Errc::dimension_mismatch, "cells are not over the cube's dimensions");
  double acc = 0;
  for (std::size_t d = 0; d < n; ++d) acc += s.dims[d].value_distance({la[d], a[d]}, {lb[d], b[d]});
  return acc / static_cast<double>(n);
}

}  // namespace cubeint
