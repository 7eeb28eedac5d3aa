#pragma once

// Value types for user expectations: probabilistic cell statements and
// labeling schemes over measure values.

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cubeint/engine.hpp"

namespace cubeint {

/// Real interval with independently open or closed ends; infinite ends allowed.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double x) const noexcept {
    if (x < lo || x > hi) return false;
    if (x == lo && !lo_closed) return false;
    if (x == hi && !hi_closed) return false;
    return true;
  }
  bool empty() const noexcept { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }

  bool overlaps(const Interval& o) const noexcept {
    if (empty() || o.empty()) return false;
    if (hi < o.lo || o.hi < lo) return false;
    if (hi == o.lo) return hi_closed && o.lo_closed;
    if (o.hi == lo) return o.hi_closed && lo_closed;
    return true;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A coordinate at a stated level vector; dimensions left unstated sit at ALL.
struct Anchor {
  LevelVector levels;
  Coord coord;

  friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

enum class BeliefKind { value_set, range, label };

/// p(M ∈ values | anchor) = probability, or p(label(M) = λ | anchor) = probability.
struct BeliefStatement {
  Anchor anchor;
  std::string measure;  // base measure name or an aggregate label such as avg(Amt)
  BeliefKind kind = BeliefKind::value_set;
  std::vector<double> values;  // value_set, sorted
  Interval range;              // range
  std::string label;           // label
  double probability = 0;

  bool admits(double v) const {
    if (kind == BeliefKind::range) return range.contains(v);
    return std::binary_search(values.begin(), values.end(), v);
  }

  friend bool operator==(const BeliefStatement&, const BeliefStatement&) = default;
};

/// True when `ref` names the measure carried under `cell_label`, either
/// verbatim ("avg(Amt)") or by its base measure ("Amt").
inline bool measure_matches(std::string_view ref, std::string_view cell_label) {
  if (ref == cell_label) return true;
  auto open = cell_label.find('(');
  if (open == std::string_view::npos || cell_label.back() != ')') return false;
  return cell_label.substr(open + 1, cell_label.size() - open - 2) == ref;
}

enum class LabelKind { nominal, ordinal, interval };

struct LabelDomain {
  std::vector<std::string> labels;  // in declared order for ordinal/interval kinds
  LabelKind kind = LabelKind::nominal;

  std::optional<std::size_t> position(std::string_view l) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == l) return i;
    return std::nullopt;
  }

  /// |pos(a) - pos(b)| / (|Λ| - 1). Requires an ordered domain.
  double distance(std::string_view a, std::string_view b) const {
    if (kind == LabelKind::nominal)
      throw Error(Errc::nominal_loose_unsupported, "nominal labels have no distance");
    auto pa = position(a), pb = position(b);
    if (!pa || !pb) throw Error(Errc::unknown_identifier, "label not in the domain");
    if (labels.size() < 2) return 0;
    double gap = *pa > *pb ? double(*pa - *pb) : double(*pb - *pa);
    return gap / static_cast<double>(labels.size() - 1);
  }

  friend bool operator==(const LabelDomain&, const LabelDomain&) = default;
};

struct LabelRule {
  Interval range;
  std::string label;

  friend bool operator==(const LabelRule&, const LabelRule&) = default;
};

/// Per-measure interval lookup into one shared label domain.
struct LabelingScheme {
  std::map<std::string, std::vector<LabelRule>> rules;  // per measure, sorted by lower bound
  LabelDomain domain;

  /// Rules for a cell measure label (exact name first, then its base measure).
  const std::vector<LabelRule>* rules_for(std::string_view cell_measure) const {
    if (auto it = rules.find(std::string(cell_measure)); it != rules.end()) return &it->second;
    for (const auto& [m, r] : rules)
      if (measure_matches(m, cell_measure)) return &r;
    return nullptr;
  }

  std::optional<std::string> label_of(std::string_view cell_measure, double v) const {
    const auto* r = rules_for(cell_measure);
    if (!r) return std::nullopt;
    for (const auto& rule : *r)
      if (rule.range.contains(v)) return rule.label;
    return std::nullopt;
  }

  friend bool operator==(const LabelingScheme&, const LabelingScheme&) = default;
};

}  // namespace cubeint
