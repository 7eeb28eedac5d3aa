#pragma once

// Surprise: distance between what a query returns and what the user expects.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cubeint/beliefs.hpp"
#include "cubeint/context.hpp"
#include "cubeint/engine.hpp"

namespace cubeint {

/// Aggregation over a bag of per-measure or per-cell surprises. `count`
/// counts the strictly positive entries.
enum class SurpriseAgg { count, sum, mean, median, max, min };

inline const char* surprise_agg_name(SurpriseAgg a) {
  switch (a) {
    case SurpriseAgg::count: return "count";
    case SurpriseAgg::sum: return "sum";
    case SurpriseAgg::mean: return "mean";
    case SurpriseAgg::median: return "median";
    case SurpriseAgg::max: return "max";
    case SurpriseAgg::min: return "min";
  }
  return "?";
}

inline double apply_surprise_agg(std::vector<double> v, SurpriseAgg a) {
  if (v.empty()) throw Error(Errc::empty_collection, "surprise aggregation over an empty bag");
  switch (a) {
    case SurpriseAgg::count:
      return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0; }));
    case SurpriseAgg::sum: return std::accumulate(v.begin(), v.end(), 0.0);
    case SurpriseAgg::mean: return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    case SurpriseAgg::median: {
      std::sort(v.begin(), v.end());
      std::size_t m = v.size() / 2;
      return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
    }
    case SurpriseAgg::max: return *std::max_element(v.begin(), v.end());
    case SurpriseAgg::min: return *std::min_element(v.begin(), v.end());
  }
  return 0;
}

using MeasureDistance = std::function<double(double actual, double expected)>;

inline double absolute_difference(double a, double e) { return std::abs(a - e); }

struct SurpriseConfig {
  SurpriseAgg cell_agg = SurpriseAgg::mean;
  SurpriseAgg cube_agg = SurpriseAgg::mean;
  MeasureDistance distance = absolute_difference;
};

/// Per-measure distances of one cell to its expected values; measures
/// without an expectation are left out.
inline std::vector<double> measure_gaps(const CellSet& cells, const Cell& c, const ExpectedValues& e,
                                        const MeasureDistance& dist) {
  std::vector<double> out;
  for (std::size_t m = 0; m < c.measures.size(); ++m)
    if (auto exp = e.find(cells.levels, c.coord, cells.measure_names[m])) out.push_back(dist(c.measures[m], *exp));
  return out;
}

/// f_cell over per-measure gaps. Throws NoExpectedValues when nothing matches.
inline double cell_value_surprise(const CellSet& cells, const Cell& c, const ExpectedValues& e,
                                  const SurpriseConfig& cfg = {}) {
  auto gaps = measure_gaps(cells, c, e, cfg.distance);
  if (gaps.empty()) throw Error(Errc::no_expected_values, "cell has no expected value for any measure");
  return apply_surprise_agg(std::move(gaps), cfg.cell_agg);
}

/// Generic cube-level value surprise; nullopt when no cell has an expectation.
inline std::optional<double> value_surprise(const CellSet& cells, const ExpectedValues& e, const SurpriseConfig& cfg = {}) {
  std::vector<double> per_cell;
  for (const auto& c : cells.cells) {
    auto gaps = measure_gaps(cells, c, e, cfg.distance);
    if (!gaps.empty()) per_cell.push_back(apply_surprise_agg(std::move(gaps), cfg.cell_agg));
  }
  if (per_cell.empty()) return std::nullopt;
  return apply_surprise_agg(std::move(per_cell), cfg.cube_agg);
}

/// Average absolute gap over matched cells, min-max normalized over the
/// per-cell gaps: (avg - min) / (max - min), and 0 when max equals min.
inline std::optional<double> value_surprise_avg_normalized(const CellSet& cells, const ExpectedValues& e) {
  std::vector<double> per_cell;
  for (const auto& c : cells.cells) {
    auto gaps = measure_gaps(cells, c, e, absolute_difference);
    if (!gaps.empty()) per_cell.push_back(apply_surprise_agg(std::move(gaps), SurpriseAgg::mean));
  }
  if (per_cell.empty()) return std::nullopt;
  double lo = *std::min_element(per_cell.begin(), per_cell.end());
  double hi = *std::max_element(per_cell.begin(), per_cell.end());
  double avg = apply_surprise_agg(per_cell, SurpriseAgg::mean);
  return hi == lo ? 0.0 : (avg - lo) / (hi - lo);
}

enum class ProbabilityMode { exact, interval };

/// Total probability of the statements that exclude the actual value. exact
/// mode reads value-set statements, interval mode reads range statements.
inline double probability_surprise(std::span<const BeliefStatement* const> statements, double actual,
                                   ProbabilityMode mode) {
  const BeliefKind want = mode == ProbabilityMode::exact ? BeliefKind::value_set : BeliefKind::range;
  double s = 0;
  for (const auto* st : statements)
    if (st->kind == want && !st->admits(actual)) s += st->probability;
  return s;
}

/// Mean probability surprise over the (cell, measure) pairs holding at
/// least one statement of the mode's kind; nullopt when there are none.
inline std::optional<double> cube_probability_surprise(const CellSet& cells, const BeliefStore& beliefs,
                                                       ProbabilityMode mode) {
  const BeliefKind want = mode == ProbabilityMode::exact ? BeliefKind::value_set : BeliefKind::range;
  std::vector<double> v;
  for (const auto& c : cells.cells) {
    for (std::size_t m = 0; m < c.measures.size(); ++m) {
      auto st = beliefs.at(cells.levels, c.coord, cells.measure_names[m]);
      if (std::none_of(st.begin(), st.end(), [&](const BeliefStatement* s) { return s->kind == want; })) continue;
      v.push_back(probability_surprise(st, c.measures[m], mode));
    }
  }
  if (v.empty()) return std::nullopt;
  return apply_surprise_agg(std::move(v), SurpriseAgg::mean);
}

/// Label of a measure value; throws UnlabeledValue when no rule covers it.
inline std::string actual_label(const LabelingScheme& scheme, std::string_view measure, double v) {
  if (auto l = scheme.label_of(measure, v)) return *l;
  throw Error(Errc::unlabeled_value, "no label rule for " + std::string(measure) + " = " + std::to_string(v));
}

/// 0/1 for nominal domains, normalized position gap otherwise.
inline double label_distance(const LabelDomain& dom, std::string_view a, std::string_view b) {
  if (dom.kind == LabelKind::nominal) return a == b ? 0.0 : 1.0;
  return dom.distance(a, b);
}

/// f over cells of f_cell over per-measure label distances. Measures
/// without an expected label are left out; nullopt when nothing matches.
inline std::optional<double> label_surprise(const CellSet& cells, const ExpectedLabels& expected,
                                            const LabelingScheme& scheme, SurpriseAgg cell_agg = SurpriseAgg::max,
                                            SurpriseAgg cube_agg = SurpriseAgg::mean) {
  std::vector<double> per_cell;
  for (const auto& c : cells.cells) {
    std::vector<double> d;
    for (std::size_t m = 0; m < c.measures.size(); ++m) {
      auto exp = expected.find(cells.levels, c.coord, cells.measure_names[m]);
      if (!exp) continue;
      d.push_back(label_distance(scheme.domain, actual_label(scheme, cells.measure_names[m], c.measures[m]), *exp));
    }
    if (!d.empty()) per_cell.push_back(apply_surprise_agg(std::move(d), cell_agg));
  }
  if (per_cell.empty()) return std::nullopt;
  return apply_surprise_agg(std::move(per_cell), cube_agg);
}

/// True iff some cell has some measure whose label differs from the expected one.
inline bool strict_label_surprise(const CellSet& cells, const ExpectedLabels& expected, const LabelingScheme& scheme) {
  for (const auto& c : cells.cells)
    for (std::size_t m = 0; m < c.measures.size(); ++m) {
      auto exp = expected.find(cells.levels, c.coord, cells.measure_names[m]);
      if (exp && actual_label(scheme, cells.measure_names[m], c.measures[m]) != *exp) return true;
    }
  return false;
}

enum class LabelProbMode { strict, loose };

using LabelWeight = std::function<double(double distance)>;

/// strict: total probability of the other labels.
/// loose: the same sum with each term weighted by weight(distance to actual);
/// needs an ordered domain.
inline double prob_label_surprise(std::span<const BeliefStatement* const> statements, std::string_view actual,
                                  const LabelDomain& dom, LabelProbMode mode,
                                  const LabelWeight& weight = [](double d) { return d; }) {
  if (mode == LabelProbMode::loose && dom.kind == LabelKind::nominal)
    throw Error(Errc::nominal_loose_unsupported, "loose label surprise needs an ordered label domain");
  double s = 0;
  for (const auto* st : statements) {
    if (st->kind != BeliefKind::label || st->label == actual) continue;
    s += mode == LabelProbMode::strict ? st->probability : weight(dom.distance(st->label, actual)) * st->probability;
  }
  return s;
}

/// Mean probabilistic label surprise over (cell, measure) pairs with label beliefs.
inline std::optional<double> cube_prob_label_surprise(const CellSet& cells, const BeliefStore& beliefs,
                                                      const LabelingScheme& scheme, LabelProbMode mode) {
  if (mode == LabelProbMode::loose && scheme.domain.kind == LabelKind::nominal)
    throw Error(Errc::nominal_loose_unsupported, "loose label surprise needs an ordered label domain");
  std::vector<double> v;
  for (const auto& c : cells.cells)
    for (std::size_t m = 0; m < c.measures.size(); ++m) {
      auto st = beliefs.at(cells.levels, c.coord, cells.measure_names[m]);
      std::erase_if(st, [](const BeliefStatement* s) { return s->kind != BeliefKind::label; });
      if (st.empty()) continue;
      v.push_back(prob_label_surprise(st, actual_label(scheme, cells.measure_names[m], c.measures[m]), scheme.domain, mode));
    }
  if (v.empty()) return std::nullopt;
  return apply_surprise_agg(std::move(v), SurpriseAgg::mean);
}

}  // namespace cubeint
