#pragma once

// The interestingness vector: every configured metric for one query,
// serialized as a JSON report. A null score means "not assessable".

#include <chrono>
#include <functional>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "cubeint/context.hpp"
#include "cubeint/novelty.hpp"
#include "cubeint/peculiarity.hpp"
#include "cubeint/relevance.hpp"
#include "cubeint/surprise.hpp"

namespace cubeint {

struct AssessConfig {
  std::set<std::string> metrics;  // "group.key" or "group"; empty selects everything
  double pi = 0.5;
  std::size_t k = 2;
  DistanceWeights weights;
  AggregationSpec peculiarity_agg;  // average by default
  SurpriseConfig surprise;
  std::uint64_t pair_cap = kDefaultPairCap;

  bool wants(const std::string& group, const std::string& key) const {
    return metrics.empty() || metrics.count(group) || metrics.count(group + "." + key);
  }
};

struct InterestReport {
  nlohmann::json json;

  std::optional<double> headline(const std::string& group) const {
    const auto& v = json.at("scores").at(group).at("score");
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  }
};

namespace detail {

class ReportBuilder {
 public:
  ReportBuilder(const AssessConfig& cfg, nlohmann::json& scores, nlohmann::json& timings)
      : cfg_(cfg), scores_(scores), timings_(timings) {}

  /// Runs one metric. Errors become a null score with the message recorded.
  void run(const std::string& group, const std::string& key, const std::function<nlohmann::json()>& fn) {
    if (!cfg_.wants(group, key)) return;
    auto t0 = std::chrono::steady_clock::now();
    nlohmann::json v;
    try {
      v = fn();
    } catch (const Error& e) {
      v = nullptr;
      scores_[group]["errors"][key] = e.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    scores_[group][key] = v;
    timings_[group + "." + key] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }

  void null_metric(const std::string& group, const std::string& key, const std::string& why) {
    if (!cfg_.wants(group, key)) return;
    scores_[group][key] = nullptr;
    scores_[group]["errors"][key] = why;
  }

 private:
  const AssessConfig& cfg_;
  nlohmann::json& scores_;
  nlohmann::json& timings_;
};

inline nlohmann::json opt(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline nlohmann::json pick(const nlohmann::json& group, const char* key) {
  return group.contains(key) ? group.at(key) : nlohmann::json(nullptr);
}

}  // namespace detail

/// Assesses q against the context. Headline scores: PDEN, GBDSR when goals
/// exist else PDER, syntactic peculiarity, normalized average value surprise.
inline InterestReport interestingness_vector(const DetailedCube& cube, const SessionContext& ctx, const CubeQuery& q,
                                             const AssessConfig& cfg = {}, const std::string& query_text = "") {
  const auto& s = cube.schema();
  validate(s, q);
  cfg.weights.check();
  nlohmann::json scores = {{"novelty", nlohmann::json::object()},
                           {"relevance", nlohmann::json::object()},
                           {"peculiarity", nlohmann::json::object()},
                           {"surprise", nlohmann::json::object()}};
  nlohmann::json timings = nlohmann::json::object();
  detail::ReportBuilder b(cfg, scores, timings);
  const auto history = ctx.history.queries();
  const std::span<const CubeQuery> H(history);

  // novelty
  b.run("novelty", "fslsn", [&] { return fslsn(q, H); });
  b.run("novelty", "pslsn", [&] { return pslsn(s, q, H).score; });
  b.run("novelty", "pslen", [&] { return pslen(cube, q, H).score; });
  b.run("novelty", "fsdn", [&] { return fsdn(s, q, H); });
  b.run("novelty", "pdsn", [&] { return pdsn(s, q, H).score; });
  b.run("novelty", "pden", [&] { return pden(cube, q, H).score; });
  b.run("novelty", "wdn", [&] { return wdn(cube, q, H).score; });
  if (ctx.beliefs.empty()) {
    b.null_metric("novelty", "belief", "no beliefs registered");
  } else {
    b.run("novelty", "belief", [&] {
      nlohmann::json j;
      for (auto m : {BeliefMode::same_level, BeliefMode::detailed, BeliefMode::arbitrary}) {
        auto r = belief_novelty(cube, q, ctx.beliefs, cfg.pi, m);
        j[belief_mode_name(m)] = r.score;
        j["skipped"][belief_mode_name(m)] = r.skipped;
      }
      return j;
    });
  }

  // relevance
  if (ctx.goals.empty()) {
    b.null_metric("relevance", "gbdsr", "no goal declared");
  } else {
    b.run("relevance", "gbdsr", [&] { return multi_goal_gbdsr(s, q, ctx.goals).score; });
  }
  const auto& beacons = ctx.beacons.empty() ? history : ctx.beacons;
  b.run("relevance", "fsslr", [&] { return same_level_relevance(cube, q, beacons, Coverage::full, Basis::syntactic); });
  b.run("relevance", "psslr", [&] { return same_level_relevance(cube, q, beacons, Coverage::partial, Basis::syntactic); });
  b.run("relevance", "fdsr", [&] { return detailed_relevance(cube, q, H, Coverage::full, Basis::syntactic).score; });
  b.run("relevance", "pdsr", [&] { return pdsr(s, q, H).score; });
  b.run("relevance", "pder", [&] { return pder(cube, q, H).score; });

  // peculiarity
  if (history.empty()) {
    for (const char* k : {"syntactic", "value_cr", "value_hausdorff", "jaccard"})
      b.null_metric("peculiarity", k, "empty history");
  } else {
    b.run("peculiarity", "syntactic", [&] { return syntactic_peculiarity(s, q, H, cfg.peculiarity_agg, cfg.weights); });
    b.run("peculiarity", "value_cr", [&] {
      return value_peculiarity(cube, q, H, ValueDistance::closest_relative, cfg.peculiarity_agg, cfg.pair_cap);
    });
    b.run("peculiarity", "value_hausdorff", [&] {
      return value_peculiarity(cube, q, H, ValueDistance::hausdorff, cfg.peculiarity_agg, cfg.pair_cap);
    });
    b.run("peculiarity", "jaccard", [&] { return jaccard_peculiarity(cube, q, H, cfg.k); });
  }

  // surprise
  std::optional<CellSet> cells;
  auto result = [&]() -> const CellSet& {
    if (!cells) cells = evaluate(cube, q);
    return *cells;
  };
  b.run("surprise", "value", [&] { return detail::opt(value_surprise(result(), ctx.expected_values, cfg.surprise)); });
  b.run("surprise", "value_avg_norm", [&] { return detail::opt(value_surprise_avg_normalized(result(), ctx.expected_values)); });
  b.run("surprise", "prob_exact", [&] { return detail::opt(cube_probability_surprise(result(), ctx.beliefs, ProbabilityMode::exact)); });
  b.run("surprise", "prob_interval",
        [&] { return detail::opt(cube_probability_surprise(result(), ctx.beliefs, ProbabilityMode::interval)); });
  if (!ctx.labels) {
    for (const char* k : {"label", "label_strict", "label_prob_strict", "label_prob_loose"})
      b.null_metric("surprise", k, "no labeling scheme");
  } else {
    const auto& L = *ctx.labels;
    b.run("surprise", "label", [&] { return detail::opt(label_surprise(result(), ctx.expected_labels, L)); });
    b.run("surprise", "label_strict", [&]() -> nlohmann::json {
      if (ctx.expected_labels.empty()) return nullptr;
      return strict_label_surprise(result(), ctx.expected_labels, L);
    });
    b.run("surprise", "label_prob_strict",
          [&] { return detail::opt(cube_prob_label_surprise(result(), ctx.beliefs, L, LabelProbMode::strict)); });
    b.run("surprise", "label_prob_loose",
          [&] { return detail::opt(cube_prob_label_surprise(result(), ctx.beliefs, L, LabelProbMode::loose)); });
  }

  scores["novelty"]["score"] = detail::pick(scores["novelty"], "pden");
  scores["relevance"]["score"] =
      ctx.goals.empty() ? detail::pick(scores["relevance"], "pder") : detail::pick(scores["relevance"], "gbdsr");
  scores["peculiarity"]["score"] = detail::pick(scores["peculiarity"], "syntactic");
  scores["surprise"]["score"] = detail::pick(scores["surprise"], "value_avg_norm");

  nlohmann::json config = {
      {"pi", cfg.pi},
      {"k", cfg.k},
      {"weights", {cfg.weights.filter, cfg.weights.levels, cfg.weights.measures}},
      {"peculiarity_agg", agg_kind_name(cfg.peculiarity_agg.kind)},
      {"surprise_cell_agg", surprise_agg_name(cfg.surprise.cell_agg)},
      {"surprise_cube_agg", surprise_agg_name(cfg.surprise.cube_agg)},
      {"history_size", history.size()},
      {"beliefs", ctx.beliefs.size()},
      {"goals", ctx.goals.size()},
      {"fact_rows", cube.size()},
  };
  if (cfg.peculiarity_agg.kind == AggKind::knn) config["peculiarity_k"] = cfg.peculiarity_agg.k;
  if (!cfg.metrics.empty()) config["metrics"] = cfg.metrics;

  InterestReport rep;
  rep.json = {{"query", query_text}, {"scores", scores}, {"timings_ms", timings}, {"config", config}};
  return rep;
}

}  // namespace cubeint
