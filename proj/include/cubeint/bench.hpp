#pragma once

// Scaling benchmark over generated loan cubes: median wall time per
// (metric, fact rows, history size), plus the linear-growth checks.

#include <algorithm>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubeint/generator.hpp"
#include "cubeint/novelty.hpp"
#include "cubeint/peculiarity.hpp"
#include "cubeint/relevance.hpp"

namespace cubeint {

struct BenchConfig {
  std::vector<std::size_t> base_sizes{10'000, 100'000, 1'000'000};
  std::vector<std::size_t> history_sizes{1, 5, 10};
  std::uint64_t seed = 7;
  int reps = 5;
  double min_sample_ms = 5.0;  // calls are repeated until one sample lasts this long
};

struct BenchCell {
  std::string metric;
  std::size_t base = 0;
  std::size_t history = 0;
  double median_ms = 0;
  std::vector<double> samples_ms;
};

struct ScalingCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchCell> cells;

  double median(const std::string& metric, std::size_t base, std::size_t history) const {
    for (const auto& c : cells)
      if (c.metric == metric && c.base == base && c.history == history) return c.median_ms;
    throw Error(Errc::invalid_argument, "no bench cell for " + metric);
  }

  /// Linear growth in fact rows: each step's time ratio divided by its size
  /// ratio must stay in [0.5, 2]. Linear growth in history size: an affine
  /// fit t = a + b*h with b > 0 must hold every point within [0.5x, 2x].
  /// The syntactic goal metric must vary by less than 2x across fact sizes.
  std::vector<ScalingCheck> scaling_checks() const {
    std::vector<ScalingCheck> out;
    const auto& B = config.base_sizes;
    const auto& H = config.history_sizes;
    const std::size_t hmax = H.back(), bmax = B.back();
    char buf[160];
    for (const char* m : {"pden", "pder", "jaccard"}) {
      ScalingCheck c{std::string(m) + " vs fact rows", true, ""};
      for (std::size_t i = 1; i < B.size(); ++i) {
        double r = (median(m, B[i], hmax) / median(m, B[i - 1], hmax)) / (double(B[i]) / double(B[i - 1]));
        std::snprintf(buf, sizeof buf, "%s%zu->%zu: %.3f", c.detail.empty() ? "" : ", ", B[i - 1], B[i], r);
        c.detail += buf;
        c.pass = c.pass && r >= 0.5 && r <= 2.0;
      }
      out.push_back(std::move(c));

      ScalingCheck h{std::string(m) + " vs history size", true, ""};
      std::vector<double> xs, ys;
      for (auto hs : H) {
        xs.push_back(double(hs));
        ys.push_back(median(m, bmax, hs));
      }
      const double n = double(xs.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      double denom = n * sxx - sx * sx;
      double slope = denom == 0 ? 0 : (n * sxy - sx * sy) / denom;
      double icept = (sy - slope * sx) / n;
      std::snprintf(buf, sizeof buf, "fit %.3f + %.3f*h ms", icept, slope);
      h.detail = buf;
      h.pass = slope > 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        double fit = icept + slope * xs[i];
        double ratio = fit > 0 ? ys[i] / fit : 0;
        std::snprintf(buf, sizeof buf, ", h=%g: %.3f of fit", xs[i], ratio);
        h.detail += buf;
        h.pass = h.pass && ratio >= 0.5 && ratio <= 2.0;
      }
      out.push_back(std::move(h));
    }
    ScalingCheck g{"gbdsr vs fact rows", true, ""};
    double lo = 1e300, hi = 0;
    for (auto bs : B) {
      double t = median("gbdsr", bs, hmax);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    std::snprintf(buf, sizeof buf, "max/min %.3f", lo > 0 ? hi / lo : 0.0);
    g.detail = buf;
    g.pass = lo > 0 && hi / lo < 2.0;
    out.push_back(std::move(g));
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config"] = {{"base_sizes", config.base_sizes},
                   {"history_sizes", config.history_sizes},
                   {"seed", config.seed},
                   {"reps", config.reps}};
    for (const auto& c : cells)
      j["cells"].push_back({{"metric", c.metric},
                            {"base", c.base},
                            {"history", c.history},
                            {"median_ms", c.median_ms},
                            {"samples_ms", c.samples_ms}});
    for (const auto& s : scaling_checks())
      j["scaling"].push_back({{"check", s.name}, {"pass", s.pass}, {"detail", s.detail}});
    return j;
  }
};

namespace detail {

/// Per-call wall time in ms, repeating the call until the sample is long enough.
inline double time_call(const std::function<void()>& fn, double min_ms) {
  using clock = std::chrono::steady_clock;
  std::size_t iters = 0;
  auto t0 = clock::now();
  double elapsed = 0;
  do {
    fn();
    ++iters;
    elapsed = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  } while (elapsed < min_ms);
  return elapsed / static_cast<double>(iters);
}

}  // namespace detail

/// `progress`, when set, receives one line per finished cell.
inline BenchReport run_benchmark(const BenchConfig& cfg,
                                 const std::function<void(const std::string&)>& progress = nullptr) {
  if (cfg.base_sizes.empty() || cfg.history_sizes.empty() || cfg.reps < 1)
    throw Error(Errc::invalid_argument, "benchmark needs sizes and at least one repetition");
  BenchReport rep;
  rep.config = cfg;
  const std::size_t hmax = *std::max_element(cfg.history_sizes.begin(), cfg.history_sizes.end());
  for (std::size_t base : cfg.base_sizes) {
    DetailedCube cube = generate_star(base, cfg.seed);
    const auto& s = cube.schema();
    // queries depend on the seed only, so every fact size sees the same ones
    PortableRng qrng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    CubeQuery q = random_star_query(s, qrng);
    std::vector<CubeQuery> all_hist;
    for (std::size_t i = 0; i < hmax; ++i) all_hist.push_back(random_star_query(s, qrng));
    SelectionCondition goal = random_star_goal(s, qrng);
    for (std::size_t h : cfg.history_sizes) {
      std::span<const CubeQuery> H(all_hist.data(), h);
      std::vector<std::pair<std::string, std::function<void()>>> metrics = {
          {"pden", [&] { (void)pden(cube, q, H); }},
          {"pder", [&] { (void)pder(cube, q, H); }},
          {"jaccard", [&] { (void)jaccard_peculiarity(cube, q, H, 1); }},
          {"gbdsr", [&] { (void)gbdsr(s, q, goal); }},
      };
      for (auto& [name, fn] : metrics) {
        BenchCell cell{name, base, h, 0, {}};
        fn();  // warm-up
        for (int r = 0; r < cfg.reps; ++r) cell.samples_ms.push_back(detail::time_call(fn, cfg.min_sample_ms));
        auto sorted = cell.samples_ms;
        std::sort(sorted.begin(), sorted.end());
        cell.median_ms = sorted[sorted.size() / 2];
        if (progress) {
          char buf[128];
          std::snprintf(buf, sizeof buf, "%-8s rows=%-8zu history=%-3zu median %.4f ms", name.c_str(), base, h,
                        cell.median_ms);
          progress(buf);
        }
        rep.cells.push_back(std::move(cell));
      }
    }
  }
  return rep;
}

}  // namespace cubeint
