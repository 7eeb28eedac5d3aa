#pragma once

// Deterministic synthetic loan cube with fixed dimension domains:
//   Account  Account < District < Region   (4500 / 77 / 8 members)
//   Date     Day < Month < Year            (1993-01-01 .. 1998-12-31)
//   Status   Status                        (A, B, C, D)
// and one measure Amt, log-uniform integer in [1000, 600000].

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "cubeint/engine.hpp"
#include "cubeint/io.hpp"
#include "cubeint/mdm.hpp"

namespace cubeint {

/// Platform-independent draws on top of mt19937_64 (whose raw output is
/// fixed by the standard, unlike the library distributions).
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw Error(Errc::invalid_argument, "empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = eng_();
    while (x >= limit);
    return x % n;
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool coin(double p) { return unit() < p; }

  /// k distinct values from [0, n), sorted.
  std::vector<std::uint32_t> sample(std::uint32_t n, std::uint32_t k) {
    std::vector<std::uint32_t> pool(n);
    for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
    for (std::uint32_t i = 0; i < k && i < n; ++i) std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(std::min(k, n));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 eng_;
};

struct StarDomains {
  std::uint32_t accounts = 4500;
  std::uint32_t districts = 77;
  std::uint32_t regions = 8;
  int first_year = 1993;
  int last_year = 1998;
  std::vector<std::string> statuses{"A", "B", "C", "D"};
  double amt_min = 1000;
  double amt_max = 600000;
};

namespace detail {

inline int days_in_month(int y, int m) {
  static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : kDays[m - 1];
}

inline std::string pad(int v, int width) {
  std::string s = std::to_string(v);
  return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

}  // namespace detail

inline Dimension star_account_dimension(const StarDomains& dom = {}) {
  std::vector<std::vector<std::string>> paths;
  paths.reserve(dom.accounts);
  for (std::uint32_t a = 0; a < dom.accounts; ++a) {
    std::uint32_t d = a % dom.districts;
    paths.push_back({"A" + detail::pad(static_cast<int>(a + 1), 4), "D" + detail::pad(static_cast<int>(d + 1), 2),
                     "R" + std::to_string(d % dom.regions + 1)});
  }
  return Dimension::from_paths("Account", {"Account", "District", "Region"}, paths);
}

inline Dimension star_date_dimension(const StarDomains& dom = {}) {
  std::vector<std::vector<std::string>> paths;
  for (int y = dom.first_year; y <= dom.last_year; ++y)
    for (int m = 1; m <= 12; ++m) {
      std::string month = std::to_string(y) + "-" + detail::pad(m, 2);
      for (int d = 1; d <= detail::days_in_month(y, m); ++d)
        paths.push_back({month + "-" + detail::pad(d, 2), month, std::to_string(y)});
    }
  return Dimension::from_paths("Date", {"Day", "Month", "Year"}, paths);
}

inline Dimension star_status_dimension(const StarDomains& dom = {}) {
  std::vector<std::vector<std::string>> paths;
  for (const auto& s : dom.statuses) paths.push_back({s});
  return Dimension::from_paths("Status", {"Status"}, paths);
}

/// `rows` distinct facts drawn uniformly from the coordinate space.
inline DetailedCube generate_star(std::size_t rows, std::uint64_t seed, const StarDomains& dom = {}) {
  if (rows == 0) throw Error(Errc::invalid_argument, "row count must be positive");
  CubeSchema schema{{star_account_dimension(dom), star_date_dimension(dom), star_status_dimension(dom)}, {"Amt"}};
  std::uint64_t space = 1;
  for (const auto& d : schema.dims) space *= d.cardinality(0);
  if (rows > space / 2) throw Error(Errc::invalid_argument, "row count too close to the coordinate space size");
  DetailedCube cube(std::move(schema));
  const auto& s = cube.schema();
  cube.reserve(rows);
  PortableRng rng(seed);
  CoordPacker packer(s, s.base_levels());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(rows * 2);
  Coord c(3);
  const double lo = std::log(dom.amt_min), hi = std::log(dom.amt_max);
  while (cube.size() < rows) {
    for (std::size_t d = 0; d < 3; ++d) c[d] = static_cast<MemberId>(rng.below(s.dims[d].cardinality(0)));
    if (!seen.insert(packer.pack(c)).second) continue;
    double amt = std::round(std::exp(lo + (hi - lo) * rng.unit()));
    cube.add_row(c, std::span<const double>(&amt, 1));
  }
  return cube;
}

/// Writes `<Dim>.csv` hierarchies under dir/schema and dir/facts.csv.
inline void write_star(const DetailedCube& cube, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "schema");
  for (const auto& d : cube.schema().dims) {
    std::ofstream out(dir / "schema" / (d.name() + ".csv"), std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write into " + dir.string());
    write_dimension(d, out);
  }
  std::ofstream out(dir / "facts.csv", std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write into " + dir.string());
  write_facts(cube, out);
}

/// A District x Month avg(Amt) query filtered on a few regions, statuses and years.
inline CubeQuery random_star_query(const CubeSchema& s, PortableRng& rng) {
  const int acc = s.dim_index("Account"), date = s.dim_index("Date"), st = s.dim_index("Status");
  const Dimension& A = s.dims[acc];
  const Dimension& D = s.dims[date];
  const Dimension& S = s.dims[st];
  CubeQuery q;
  q.groupers = s.all_levels();
  q.groupers[acc] = A.level("District");
  q.groupers[date] = D.level("Month");
  q.aggregates.push_back({AggFn::avg, s.measure_index("Amt")});
  const int region = A.level("Region"), year = D.level("Year");
  auto nreg = static_cast<std::uint32_t>(A.cardinality(region));
  auto nyear = static_cast<std::uint32_t>(D.cardinality(year));
  auto nst = static_cast<std::uint32_t>(S.cardinality(0));
  q.condition.add({acc, region, rng.sample(nreg, std::max<std::uint32_t>(1, nreg / 2))});
  q.condition.add({st, 0, rng.sample(nst, std::max<std::uint32_t>(1, nst / 2))});
  q.condition.add({date, year, rng.sample(nyear, std::max<std::uint32_t>(1, nyear / 2))});
  return q;
}

inline SelectionCondition random_star_goal(const CubeSchema& s, PortableRng& rng) {
  const int acc = s.dim_index("Account");
  const int region = s.dims[acc].level("Region");
  auto nreg = static_cast<std::uint32_t>(s.dims[acc].cardinality(region));
  SelectionCondition g;
  g.add({acc, region, rng.sample(nreg, std::max<std::uint32_t>(1, nreg / 2))});
  return g;
}

}  // namespace cubeint
