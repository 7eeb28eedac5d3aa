#pragma once

// Hand-built hierarchies and the reference loan fixture shared by the tests.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cubeint/cubeint.hpp"

namespace fixtures {

using namespace cubeint;

/// City < Country < Continent < ALL.
inline Dimension geo() {
  return Dimension::from_paths("Geo", {"City", "Country", "Continent"},
                               {{"Athens", "Greece", "Europe"},
                                {"Thessaloniki", "Greece", "Europe"},
                                {"Paris", "France", "Europe"},
                                {"Rome", "Italy", "Europe"},
                                {"Toronto", "Canada", "America"},
                                {"Vancouver", "Canada", "America"},
                                {"New York", "USA", "America"}});
}

/// Day < Month < Year < ALL over the given years.
inline Dimension calendar(std::vector<int> years) {
  std::vector<std::vector<std::string>> paths;
  for (int y : years)
    for (int m = 1; m <= 12; ++m) {
      int nd = m == 2 ? ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0 ? 29 : 28) : (m == 4 || m == 6 || m == 9 || m == 11) ? 30 : 31;
      char month[8];
      std::snprintf(month, sizeof month, "%04d-%02d", y, m);
      for (int d = 1; d <= nd; ++d) {
        char day[12];
        std::snprintf(day, sizeof day, "%s-%02d", month, d);
        paths.push_back({day, month, std::to_string(y)});
      }
    }
  return Dimension::from_paths("Date", {"Day", "Month", "Year"}, paths);
}

/// Dimension `name` with base members <prefix>0..n-1 grouped in pairs under <prefix>g0...
inline Dimension paired(const std::string& name, const std::string& prefix, int n) {
  std::vector<std::vector<std::string>> paths;
  for (int i = 0; i < n; ++i) paths.push_back({prefix + std::to_string(i), prefix + "g" + std::to_string(i / 2)});
  return Dimension::from_paths(name, {name, name + "G"}, paths);
}

/// X and Y paired dimensions with one measure v.
inline CubeSchema grid_schema(int nx, int ny) { return CubeSchema{{paired("X", "x", nx), paired("Y", "y", ny)}, {"v"}}; }

/// Every base coordinate of the schema as a fact row, v = 1 + row index.
inline DetailedCube full_cube(CubeSchema s) {
  DetailedCube cube(std::move(s));
  const auto& sc = cube.schema();
  Coord c(sc.dim_count(), 0);
  double v = 1;
  while (true) {
    cube.add_row(c, std::span<const double>(&v, 1));
    v += 1;
    std::size_t d = 0;
    while (d < c.size() && ++c[d] == sc.dims[d].cardinality(0)) c[d++] = 0;
    if (d == c.size()) break;
  }
  return cube;
}

inline std::filesystem::path fixture_dir() { return std::filesystem::path(CUBEINT_FIXTURES); }

struct Reference {
  DetailedCube cube;
  std::string query_text;
  CubeQuery q;
  std::vector<SessionLine> session;
  std::vector<CubeQuery> history;
  ExpectedValues expected;
  std::vector<SelectionCondition> goals;
};

inline Reference load_reference() {
  const auto dir = fixture_dir() / "reference";
  Reference r;
  r.cube = load_dataset(dir / "schema", dir / "facts.csv");
  const auto& s = r.cube.schema();
  r.query_text = read_text_file(dir / "query.txt");
  while (!r.query_text.empty() && (r.query_text.back() == '\n' || r.query_text.back() == '\r')) r.query_text.pop_back();
  r.q = parse_query(s, r.query_text);
  r.session = parse_session(s, read_text_file(dir / "history.txt"));
  for (const auto& l : r.session) r.history.push_back(l.query);
  auto in = open_input(dir / "expected.csv");
  r.expected = ExpectedValues::load(s, in);
  r.goals = parse_goals(s, read_text_file(dir / "goal.txt"));
  return r;
}

/// Small cube over an explicit schema, filled from (labels..., values...) rows.
inline DetailedCube make_cube(CubeSchema s, const std::vector<std::pair<std::vector<std::string>, std::vector<double>>>& rows) {
  DetailedCube cube(std::move(s));
  const auto& sc = cube.schema();
  for (const auto& [labels, vals] : rows) {
    Coord c;
    for (std::size_t d = 0; d < labels.size(); ++d) c.push_back(sc.dims[d].member(0, labels[d]).id);
    cube.add_row(c, vals);
  }
  return cube;
}

}  // namespace fixtures
