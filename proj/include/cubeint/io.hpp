#pragma once

// Filesystem helpers: schema directories, fact files, text files.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cubeint/csv.hpp"
#include "cubeint/engine.hpp"
#include "cubeint/error.hpp"
#include "cubeint/mdm.hpp"

namespace cubeint {

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + p.string());
  return in;
}

/// One hierarchy CSV per dimension, `<Dimension>.csv`, loaded in name order.
inline std::vector<Dimension> load_schema_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(Errc::io_error, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(Errc::empty_file, "no hierarchy CSVs in " + dir.string());
  std::vector<Dimension> dims;
  for (const auto& f : files) {
    auto in = open_input(f);
    dims.push_back(load_dimension(f.stem().string(), in));
  }
  return dims;
}

inline DetailedCube load_dataset(const std::filesystem::path& schema_dir, const std::filesystem::path& facts) {
  auto dims = load_schema_dir(schema_dir);
  auto in = open_input(facts);
  return load_facts(std::move(dims), in);
}

/// Inverse of load_dimension: one rollup path per base member.
inline void write_dimension(const Dimension& d, std::ostream& out) {
  for (int l = 0; l < d.height(); ++l) out << (l ? "," : "") << csv::quote_field(d.level_name(l));
  out << "\n";
  for (MemberId b = 0; b < d.cardinality(0); ++b) {
    for (int l = 0; l < d.height(); ++l)
      out << (l ? "," : "") << csv::quote_field(d.label({l, d.base_anc(b, l)}));
    out << "\n";
  }
}

inline void write_facts(const DetailedCube& cube, std::ostream& out) {
  const auto& s = cube.schema();
  bool first = true;
  for (const auto& d : s.dims) {
    out << (first ? "" : ",") << csv::quote_field(d.name());
    first = false;
  }
  for (const auto& m : s.measures) out << "," << csv::quote_field(m);
  out << "\n";
  char buf[64];
  for (RowId r = 0; r < cube.size(); ++r) {
    for (std::size_t d = 0; d < s.dim_count(); ++d)
      out << (d ? "," : "") << csv::quote_field(s.dims[d].label({0, cube.at(d, r)}));
    for (std::size_t m = 0; m < s.measures.size(); ++m) {
      auto res = std::to_chars(buf, buf + sizeof buf, cube.measure(m, r));
      out << "," << std::string_view(buf, res.ptr - buf);
    }
    out << "\n";
  }
}

}  // namespace cubeint
