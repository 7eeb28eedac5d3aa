#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cubeint {

enum class Errc {
  level_not_in_dimension,
  level_below_member,
  level_above_member,
  unknown_dimension,
  unknown_member,
  unknown_measure,
  unknown_level,
  inconsistent_rollup,
  empty_file,
  duplicate_coordinate,
  dimension_mismatch,
  schema_mismatch,
  level_mismatch,
  empty_collection,
  k_out_of_range,
  empty_result,
  pair_cap_exceeded,
  syntax_error,
  unknown_identifier,
  duplicate_dimension_atom,
  probability_out_of_range,
  overlapping_intervals,
  gap_in_coverage,
  unlabeled_value,
  nominal_loose_unsupported,
  no_expected_values,
  cached_result_mismatch,
  invalid_argument,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::level_not_in_dimension: return "LevelNotInDimension";
    case Errc::level_below_member: return "LevelBelowMember";
    case Errc::level_above_member: return "LevelAboveMember";
    case Errc::unknown_dimension: return "UnknownDimension";
    case Errc::unknown_member: return "UnknownMember";
    case Errc::unknown_measure: return "UnknownMeasure";
    case Errc::unknown_level: return "UnknownLevel";
    case Errc::inconsistent_rollup: return "InconsistentRollup";
    case Errc::empty_file: return "EmptyFile";
    case Errc::duplicate_coordinate: return "DuplicateCoordinate";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::level_mismatch: return "LevelMismatch";
    case Errc::empty_collection: return "EmptyCollection";
    case Errc::k_out_of_range: return "KOutOfRange";
    case Errc::empty_result: return "EmptyResult";
    case Errc::pair_cap_exceeded: return "PairCapExceeded";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unknown_identifier: return "UnknownIdentifier";
    case Errc::duplicate_dimension_atom: return "DuplicateDimensionAtom";
    case Errc::probability_out_of_range: return "ProbabilityOutOfRange";
    case Errc::overlapping_intervals: return "OverlappingIntervals";
    case Errc::gap_in_coverage: return "GapInCoverage";
    case Errc::unlabeled_value: return "UnlabeledValue";
    case Errc::nominal_loose_unsupported: return "NominalLooseUnsupported";
    case Errc::no_expected_values: return "NoExpectedValues";
    case Errc::cached_result_mismatch: return "CachedResultMismatch";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The code is
/// stable and meant for programmatic checks; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Parse failure with the byte offset into the input and the tokens the
/// parser would have accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
      : Error(Errc::syntax_error, describe(offset, expected, found)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string describe(std::size_t offset, const std::vector<std::string>& expected,
                              const std::string& found) {
    std::string s = "at byte " + std::to_string(offset) + ": found " + found + ", expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) s += i + 1 == expected.size() ? " or " : ", ";
      s += expected[i];
    }
    return s;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

}  // namespace cubeint
