#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ptmaml/sql/query.hpp"
#include "ptmaml/sql/table.hpp"

namespace ptmaml::sql {

class ExecError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExecResult {
  enum class Kind { Cells, Number, Empty };

  Kind kind = Kind::Empty;
  std::vector<std::string> cells;  // sorted normalized cells (Select)
  double number = 0.0;             // Count and numeric aggregates

  static ExecResult empty() { return {}; }
  static ExecResult of_number(double v) { return {Kind::Number, {}, v}; }
  static ExecResult of_cells(std::vector<std::string> c);
};

/// Scans the rows. Equality compares normalized strings; order comparators
/// need both sides numeric and are false otherwise. Count counts passing
/// rows; Min/Max/Sum/Avg aggregate the numeric select cells and yield Empty
/// when there are none.
ExecResult execute(const SqlQuery& q, const Table& table);

bool condition_holds(const Condition& c, std::string_view cell);

/// Same kind; equal cell multisets; numbers within `tolerance`.
bool results_equal(const ExecResult& a, const ExecResult& b, double tolerance = 1e-9);

/// An execution failure of `pred` counts as a mismatch; a failure of `gold`
/// propagates as ExecError.
bool execution_match(const SqlQuery& pred, const SqlQuery& gold, const Table& table);

} // namespace ptmaml::sql
