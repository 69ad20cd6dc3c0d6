#include "ptmaml/sql/executor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptmaml/sql/text.hpp"

namespace ptmaml::sql {

ExecResult ExecResult::of_cells(std::vector<std::string> c) {
  std::sort(c.begin(), c.end());
  return {Kind::Cells, std::move(c), 0.0};
}

bool condition_holds(const Condition& c, std::string_view cell) {
  std::string lhs = normalize_value(cell);
  std::string rhs = normalize_value(c.value);
  if (c.op == Comparator::Eq) return lhs == rhs;
  auto a = parse_number(lhs);
  auto b = parse_number(rhs);
  if (!a || !b) return false;
  switch (c.op) {
    case Comparator::Gt: return *a > *b;
    case Comparator::Ge: return *a >= *b;
    case Comparator::Lt: return *a < *b;
    case Comparator::Le: return *a <= *b;
    case Comparator::Eq: break;
  }
  return false;
}

ExecResult execute(const SqlQuery& q, const Table& table) {
  auto sel = table.column_index(q.select_col);
  if (!sel) throw ExecError("column '" + q.select_col + "' not in table " + table.id);
  std::vector<std::size_t> cond_cols;
  for (const auto& c : q.conds) {
    auto idx = table.column_index(c.column);
    if (!idx) throw ExecError("column '" + c.column + "' not in table " + table.id);
    cond_cols.push_back(*idx);
  }

  std::vector<std::string> picked;
  for (const auto& row : table.rows) {
    bool pass = true;
    for (std::size_t k = 0; k < q.conds.size() && pass; ++k) pass = condition_holds(q.conds[k], row[cond_cols[k]]);
    if (pass) picked.push_back(normalize_value(row[*sel]));
  }

  switch (q.agg) {
    case SqlType::Select:
      return ExecResult::of_cells(std::move(picked));
    case SqlType::Count:
      return ExecResult::of_number(static_cast<double>(picked.size()));
    default:
      break;
  }

  std::vector<double> nums;
  for (const auto& cell : picked) {
    if (auto v = parse_number(cell)) nums.push_back(*v);
  }
  if (nums.empty()) return ExecResult::empty();
  double acc = 0.0;
  switch (q.agg) {
    case SqlType::Min:
      acc = *std::min_element(nums.begin(), nums.end());
      break;
    case SqlType::Max:
      acc = *std::max_element(nums.begin(), nums.end());
      break;
    case SqlType::Sum:
    case SqlType::Avg:
      for (double v : nums) acc += v;
      if (q.agg == SqlType::Avg) acc /= static_cast<double>(nums.size());
      break;
    default:
      break;
  }
  return ExecResult::of_number(acc);
}

bool results_equal(const ExecResult& a, const ExecResult& b, double tolerance) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExecResult::Kind::Empty: return true;
    case ExecResult::Kind::Number: return std::abs(a.number - b.number) <= tolerance;
    case ExecResult::Kind::Cells: return a.cells == b.cells;
  }
  return false;
}

bool execution_match(const SqlQuery& pred, const SqlQuery& gold, const Table& table) {
  ExecResult expected = execute(gold, table);
  ExecResult got;
  try {
    got = execute(pred, table);
  } catch (const ExecError&) {
    return false;
  }
  return results_equal(got, expected);
}

} // namespace ptmaml::sql
