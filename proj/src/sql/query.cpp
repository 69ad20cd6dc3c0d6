#include "ptmaml/sql/query.hpp"

#include <algorithm>
#include <stdexcept>

namespace ptmaml::sql {

std::string_view type_name(SqlType t) {
  switch (t) {
    case SqlType::Count: return "count";
    case SqlType::Min: return "min";
    case SqlType::Max: return "max";
    case SqlType::Sum: return "sum";
    case SqlType::Avg: return "avg";
    case SqlType::Select: return "select";
  }
  return "select";
}

std::optional<SqlType> type_from_name(std::string_view name) {
  for (SqlType t : kAllSqlTypes) {
    if (type_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view aggregator_keyword(SqlType t) {
  switch (t) {
    case SqlType::Count: return "COUNT";
    case SqlType::Min: return "MIN";
    case SqlType::Max: return "MAX";
    case SqlType::Sum: return "SUM";
    case SqlType::Avg: return "AVG";
    case SqlType::Select: return "";
  }
  return "";
}

std::string_view comparator_text(Comparator c) {
  switch (c) {
    case Comparator::Eq: return "=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
  }
  return "=";
}

void validate_query(const SqlQuery& q, const Table& table) {
  if (q.table != table.id) {
    throw std::invalid_argument("query targets table '" + q.table + "', not '" + table.id + "'");
  }
  if (!table.column_index(q.select_col)) {
    throw std::invalid_argument("unknown column '" + q.select_col + "'");
  }
  for (const auto& c : q.conds) {
    if (!table.column_index(c.column)) throw std::invalid_argument("unknown column '" + c.column + "'");
  }
}

std::string canonicalize(const SqlQuery& q) {
  std::string out = "SELECT ";
  if (q.agg == SqlType::Select) {
    out += q.select_col;
  } else {
    out += aggregator_keyword(q.agg);
    out += "(" + q.select_col + ")";
  }
  out += " FROM " + q.table;
  for (std::size_t i = 0; i < q.conds.size(); ++i) {
    out += i == 0 ? " WHERE " : " AND ";
    out += q.conds[i].column;
    out += " ";
    out += comparator_text(q.conds[i].op);
    out += " ";
    out += q.conds[i].value;
  }
  return out;
}

int normalized_sql_length(const SqlQuery& q) {
  // select, column, from, table
  int n = 4;
  if (q.agg != SqlType::Select) n += 1;
  if (!q.conds.empty()) {
    auto k = static_cast<int>(q.conds.size());
    n += 1 + 3 * k + (k - 1);  // where, (col op value)*, and*
  }
  return n;
}

bool logical_form_match(const SqlQuery& pred, const SqlQuery& gold, bool strict_order) {
  if (pred.agg != gold.agg || pred.select_col != gold.select_col || pred.table != gold.table) return false;
  if (pred.conds.size() != gold.conds.size()) return false;
  if (strict_order) return pred.conds == gold.conds;
  auto a = pred.conds;
  auto b = gold.conds;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

} // namespace ptmaml::sql
