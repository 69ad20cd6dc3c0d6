#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptmaml/sql/table.hpp"

namespace ptmaml::sql {

/// Query type. `Select` means "no aggregator". The enumerator order is the
/// class index used by the type classifier.
enum class SqlType { Count, Min, Max, Sum, Avg, Select };
inline constexpr std::size_t kSqlTypeCount = 6;
inline constexpr std::array<SqlType, kSqlTypeCount> kAllSqlTypes = {
    SqlType::Count, SqlType::Min, SqlType::Max, SqlType::Sum, SqlType::Avg, SqlType::Select};

enum class Comparator { Eq, Gt, Ge, Lt, Le };
inline constexpr std::array<Comparator, 5> kAllComparators = {
    Comparator::Eq, Comparator::Gt, Comparator::Ge, Comparator::Lt, Comparator::Le};

std::string_view type_name(SqlType t);          // "count", ..., "select"
std::optional<SqlType> type_from_name(std::string_view name);
std::string_view aggregator_keyword(SqlType t);  // "COUNT" ... ; "" for Select
std::string_view comparator_text(Comparator c);  // "=", ">", ">=", "<", "<="

struct Condition {
  std::string column;
  Comparator op = Comparator::Eq;
  std::string value;

  friend bool operator==(const Condition&, const Condition&) = default;
  friend auto operator<=>(const Condition&, const Condition&) = default;
};

struct SqlQuery {
  SqlType agg = SqlType::Select;
  std::string select_col;
  std::string table;
  std::vector<Condition> conds;

  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

/// Throws std::invalid_argument if a referenced column is not in the header
/// or the table id differs.
void validate_query(const SqlQuery& q, const Table& table);

/// "SELECT MIN(col) FROM t WHERE a = x AND b < 3". Keywords upper case,
/// single spaces, conditions in AST order, no WHERE when there are none.
std::string canonicalize(const SqlQuery& q);

inline SqlType sql_type_of(const SqlQuery& q) { return q.agg; }

/// Token count of the canonical form where each keyword, column name,
/// comparator and constant is one token.
int normalized_sql_length(const SqlQuery& q);

/// Aggregator, select column and table equal; conditions equal as multisets
/// (or as sequences when strict_order is set).
bool logical_form_match(const SqlQuery& pred, const SqlQuery& gold, bool strict_order = false);

} // namespace ptmaml::sql
