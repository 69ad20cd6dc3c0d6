#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "ptmaml/sql/query.hpp"
#include "ptmaml/sql/table.hpp"

namespace ptmaml::sql {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Parses the restricted grammar
///   SELECT [AGG(]col[)] FROM t [WHERE col op value (AND col op value)*]
/// Keywords are case-insensitive; column names are matched greedily
/// (longest first) against `table.header`, so multiword names need no
/// quoting. A value extends to the next " AND " that is followed by a
/// column and comparator, or to the end. Comparators: = > >= < <= and the
/// Unicode forms of >= and <=.
SqlQuery parse_sql(std::string_view text, const Table& table);

} // namespace ptmaml::sql
