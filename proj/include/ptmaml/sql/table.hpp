#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ptmaml::sql {

struct Table {
  std::string id;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  /// Throws std::invalid_argument unless rectangular with a unique header.
  void validate() const;

  friend bool operator==(const Table&, const Table&) = default;
};

nlohmann::json table_to_json(const Table& t);
Table table_from_json(const nlohmann::json& j);

/// JSON-lines, one {"id", "header", "rows"} object per line. Errors carry
/// the 1-based line number.
std::vector<Table> read_tables(const std::filesystem::path& path);
void write_tables(const std::filesystem::path& path, const std::vector<Table>& tables);

} // namespace ptmaml::sql
