#include "ptmaml/sql/table.hpp"

#include <fstream>
#include <set>

namespace ptmaml::sql {

using nlohmann::json;

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

void Table::validate() const {
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (!seen.insert(h).second) throw std::invalid_argument("table " + id + ": duplicate column '" + h + "'");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw std::invalid_argument("table " + id + ": row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " cells, header has " +
                                  std::to_string(header.size()));
    }
  }
}

json table_to_json(const Table& t) { return {{"id", t.id}, {"header", t.header}, {"rows", t.rows}}; }

Table table_from_json(const json& j) {
  Table t;
  t.id = j.at("id").get<std::string>();
  t.header = j.at("header").get<std::vector<std::string>>();
  t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
  t.validate();
  return t;
}

std::vector<Table> read_tables(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tables file " + path.string());
  std::vector<Table> tables;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      tables.push_back(table_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return tables;
}

void write_tables(const std::filesystem::path& path, const std::vector<Table>& tables) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tables file " + path.string());
  for (const auto& t : tables) out << table_to_json(t).dump() << '\n';
}

} // namespace ptmaml::sql
